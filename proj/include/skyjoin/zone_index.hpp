// skyjoin/zone_index.hpp - declination-zone candidate lookup
#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "skyjoin/geometry.hpp"

namespace skyjoin::zone {

/// Zone index over a fixed detection list.  `sky` and `pos` are borrowed and
/// must outlive the index.  The zone and RA windows only ever over-select;
/// an exact angular-distance check runs before anything reaches the visitor,
/// so lookups are exact for any radius and zone height.
class ZoneIndex {
  public:
    ZoneIndex(const std::vector<sphere::SkyCoord>& sky,
              const std::vector<sphere::UnitVector>& pos, double zone_height_deg);

    double zone_height_deg() const { return height_deg_; }
    std::size_t size() const { return sky_->size(); }

    /// Calls visit(index, psi_rad) for every detection with angular distance
    /// psi <= radius_rad from the probe, in (zone, ra, index) order.
    template <typename F>
    void for_candidates(const sphere::SkyCoord& probe, const sphere::UnitVector& probe_pos,
                        double radius_rad, F&& visit) const {
        if (radius_rad < 0.0) return;
        sphere::ZoneRange zr = sphere::zone_window(
            sphere::zone_of(probe.dec_deg, height_deg_), radius_rad, height_deg_);
        for (int z = zr.lo; z <= zr.hi; ++z) {
            const std::vector<Entry>& bucket = buckets_[static_cast<std::size_t>(z)];
            if (bucket.empty()) continue;
            double dec_lo = 0.0, dec_hi = 0.0;
            sphere::zone_dec_range(z, height_deg_, &dec_lo, &dec_hi);
            double win = sphere::ra_window_deg(radius_rad, dec_lo, dec_hi);
            auto emit = [&](const Entry& e) {
                double psi = sphere::angular_distance((*pos_)[e.idx], probe_pos);
                if (psi <= radius_rad) visit(e.idx, psi);
            };
            if (win >= 180.0 - 1e-12) {
                for (const Entry& e : bucket) emit(e);
                continue;
            }
            double lo = probe.ra_deg - win;
            double hi = probe.ra_deg + win;
            if (lo < 0.0) {
                scan(bucket, 0.0, hi, emit);
                scan(bucket, lo + 360.0, 360.0, emit);
            } else if (hi >= 360.0) {
                scan(bucket, lo, 360.0, emit);
                scan(bucket, 0.0, hi - 360.0, emit);
            } else {
                scan(bucket, lo, hi, emit);
            }
        }
    }

  private:
    struct Entry {
        double ra_deg;
        std::size_t idx;
    };

    template <typename F>
    static void scan(const std::vector<Entry>& bucket, double ra_lo, double ra_hi, F&& emit) {
        auto first = std::lower_bound(
            bucket.begin(), bucket.end(), ra_lo,
            [](const Entry& e, double v) { return e.ra_deg < v; });
        for (auto it = first; it != bucket.end() && it->ra_deg <= ra_hi; ++it) emit(*it);
    }

    double height_deg_;
    std::vector<std::vector<Entry>> buckets_;
    const std::vector<sphere::SkyCoord>* sky_;
    const std::vector<sphere::UnitVector>* pos_;
};

}  // namespace skyjoin::zone
