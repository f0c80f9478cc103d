#include "skyjoin/zone_index.hpp"

namespace skyjoin::zone {

ZoneIndex::ZoneIndex(const std::vector<sphere::SkyCoord>& sky,
                     const std::vector<sphere::UnitVector>& pos, double zone_height_deg)
    : height_deg_(zone_height_deg), sky_(&sky), pos_(&pos) {
    buckets_.resize(static_cast<std::size_t>(sphere::zone_count(height_deg_)));
    for (std::size_t i = 0; i < sky.size(); ++i) {
        int z = sphere::zone_of(sky[i].dec_deg, height_deg_);
        buckets_[static_cast<std::size_t>(z)].push_back(Entry{sky[i].ra_deg, i});
    }
    for (auto& bucket : buckets_)
        std::sort(bucket.begin(), bucket.end(), [](const Entry& a, const Entry& b) {
            return a.ra_deg != b.ra_deg ? a.ra_deg < b.ra_deg : a.idx < b.idx;
        });
}

}  // namespace skyjoin::zone
