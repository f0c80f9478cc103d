#include "skyjoin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace skyjoin::sphere {

UnitVector UnitVector::of(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    if (!(n > 1e-15) || !std::isfinite(n)) {
        throw ZeroVectorError("cannot normalize a (near-)zero or non-finite vector");
    }
    return UnitVector{x / n, y / n, z / n};
}

UnitVector to_unit_vector(const SkyCoord& c) {
    const double ra = c.ra_deg * kRadPerDeg;
    const double dec = c.dec_deg * kRadPerDeg;
    const double cd = std::cos(dec);
    return UnitVector{cd * std::cos(ra), cd * std::sin(ra), std::sin(dec)};
}

SkyCoord from_unit_vector(const UnitVector& v) {
    const double rxy = std::hypot(v.x, v.y);
    double ra_deg = 0.0;
    if (rxy > 0.0) {
        ra_deg = std::atan2(v.y, v.x) * kDegPerRad;
        if (ra_deg < 0.0) ra_deg += 360.0;
        if (ra_deg >= 360.0) ra_deg = 0.0;
    }
    const double dec_deg = std::atan2(v.z, rxy) * kDegPerRad;
    return SkyCoord{ra_deg, dec_deg};
}

double angular_distance(const UnitVector& a, const UnitVector& b) {
    const double cx = a.y * b.z - a.z * b.y;
    const double cy = a.z * b.x - a.x * b.z;
    const double cz = a.x * b.y - a.y * b.x;
    const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    return std::atan2(cross, a.dot(b));
}

double ra_distance_deg(double a_deg, double b_deg) {
    double d = std::fmod(std::fabs(a_deg - b_deg), 360.0);
    if (d > 180.0) d = 360.0 - d;
    return d;
}

int zone_count(double zone_height_deg) {
    if (!(zone_height_deg > 0.0) || !std::isfinite(zone_height_deg)) {
        throw DomainError("zone height must be positive and finite");
    }
    // The tiny slack keeps 180/h from producing an extra sliver zone when h
    // divides 180 exactly in real arithmetic but not in floating point.
    return std::max(1, static_cast<int>(std::ceil(180.0 / zone_height_deg - 1e-12)));
}

int zone_of(double dec_deg, double zone_height_deg) {
    const int n = zone_count(zone_height_deg);
    int z = static_cast<int>(std::floor((dec_deg + 90.0) / zone_height_deg));
    z = std::clamp(z, 0, n - 1);
    return z;
}

ZoneRange zone_window(int zone, double theta_rad, double zone_height_deg) {
    if (!(theta_rad >= 0.0) || !std::isfinite(theta_rad)) {
        throw DomainError("search radius must be non-negative and finite");
    }
    const int n = zone_count(zone_height_deg);
    const double theta_deg = theta_rad * kDegPerRad;
    const int spread = static_cast<int>(std::ceil(theta_deg / zone_height_deg));
    ZoneRange r;
    r.lo = std::max(0, zone - spread);
    r.hi = std::min(n - 1, zone + spread);
    return r;
}

void zone_dec_range(int zone, double zone_height_deg, double* dec_lo, double* dec_hi) {
    const int n = zone_count(zone_height_deg);
    *dec_lo = -90.0 + zone * zone_height_deg;
    *dec_hi = (zone == n - 1) ? 90.0 : -90.0 + (zone + 1) * zone_height_deg;
    *dec_lo = std::max(-90.0, *dec_lo);
    *dec_hi = std::min(90.0, *dec_hi);
}

double ra_window_deg(double theta_rad, double dec_lo_deg, double dec_hi_deg) {
    if (!(theta_rad >= 0.0) || !std::isfinite(theta_rad)) {
        throw DomainError("search radius must be non-negative and finite");
    }
    const double theta_deg = theta_rad * kDegPerRad;
    const double lo = std::max(-90.0, dec_lo_deg - theta_deg);
    const double hi = std::min(90.0, dec_hi_deg + theta_deg);
    const double dec_star = std::max(std::fabs(lo), std::fabs(hi));
    const double c = std::cos(dec_star * kRadPerDeg);
    // Once the cap reaches past a pole every RA is in range.
    if (c <= std::sin(theta_rad)) return 180.0;
    return std::min(180.0, theta_deg / c);
}

Region::Region(std::vector<SphericalCircle> circles) : circles_(std::move(circles)) {
    centers_.reserve(circles_.size());
    radii_rad_.reserve(circles_.size());
    for (const auto& c : circles_) {
        if (!(c.radius_arcmin >= 0.0) || !std::isfinite(c.radius_arcmin)) {
            throw DomainError("region circle radius must be non-negative and finite");
        }
        if (c.center.dec_deg < -90.0 || c.center.dec_deg > 90.0) {
            throw DomainError("region circle center declination out of [-90, 90]");
        }
        centers_.push_back(to_unit_vector(c.center));
        radii_rad_.push_back(c.radius_arcmin * kArcminRad);
    }
}

Region Region::circle(double ra_deg, double dec_deg, double radius_arcmin) {
    return Region({SphericalCircle{SkyCoord{ra_deg, dec_deg}, radius_arcmin}});
}

bool Region::contains(const UnitVector& v) const {
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        if (angular_distance(centers_[i], v) <= radii_rad_[i]) return true;
    }
    return false;
}

}  // namespace skyjoin::sphere
