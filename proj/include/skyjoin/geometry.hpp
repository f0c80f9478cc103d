// skyjoin/geometry.hpp - unit-sphere coordinates, distances, zones, regions
#pragma once

#include <cmath>
#include <vector>

#include "skyjoin/errors.hpp"

namespace skyjoin::sphere {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kDegPerRad = 180.0 / kPi;
inline constexpr double kRadPerDeg = kPi / 180.0;
inline constexpr double kArcminRad = kPi / (180.0 * 60.0);
inline constexpr double kArcsecRad = kPi / (180.0 * 3600.0);

struct UnitVector {
    double x = 1.0;
    double y = 0.0;
    double z = 0.0;

    /// Normalizes (x, y, z); throws ZeroVectorError when the norm is
    /// indistinguishable from zero.
    static UnitVector of(double x, double y, double z);

    double dot(const UnitVector& o) const { return x * o.x + y * o.y + z * o.z; }
};

/// RA/Dec in degrees.  RA is normalized to [0, 360); Dec must lie in [-90, 90].
struct SkyCoord {
    double ra_deg = 0.0;
    double dec_deg = 0.0;
};

UnitVector to_unit_vector(const SkyCoord& c);

/// Inverse of to_unit_vector; at the poles RA collapses to 0.
SkyCoord from_unit_vector(const UnitVector& v);

/// Angle between two directions in radians, in [0, pi].  Computed from
/// atan2(|a x b|, a.b) so it stays accurate for nearly parallel and nearly
/// antipodal pairs alike.
double angular_distance(const UnitVector& a, const UnitVector& b);

/// Circular RA difference |a - b| folded into [0, 180], degrees.
double ra_distance_deg(double a_deg, double b_deg);

/// Number of zones a given zone height splits the sphere into.
int zone_count(double zone_height_deg);

/// Zone index of a declination: floor((dec + 90) / h), with dec = +90 clamped
/// into the last zone.
int zone_of(double dec_deg, double zone_height_deg);

struct ZoneRange {
    int lo = 0;
    int hi = 0;  // inclusive
};

/// Zones that can contain a point within `theta_rad` of any point in `zone`.
ZoneRange zone_window(int zone, double theta_rad, double zone_height_deg);

/// Max RA half-width (degrees) of a cap of radius theta_rad centered anywhere
/// in the declination band [dec_lo_deg, dec_hi_deg].  Returns 180 when the cap
/// can reach a pole.
double ra_window_deg(double theta_rad, double dec_lo_deg, double dec_hi_deg);

/// Declination band covered by a zone, degrees.
void zone_dec_range(int zone, double zone_height_deg, double* dec_lo, double* dec_hi);

struct SphericalCircle {
    SkyCoord center;
    double radius_arcmin = 0.0;
};

/// Union of spherical circles; empty region contains nothing.  Containment is
/// closed: a point exactly on a circle boundary is inside.
class Region {
  public:
    Region() = default;
    explicit Region(std::vector<SphericalCircle> circles);

    static Region circle(double ra_deg, double dec_deg, double radius_arcmin);

    bool empty() const { return circles_.empty(); }
    const std::vector<SphericalCircle>& circles() const { return circles_; }

    bool contains(const UnitVector& v) const;

  private:
    std::vector<SphericalCircle> circles_;
    std::vector<UnitVector> centers_;
    std::vector<double> radii_rad_;
};

inline bool region_contains(const Region& r, const UnitVector& v) { return r.contains(v); }

}  // namespace skyjoin::sphere
