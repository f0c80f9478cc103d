#include "skyjoin/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "skyjoin/csv.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/geometry.hpp"
#include "skyjoin/value.hpp"

namespace skyjoin::synth {

namespace fs = std::filesystem;
using sphere::UnitVector;

namespace {

double u01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

struct Basis {
    UnitVector e1, e2;
};

Basis tangent_basis(const UnitVector& p) {
    // e1 = normalize(z x p) unless p is polar, then use x
    double nx = -p.y, ny = p.x, nz = 0.0;
    double n = std::sqrt(nx * nx + ny * ny);
    UnitVector e1;
    if (n < 1e-9) {
        e1 = UnitVector{1.0, 0.0, 0.0};
    } else {
        e1 = UnitVector{nx / n, ny / n, nz};
    }
    UnitVector e2{p.y * e1.z - p.z * e1.y, p.z * e1.x - p.x * e1.z,
                  p.x * e1.y - p.y * e1.x};
    return Basis{e1, e2};
}

/// Uniform draw from the cap of radius `radius_rad` around `center`.
UnitVector cap_point(std::mt19937_64& rng, const UnitVector& center, double radius_rad) {
    double cos_t = 1.0 - u01(rng) * (1.0 - std::cos(radius_rad));
    double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    double phi = 2.0 * sphere::kPi * u01(rng);
    Basis b = tangent_basis(center);
    double cx = std::cos(phi) * sin_t, sx = std::sin(phi) * sin_t;
    return UnitVector::of(center.x * cos_t + b.e1.x * cx + b.e2.x * sx,
                          center.y * cos_t + b.e1.y * cx + b.e2.y * sx,
                          center.z * cos_t + b.e1.z * cx + b.e2.z * sx);
}

/// Gaussian tangent-plane scatter of width sigma_rad.
UnitVector scatter(std::mt19937_64& rng, const UnitVector& p, double sigma_rad) {
    double u1 = std::max(u01(rng), 1e-300), u2 = u01(rng);
    double r = std::sqrt(-2.0 * std::log(u1));
    double g1 = r * std::cos(2.0 * sphere::kPi * u2);
    double g2 = r * std::sin(2.0 * sphere::kPi * u2);
    Basis b = tangent_basis(p);
    double dx = sigma_rad * g1, dy = sigma_rad * g2;
    return UnitVector::of(p.x + b.e1.x * dx + b.e2.x * dy, p.y + b.e1.y * dx + b.e2.y * dy,
                          p.z + b.e1.z * dx + b.e2.z * dy);
}

csv::Field fnum(double v) { return csv::Field{format_double(v), false, 0, 0}; }
csv::Field fint(std::int64_t v) { return csv::Field{format_int(v), false, 0, 0}; }
csv::Field fnull() { return csv::Field{}; }

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

}  // namespace

std::string write_demo(const std::string& dir, const DemoSpec& spec) {
    fs::create_directories(dir);
    std::mt19937_64 rng(spec.seed);
    UnitVector center =
        sphere::to_unit_vector(sphere::SkyCoord{spec.center_ra_deg, spec.center_dec_deg});
    double field_rad = spec.field_radius_deg * sphere::kRadPerDeg;

    struct Object {
        UnitVector p;
        bool in_galex, in_twomass;
    };
    std::vector<Object> objects;
    objects.reserve(static_cast<std::size_t>(spec.objects));
    for (int i = 0; i < spec.objects; ++i) {
        Object o;
        o.p = cap_point(rng, center, field_rad);
        o.in_galex = u01(rng) >= spec.galex_dropout;
        o.in_twomass = u01(rng) >= spec.twomass_dropout;
        objects.push_back(o);
    }

    auto sky = [](const UnitVector& p) { return sphere::from_unit_vector(p); };

    {
        std::ofstream out(fs::path(dir) / "sdss.csv", std::ios::trunc);
        csv::Writer w(out);
        w.write({{"ObjID", false, 0, 0}, {"RA", false, 0, 0}, {"Dec", false, 0, 0},
                 {"Cx", false, 0, 0}, {"Cy", false, 0, 0}, {"Cz", false, 0, 0},
                 {"Galaxy", false, 0, 0}, {"r_mag", false, 0, 0}});
        auto emit = [&](std::int64_t id, const UnitVector& p) {
            sphere::SkyCoord c = sky(p);
            w.write({fint(id), fnum(c.ra_deg), fnum(c.dec_deg), fnum(p.x), fnum(p.y),
                     fnum(p.z), fint(u01(rng) < 0.5 ? 0 : 1), fnum(14.0 + 10.0 * u01(rng))});
        };
        for (int i = 0; i < spec.objects; ++i)
            emit(1000 + i, scatter(rng, objects[i].p, spec.sdss_sigma_as * sphere::kArcsecRad));
        for (int i = 0; i < spec.sdss_background; ++i)
            emit(9100000 + i, cap_point(rng, center, field_rad));
    }

    {
        std::ofstream out(fs::path(dir) / "galex.csv", std::ios::trunc);
        csv::Writer w(out);
        w.write({{"ObjID", false, 0, 0}, {"Ra", false, 0, 0}, {"Dec", false, 0, 0},
                 {"fuv_mag", false, 0, 0}, {"nuv_mag", false, 0, 0}});
        auto emit = [&](std::int64_t id, const UnitVector& p) {
            sphere::SkyCoord c = sky(p);
            // one detector failed to measure fuv for ~10% of rows
            csv::Field fuv = u01(rng) < 0.1 ? fnull() : fnum(16.0 + 9.0 * u01(rng));
            w.write({fint(id), fnum(c.ra_deg), fnum(c.dec_deg), fuv,
                     fnum(16.0 + 9.0 * u01(rng))});
        };
        for (int i = 0; i < spec.objects; ++i) {
            if (!objects[i].in_galex) continue;
            emit(2000 + i, scatter(rng, objects[i].p, spec.galex_sigma_as * sphere::kArcsecRad));
        }
        for (int i = 0; i < spec.galex_background; ++i)
            emit(9200000 + i, cap_point(rng, center, field_rad));
    }

    {
        std::ofstream out(fs::path(dir) / "twomass.csv", std::ios::trunc);
        csv::Writer w(out);
        w.write({{"ObjID", false, 0, 0}, {"Ra", false, 0, 0}, {"Dec", false, 0, 0},
                 {"j_m", false, 0, 0}, {"PosErr", false, 0, 0}});
        auto emit = [&](std::int64_t id, const UnitVector& p) {
            double err_as =
                spec.twomass_err_lo_as + (spec.twomass_err_hi_as - spec.twomass_err_lo_as) * u01(rng);
            UnitVector d = scatter(rng, p, err_as * sphere::kArcsecRad);
            sphere::SkyCoord c = sky(d);
            w.write({fint(id), fnum(c.ra_deg), fnum(c.dec_deg), fnum(10.0 + 8.0 * u01(rng)),
                     fnum(err_as)});
        };
        for (int i = 0; i < spec.objects; ++i) {
            if (!objects[i].in_twomass) continue;
            emit(3000 + i, objects[i].p);
        }
        for (int i = 0; i < spec.twomass_background; ++i) emit(9300000 + i, cap_point(rng, center, field_rad));
    }

    double fp_arcmin = spec.field_radius_deg * 60.0 * 1.25;
    std::string ini =
        "[engine]\n"
        "workers = 2\n"
        "partitions = 4\n"
        "sample_rate = 0.1\n"
        "sample_seed = 7\n"
        "output_dir = out\n"
        "\n"
        "[catalog sdss:PhotoObj]\n"
        "file = sdss.csv\n"
        "coords = spherical RA Dec\n"
        "key = ObjID\n"
        "columns = Cx:real, Cy:real, Cz:real, Galaxy:int, r_mag:real\n"
        "\n"
        "[catalog galex:Detections]\n"
        "file = galex.csv\n"
        "coords = spherical Ra Dec\n"
        "key = ObjID\n"
        "columns = fuv_mag:real, nuv_mag:real\n"
        "footprint = circle(" +
        format_double(spec.center_ra_deg) + ", " + format_double(spec.center_dec_deg) + ", " +
        format_double(fp_arcmin) +
        ")\n"
        "\n"
        "[catalog twomass:PSC]\n"
        "file = twomass.csv\n"
        "coords = spherical Ra Dec\n"
        "key = ObjID\n"
        "error_column = PosErr\n"
        "error_floor_arcsec = 0.05\n"
        "columns = j_m:real\n";
    std::string ini_path = (fs::path(dir) / "skyjoin.ini").string();
    write_text(ini_path, ini);

    double region_arcmin = spec.field_radius_deg * 60.0 * 1.25;
    write_text((fs::path(dir) / "query1.sql").string(),
               "SELECT s.ObjID AS sdss_id, g.ObjID AS galex_id, t.ObjID AS tm_id,\n"
               "       x.RA, x.Dec, x.logBF\n"
               "FROM sdss:PhotoObj AS s\n"
               "CROSS JOIN galex:Detections AS g\n"
               "CROSS JOIN twomass:PSC AS t\n"
               "WHERE s.r_mag < 23.5\n"
               "XMATCH BAYESIAN AS x\n"
               "  MUST s ON POINT(s.RA, s.Dec), 0.1\n"
               "  MUST g ON POINT(g.Ra, g.Dec), 0.2\n"
               "  MAY t ON POINT(t.Ra, t.Dec), t.PosErr\n"
               "HAVING LIMIT 1e6\n"
               "REGION CIRCLE J2000 " +
                   format_double(spec.center_ra_deg) + " " + format_double(spec.center_dec_deg) +
                   " " + format_double(region_arcmin) + "\n");

    write_text((fs::path(dir) / "dropout.sql").string(),
               "SELECT s.ObjID AS sdss_id, t.ObjID AS tm_id, x.RA, x.Dec, x.logBF\n"
               "FROM sdss:PhotoObj AS s\n"
               "CROSS JOIN twomass:PSC AS t\n"
               "CROSS JOIN galex:Detections AS g\n"
               "XMATCH BAYESIAN AS x\n"
               "  MUST s ON POINT(s.RA, s.Dec), 0.1\n"
               "  MUST t ON POINT(t.Ra, t.Dec), t.PosErr\n"
               "  NOT g ON POINT(g.Ra, g.Dec), 0.2\n"
               "HAVING LIMIT 1e5\n");

    return ini_path;
}

}  // namespace skyjoin::synth
