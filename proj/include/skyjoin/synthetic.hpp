// skyjoin/synthetic.hpp - reproducible demo sky for examples and tests
#pragma once

#include <cstdint>
#include <string>

namespace skyjoin::synth {

/// Three overlapping catalogs of one simulated field: every shared object
/// appears in sdss:PhotoObj, drops out of galex:Detections and twomass:PSC
/// with the given probabilities, and each catalog adds its own unrelated
/// background detections.  Detections scatter around the true positions with
/// the catalog's positional error.
struct DemoSpec {
    std::uint64_t seed = 42;
    int objects = 400;
    int sdss_background = 300;
    int galex_background = 250;
    int twomass_background = 200;
    double center_ra_deg = 180.0;
    double center_dec_deg = 0.0;
    double field_radius_deg = 2.0;
    double sdss_sigma_as = 0.1;
    double galex_sigma_as = 0.2;
    double twomass_err_lo_as = 0.3;  // PosErr column range
    double twomass_err_hi_as = 0.8;
    double galex_dropout = 0.15;
    double twomass_dropout = 0.25;
};

/// Writes sdss.csv, galex.csv, twomass.csv, a ready-to-use skyjoin.ini and
/// two example queries (query1.sql, dropout.sql) into `dir`.  Returns the
/// config path.  Output is a pure function of the spec.
std::string write_demo(const std::string& dir, const DemoSpec& spec);

}  // namespace skyjoin::synth
