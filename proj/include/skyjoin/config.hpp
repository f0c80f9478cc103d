// skyjoin/config.hpp - INI-style engine + catalog configuration
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "skyjoin/store.hpp"

namespace skyjoin::config {

struct CatalogEntry {
    std::shared_ptr<store::CatalogSchema> schema;
    std::string csv_path;  // resolved against the config file directory
};

struct Settings {
    int workers = 1;
    int partitions = 0;  // 0 = auto (4 * workers)
    double sample_rate = 0.001;
    std::uint64_t sample_seed = 1;
    std::string output_dir = "out";
    std::chrono::milliseconds quick_timeout{30'000};
    std::chrono::milliseconds long_timeout{3'600'000};
    int quick_slots = 2;
    int long_slots = 1;
    int retries = 1;
};

struct File {
    Settings settings;
    std::vector<CatalogEntry> catalogs;
};

/// Parses a config file.  Throws ConfigError with the offending line number.
///
///   [engine]
///   workers = 2
///   output_dir = out
///
///   [catalog SDSS:PhotoObjAll]
///   file = sdss.csv
///   coords = spherical RA Dec          # or: cartesian Cx Cy Cz
///   key = ObjID                        # comma-separated for composite keys
///   error_column = PosErr              # optional, arcsec
///   error_floor_arcsec = 0.05          # optional lower bound for it
///   columns = Galaxy:int, r_mag:real   # extra typed payload columns
///   footprint = circle(180, 0, 90)     # optional union of circles, arcmin
File load_file(const std::string& path);
File parse(std::istream& in, const std::string& origin, const std::string& base_dir);

}  // namespace skyjoin::config
