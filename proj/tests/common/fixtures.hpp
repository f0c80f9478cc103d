// tests/common/fixtures.hpp - schemas, in-memory ingest, rng, temp dirs
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "skyjoin/geometry.hpp"
#include "skyjoin/store.hpp"

namespace skyjoin::testsupport {

/// Spherical-coordinate schema (RA/Dec columns) keyed by an integer ObjID.
std::shared_ptr<store::CatalogSchema> simple_schema(
    const std::string& dataset, const std::string& table,
    const std::vector<store::ColumnSpec>& payload = {},
    const std::string& error_column = "", double error_floor_arcsec = 0.0);

store::TablePtr ingest_from_string(std::shared_ptr<const store::CatalogSchema> schema,
                                   const std::string& csv_text);

struct SkyRng {
    std::mt19937_64 rng;

    explicit SkyRng(std::uint64_t seed) : rng(seed) {}

    double u01() { return double(rng() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
    /// Uniform over the whole sphere.
    sphere::UnitVector direction();
    /// Uniform over the closed cap of radius `radius_rad` around p.
    sphere::UnitVector near(const sphere::UnitVector& p, double radius_rad);
};

struct TempDir {
    std::string path;

    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace skyjoin::testsupport
