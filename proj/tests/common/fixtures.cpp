#include "fixtures.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace skyjoin::testsupport {

std::shared_ptr<store::CatalogSchema> simple_schema(
    const std::string& dataset, const std::string& table,
    const std::vector<store::ColumnSpec>& payload, const std::string& error_column,
    double error_floor_arcsec) {
    auto schema = std::make_shared<store::CatalogSchema>();
    schema->dataset = dataset;
    schema->table = table;
    schema->coords = store::SphericalCoordCols{"RA", "Dec"};
    schema->key_columns = {"ObjID"};
    schema->payload = payload;
    if (!error_column.empty()) schema->error_column = error_column;
    if (error_floor_arcsec > 0.0) schema->error_floor_arcsec = error_floor_arcsec;
    return schema;
}

store::TablePtr ingest_from_string(std::shared_ptr<const store::CatalogSchema> schema,
                                   const std::string& csv_text) {
    std::istringstream in(csv_text);
    return store::ingest_csv(std::move(schema), in, "<test>");
}

sphere::UnitVector SkyRng::direction() {
    double z = 2.0 * u01() - 1.0;
    double phi = 2.0 * sphere::kPi * u01();
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return sphere::UnitVector{s * std::cos(phi), s * std::sin(phi), z};
}

sphere::UnitVector SkyRng::near(const sphere::UnitVector& p, double radius_rad) {
    double cos_t = 1.0 - u01() * (1.0 - std::cos(radius_rad));
    double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    double phi = 2.0 * sphere::kPi * u01();
    // tangent basis at p
    double nx = -p.y, ny = p.x;
    double n = std::sqrt(nx * nx + ny * ny);
    sphere::UnitVector e1 = n < 1e-9 ? sphere::UnitVector{1.0, 0.0, 0.0}
                                     : sphere::UnitVector{nx / n, ny / n, 0.0};
    sphere::UnitVector e2{p.y * e1.z - p.z * e1.y, p.z * e1.x - p.x * e1.z,
                          p.x * e1.y - p.y * e1.x};
    double cx = std::cos(phi) * sin_t, sx = std::sin(phi) * sin_t;
    return sphere::UnitVector::of(p.x * cos_t + e1.x * cx + e2.x * sx,
                                  p.y * cos_t + e1.y * cx + e2.y * sx,
                                  p.z * cos_t + e1.z * cx + e2.z * sx);
}

TempDir::TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "skyjoin-test-XXXXXX").string();
    std::vector<char> buf(templ.begin(), templ.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path = buf.data();
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
}

}  // namespace skyjoin::testsupport
