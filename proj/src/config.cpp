#include "skyjoin/config.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skyjoin/value.hpp"

namespace skyjoin::config {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(strip(cur));
    return out;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw ConfigError(origin + ":" + format_int(static_cast<std::int64_t>(line)) + ": " + msg);
}

double num(const std::string& origin, std::size_t line, const std::string& s) {
    double v = 0.0;
    if (!parse_double(s, &v)) fail(origin, line, "'" + s + "' is not a number");
    return v;
}

std::int64_t inum(const std::string& origin, std::size_t line, const std::string& s) {
    std::int64_t v = 0;
    if (!parse_int(s, &v)) fail(origin, line, "'" + s + "' is not an integer");
    return v;
}

/// "circle(ra, dec, radius_arcmin); circle(...)" -> Region
sphere::Region parse_footprint(const std::string& origin, std::size_t line,
                               const std::string& text) {
    std::vector<sphere::SphericalCircle> circles;
    for (const std::string& part : split(text, ';')) {
        if (part.empty()) continue;
        const std::string low = lower(part);
        if (low.rfind("circle", 0) != 0) {
            fail(origin, line, "footprint supports only circle(ra, dec, radius_arcmin)");
        }
        const auto open = part.find('(');
        const auto close = part.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open) {
            fail(origin, line, "malformed circle(...) in footprint");
        }
        const auto args = split(part.substr(open + 1, close - open - 1), ',');
        if (args.size() != 3) fail(origin, line, "circle(...) takes ra, dec, radius_arcmin");
        sphere::SphericalCircle c;
        c.center.ra_deg = num(origin, line, args[0]);
        c.center.dec_deg = num(origin, line, args[1]);
        c.radius_arcmin = num(origin, line, args[2]);
        circles.push_back(c);
    }
    if (circles.empty()) fail(origin, line, "footprint needs at least one circle");
    return sphere::Region(std::move(circles));
}

struct PendingCatalog {
    std::shared_ptr<store::CatalogSchema> schema;
    std::string file;
    bool has_coords = false;
    std::size_t section_line = 0;
};

void finish_catalog(const std::string& origin, File* out, PendingCatalog* pending,
                    const std::string& base_dir) {
    if (!pending->schema) return;
    if (pending->file.empty()) {
        fail(origin, pending->section_line,
             "catalog " + pending->schema->qualified_name() + " is missing 'file ='");
    }
    if (!pending->has_coords) {
        fail(origin, pending->section_line,
             "catalog " + pending->schema->qualified_name() + " is missing 'coords ='");
    }
    std::filesystem::path p(pending->file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    out->catalogs.push_back(CatalogEntry{pending->schema, p.string()});
    pending->schema.reset();
    pending->file.clear();
    pending->has_coords = false;
}

}  // namespace

File load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse(in, path, dir.empty() ? "." : dir);
}

File parse(std::istream& in, const std::string& origin, const std::string& base_dir) {
    File out;
    PendingCatalog pending;
    enum class Section { None, Engine, Catalog } section = Section::None;

    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            const std::string name = strip(line.substr(1, line.size() - 2));
            if (lower(name) == "engine") {
                finish_catalog(origin, &out, &pending, base_dir);
                section = Section::Engine;
                continue;
            }
            if (lower(name).rfind("catalog", 0) == 0) {
                finish_catalog(origin, &out, &pending, base_dir);
                const std::string qual = strip(name.substr(7));
                const auto colon = qual.find(':');
                if (qual.empty() || colon == std::string::npos || colon == 0 ||
                    colon + 1 == qual.size()) {
                    fail(origin, lineno, "expected [catalog DATASET:Table]");
                }
                pending.schema = std::make_shared<store::CatalogSchema>();
                pending.schema->dataset = qual.substr(0, colon);
                pending.schema->table = qual.substr(colon + 1);
                pending.section_line = lineno;
                section = Section::Catalog;
                continue;
            }
            fail(origin, lineno, "unknown section [" + name + "]");
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
        const std::string key = lower(strip(line.substr(0, eq)));
        const std::string value = strip(line.substr(eq + 1));
        if (value.empty()) fail(origin, lineno, "empty value for '" + key + "'");

        if (section == Section::Engine) {
            auto& s = out.settings;
            if (key == "workers") {
                s.workers = static_cast<int>(inum(origin, lineno, value));
                if (s.workers < 1) fail(origin, lineno, "workers must be >= 1");
            } else if (key == "partitions") {
                if (lower(value) == "auto") {
                    s.partitions = 0;
                } else {
                    s.partitions = static_cast<int>(inum(origin, lineno, value));
                    if (s.partitions < 1) fail(origin, lineno, "partitions must be >= 1 or auto");
                }
            } else if (key == "sample_rate") {
                s.sample_rate = num(origin, lineno, value);
                if (!(s.sample_rate > 0.0 && s.sample_rate <= 1.0)) {
                    fail(origin, lineno, "sample_rate must be in (0, 1]");
                }
            } else if (key == "sample_seed") {
                s.sample_seed = static_cast<std::uint64_t>(inum(origin, lineno, value));
            } else if (key == "output_dir") {
                std::filesystem::path p(value);
                if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                s.output_dir = p.string();
            } else if (key == "quick_timeout_s") {
                s.quick_timeout = std::chrono::milliseconds(
                    static_cast<std::int64_t>(num(origin, lineno, value) * 1000.0));
            } else if (key == "long_timeout_s") {
                s.long_timeout = std::chrono::milliseconds(
                    static_cast<std::int64_t>(num(origin, lineno, value) * 1000.0));
            } else if (key == "quick_slots") {
                s.quick_slots = static_cast<int>(inum(origin, lineno, value));
            } else if (key == "long_slots") {
                s.long_slots = static_cast<int>(inum(origin, lineno, value));
            } else if (key == "retries") {
                s.retries = static_cast<int>(inum(origin, lineno, value));
                if (s.retries < 0) fail(origin, lineno, "retries must be >= 0");
            } else {
                fail(origin, lineno, "unknown engine setting '" + key + "'");
            }
            continue;
        }
        if (section != Section::Catalog) {
            fail(origin, lineno, "setting outside of any section");
        }

        auto& schema = *pending.schema;
        if (key == "file") {
            pending.file = value;
        } else if (key == "coords") {
            std::istringstream ss(value);
            std::string kind, a, b, c;
            ss >> kind >> a >> b;
            if (lower(kind) == "spherical" && !a.empty() && !b.empty()) {
                schema.coords = store::SphericalCoordCols{a, b};
            } else if (lower(kind) == "cartesian" && (ss >> c) && !a.empty()) {
                schema.coords = store::CartesianCoordCols{a, b, c};
            } else {
                fail(origin, lineno, "coords must be 'spherical RA DEC' or 'cartesian CX CY CZ'");
            }
            pending.has_coords = true;
        } else if (key == "key") {
            schema.key_columns = split(value, ',');
        } else if (key == "error_column") {
            schema.error_column = value;
        } else if (key == "error_floor_arcsec") {
            const double v = num(origin, lineno, value);
            if (!(v > 0.0)) fail(origin, lineno, "error_floor_arcsec must be positive");
            schema.error_floor_arcsec = v;
        } else if (key == "columns") {
            for (const std::string& item : split(value, ',')) {
                if (item.empty()) continue;
                const auto colon = item.find(':');
                if (colon == std::string::npos) {
                    fail(origin, lineno, "columns entries are NAME:TYPE");
                }
                const std::string cname = strip(item.substr(0, colon));
                const std::string ctype = lower(strip(item.substr(colon + 1)));
                ColumnType t;
                if (ctype == "int") {
                    t = ColumnType::Int64;
                } else if (ctype == "real") {
                    t = ColumnType::Float64;
                } else if (ctype == "text") {
                    t = ColumnType::Text;
                } else {
                    fail(origin, lineno, "column type must be int, real or text");
                }
                schema.payload.push_back(store::ColumnSpec{cname, t});
            }
        } else if (key == "footprint") {
            schema.footprint = parse_footprint(origin, lineno, value);
        } else {
            fail(origin, lineno, "unknown catalog setting '" + key + "'");
        }
    }
    finish_catalog(origin, &out, &pending, base_dir);
    return out;
}

}  // namespace skyjoin::config
