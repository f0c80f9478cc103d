#include "skyjoin/store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "skyjoin/csv.hpp"

namespace skyjoin::store {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

void Column::push_null() {
    nulls_.push_back(1);
    switch (type_) {
        case ColumnType::Int64: ints_.push_back(0); break;
        case ColumnType::Float64: reals_.push_back(0.0); break;
        case ColumnType::Text: texts_.emplace_back(); break;
    }
}

void Column::push_int(std::int64_t v) {
    nulls_.push_back(0);
    ints_.push_back(v);
}

void Column::push_real(double v) {
    nulls_.push_back(0);
    reals_.push_back(v);
}

void Column::push_text(std::string v) {
    nulls_.push_back(0);
    texts_.push_back(std::move(v));
}

Value Column::value_at(std::size_t i) const {
    if (is_null(i)) return Value::null();
    switch (type_) {
        case ColumnType::Int64: return Value::of(ints_[i]);
        case ColumnType::Float64: return Value::of(reals_[i]);
        case ColumnType::Text: return Value::of(texts_[i]);
    }
    return Value::null();
}

std::string Column::format_at(std::size_t i) const {
    if (is_null(i)) return std::string();
    switch (type_) {
        case ColumnType::Int64: return format_int(ints_[i]);
        case ColumnType::Float64: return format_double(reals_[i]);
        case ColumnType::Text: return texts_[i];
    }
    return std::string();
}

std::vector<ColumnSpec> CatalogSchema::stored_columns() const {
    std::vector<ColumnSpec> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& name, ColumnType type) {
        if (!seen.insert(lower(name)).second) {
            throw ConfigError("catalog " + qualified_name() + ": column '" + name +
                              "' declared twice");
        }
        out.push_back(ColumnSpec{name, type});
    };
    if (const auto* s = std::get_if<SphericalCoordCols>(&coords)) {
        add(s->ra, ColumnType::Float64);
        add(s->dec, ColumnType::Float64);
    } else {
        const auto& c = std::get<CartesianCoordCols>(coords);
        add(c.cx, ColumnType::Float64);
        add(c.cy, ColumnType::Float64);
        add(c.cz, ColumnType::Float64);
    }
    if (error_column) add(*error_column, ColumnType::Float64);
    for (const auto& p : payload) add(p.name, p.type);
    for (const auto& k : key_columns) {
        if (!seen.count(lower(k))) add(k, ColumnType::Int64);
    }
    return out;
}

CatalogTable::CatalogTable(std::shared_ptr<const CatalogSchema> schema,
                           std::vector<Column> columns,
                           std::vector<sphere::UnitVector> positions,
                           std::vector<sphere::SkyCoord> skies)
    : schema_(std::move(schema)),
      specs_(schema_->stored_columns()),
      columns_(std::move(columns)),
      positions_(std::move(positions)),
      skies_(std::move(skies)) {
    for (std::size_t i = 0; i < specs_.size(); ++i) index_[lower(specs_[i].name)] = i;
    for (const auto& k : schema_->key_columns) {
        const int idx = column_index(k);
        if (idx < 0) throw ConfigError("key column '" + k + "' is not a stored column");
        const ColumnType t = specs_[idx].type;
        if (t == ColumnType::Float64) {
            throw ConfigError("catalog " + schema_->qualified_name() + ": key column '" +
                              k + "' may not be floating point");
        }
        key_indexes_.push_back(static_cast<std::size_t>(idx));
    }
}

int CatalogTable::column_index(const std::string& name) const {
    const auto it = index_.find(lower(name));
    return it == index_.end() ? -1 : static_cast<int>(it->second);
}

int CatalogTable::compare_keys(std::size_t a, std::size_t b) const {
    for (std::size_t idx : key_indexes_) {
        const Column& c = columns_[idx];
        if (c.type() == ColumnType::Int64) {
            const auto va = c.int_at(a);
            const auto vb = c.int_at(b);
            if (va != vb) return va < vb ? -1 : 1;
        } else {
            const int cmp = c.text_at(a).compare(c.text_at(b));
            if (cmp != 0) return cmp < 0 ? -1 : 1;
        }
    }
    return 0;
}

std::string CatalogTable::key_string(std::size_t row) const {
    std::string out;
    for (std::size_t idx : key_indexes_) {
        if (!out.empty()) out.push_back('\x1f');
        out += columns_[idx].format_at(row);
    }
    return out;
}

TablePtr ingest_csv(std::shared_ptr<const CatalogSchema> schema,
                    const std::string& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError("cannot open catalog file: " + csv_path);
    return ingest_csv(std::move(schema), in, csv_path);
}

TablePtr ingest_csv(std::shared_ptr<const CatalogSchema> schema, std::istream& in,
                    const std::string& origin) {
    const auto specs = schema->stored_columns();
    csv::Reader reader(in);

    std::vector<csv::Field> record;
    if (!reader.next(record)) {
        throw CsvParseError({1, 1}, origin + ": empty file, header expected");
    }
    std::map<std::string, std::size_t> header;
    for (std::size_t i = 0; i < record.size(); ++i) {
        header.emplace(lower(record[i].text), i);
    }
    std::vector<std::size_t> src_idx(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto it = header.find(lower(specs[i].name));
        if (it == header.end()) {
            throw CsvParseError({1, 1}, origin + ": header is missing column '" +
                                            specs[i].name + "'");
        }
        src_idx[i] = it->second;
    }

    std::vector<Column> columns;
    columns.reserve(specs.size());
    for (const auto& s : specs) columns.emplace_back(s.type);

    // Locate the special columns inside the spec order.
    int ra_i = -1, dec_i = -1, cx_i = -1, cy_i = -1, cz_i = -1, err_i = -1;
    auto spec_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (lower(specs[i].name) == lower(name)) return static_cast<int>(i);
        }
        return -1;
    };
    if (const auto* s = std::get_if<SphericalCoordCols>(&schema->coords)) {
        ra_i = spec_index(s->ra);
        dec_i = spec_index(s->dec);
    } else {
        const auto& c = std::get<CartesianCoordCols>(schema->coords);
        cx_i = spec_index(c.cx);
        cy_i = spec_index(c.cy);
        cz_i = spec_index(c.cz);
    }
    if (schema->error_column) err_i = spec_index(*schema->error_column);
    std::set<std::string> key_cols;
    for (const auto& k : schema->key_columns) key_cols.insert(lower(k));

    std::vector<sphere::UnitVector> positions;
    std::vector<sphere::SkyCoord> skies;
    std::set<std::string> seen_keys;

    while (reader.next(record)) {
        const std::size_t line = reader.record_line();
        if (record.size() == 1 && record[0].is_null()) continue;  // blank line
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (src_idx[i] >= record.size()) {
                throw CsvParseError({line, 1}, origin + ": row has too few fields");
            }
            const csv::Field& f = record[src_idx[i]];
            const bool is_coord = static_cast<int>(i) == ra_i ||
                                  static_cast<int>(i) == dec_i ||
                                  static_cast<int>(i) == cx_i ||
                                  static_cast<int>(i) == cy_i ||
                                  static_cast<int>(i) == cz_i;
            if (f.is_null()) {
                if (is_coord) {
                    throw BadCoordinateError(line, origin + ": NULL coordinate in line " +
                                                       format_int(line));
                }
                if (key_cols.count(lower(specs[i].name))) {
                    throw CsvParseError({f.line, f.col},
                                        origin + ": NULL key column '" + specs[i].name + "'");
                }
                columns[i].push_null();
                continue;
            }
            switch (specs[i].type) {
                case ColumnType::Int64: {
                    std::int64_t v = 0;
                    if (!parse_int(f.text, &v)) {
                        throw CsvParseError({f.line, f.col},
                                            origin + ": '" + f.text + "' is not an integer (column " +
                                                specs[i].name + ")");
                    }
                    columns[i].push_int(v);
                    break;
                }
                case ColumnType::Float64: {
                    double v = 0.0;
                    if (!parse_double(f.text, &v)) {
                        throw CsvParseError({f.line, f.col},
                                            origin + ": '" + f.text + "' is not a number (column " +
                                                specs[i].name + ")");
                    }
                    if (is_coord && !std::isfinite(v)) {
                        throw BadCoordinateError(line, origin + ": non-finite coordinate in line " +
                                                           format_int(line));
                    }
                    if (static_cast<int>(i) == err_i && !(v > 0.0 && std::isfinite(v))) {
                        throw CsvParseError({f.line, f.col},
                                            origin + ": positional error must be positive (column " +
                                                specs[i].name + ")");
                    }
                    columns[i].push_real(v);
                    break;
                }
                case ColumnType::Text:
                    columns[i].push_text(f.text);
                    break;
            }
        }

        const std::size_t row = positions.size();
        if (ra_i >= 0) {
            double ra = columns[ra_i].real_at(row);
            const double dec = columns[dec_i].real_at(row);
            if (dec < -90.0 || dec > 90.0) {
                throw BadCoordinateError(line, origin + ": declination " + format_double(dec) +
                                                   " out of [-90, 90] in line " + format_int(line));
            }
            ra = std::fmod(ra, 360.0);
            if (ra < 0.0) ra += 360.0;
            columns[ra_i].set_real(row, ra);
            const sphere::SkyCoord sc{ra, dec};
            positions.push_back(sphere::to_unit_vector(sc));
            skies.push_back(sc);
        } else {
            try {
                const auto v = sphere::UnitVector::of(columns[cx_i].real_at(row),
                                                      columns[cy_i].real_at(row),
                                                      columns[cz_i].real_at(row));
                columns[cx_i].set_real(row, v.x);
                columns[cy_i].set_real(row, v.y);
                columns[cz_i].set_real(row, v.z);
                positions.push_back(v);
                skies.push_back(sphere::from_unit_vector(v));
            } catch (const ZeroVectorError&) {
                throw BadCoordinateError(line, origin + ": zero-length direction in line " +
                                                   format_int(line));
            }
        }
    }

    auto table = std::make_shared<CatalogTable>(schema, std::move(columns),
                                                std::move(positions), std::move(skies));
    if (table->has_key()) {
        for (std::size_t r = 0; r < table->row_count(); ++r) {
            if (!seen_keys.insert(table->key_string(r)).second) {
                throw DuplicateKeyError(table->key_string(r),
                                        origin + ": duplicate key (" + table->key_string(r) +
                                            ")");
            }
        }
    }
    return table;
}

void export_csv(const CatalogTable& table, std::ostream& out) {
    csv::Writer writer(out);
    std::vector<csv::Field> record;
    for (const auto& s : table.column_specs()) {
        record.push_back(csv::Field{s.name, false, 0, 0});
    }
    writer.write(record);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        record.clear();
        for (std::size_t c = 0; c < table.column_specs().size(); ++c) {
            const Column& col = table.column(c);
            csv::Field f;
            if (!col.is_null(r)) {
                f.text = col.format_at(r);
                // Distinguish a stored empty string from NULL.
                f.quoted = col.type() == ColumnType::Text && f.text.empty();
            }
            record.push_back(std::move(f));
        }
        writer.write(record);
    }
}

void export_csv(const CatalogTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    export_csv(table, out);
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

namespace {

/// Top 53 bits of the engine output as a double in [0, 1).
double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TablePtr copy_rows(const CatalogTable& parent, const std::vector<std::size_t>& rows) {
    std::vector<Column> columns;
    for (const auto& s : parent.column_specs()) columns.emplace_back(s.type);
    std::vector<sphere::UnitVector> positions;
    std::vector<sphere::SkyCoord> skies;
    positions.reserve(rows.size());
    skies.reserve(rows.size());
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < parent.column_specs().size(); ++c) {
            const Column& src = parent.column(c);
            if (src.is_null(r)) {
                columns[c].push_null();
                continue;
            }
            switch (src.type()) {
                case ColumnType::Int64: columns[c].push_int(src.int_at(r)); break;
                case ColumnType::Float64: columns[c].push_real(src.real_at(r)); break;
                case ColumnType::Text: columns[c].push_text(src.text_at(r)); break;
            }
        }
        positions.push_back(parent.position(r));
        skies.push_back(parent.sky(r));
    }
    return std::make_shared<CatalogTable>(parent.schema_ptr(), std::move(columns),
                                          std::move(positions), std::move(skies));
}

}  // namespace

MiniCatalog sample_mini(const TablePtr& parent, double rate, std::uint64_t seed) {
    if (!(rate > 0.0 && rate <= 1.0)) {
        throw DomainError("sampling rate must be in (0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < parent->row_count(); ++r) {
        if (u01(rng) < rate) rows.push_back(r);
    }
    MiniCatalog mini;
    mini.rate = rate;
    mini.seed = seed;
    mini.parent_rows = parent->row_count();
    mini.table = copy_rows(*parent, rows);
    return mini;
}

void save_mini(const MiniCatalog& mini, const std::string& csv_path,
               const std::string& meta_path) {
    export_csv(*mini.table, csv_path);
    std::ofstream meta(meta_path, std::ios::binary);
    if (!meta) throw IoError("cannot write " + meta_path);
    meta << "rate = " << format_double(mini.rate) << "\n"
         << "seed = " << mini.seed << "\n"
         << "parent_rows = " << mini.parent_rows << "\n";
}

MiniCatalog load_mini(std::shared_ptr<const CatalogSchema> schema,
                      const std::string& csv_path, const std::string& meta_path) {
    MiniCatalog mini;
    mini.table = ingest_csv(std::move(schema), csv_path);
    std::ifstream meta(meta_path, std::ios::binary);
    if (!meta) throw IoError("cannot open " + meta_path);
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key == "rate") {
            if (!parse_double(val, &mini.rate)) throw ConfigError("bad mini meta rate");
        } else if (key == "seed") {
            std::int64_t s = 0;
            if (!parse_int(val, &s)) throw ConfigError("bad mini meta seed");
            mini.seed = static_cast<std::uint64_t>(s);
        } else if (key == "parent_rows") {
            std::int64_t s = 0;
            if (!parse_int(val, &s)) throw ConfigError("bad mini meta parent_rows");
            mini.parent_rows = static_cast<std::size_t>(s);
        }
    }
    return mini;
}

std::string CatalogRegistry::keyof(const std::string& dataset, const std::string& table) {
    return lower(dataset) + "\x1f" + lower(table);
}

void CatalogRegistry::put(TablePtr table) {
    const auto& s = table->schema();
    tables_[keyof(s.dataset, s.table)] = std::move(table);
}

void CatalogRegistry::put_mini(const std::string& dataset, const std::string& table,
                               MiniCatalog mini) {
    minis_[keyof(dataset, table)] = std::move(mini);
}

TablePtr CatalogRegistry::find(const std::string& dataset, const std::string& table) const {
    const auto it = tables_.find(keyof(dataset, table));
    return it == tables_.end() ? nullptr : it->second;
}

const MiniCatalog* CatalogRegistry::find_mini(const std::string& dataset,
                                              const std::string& table) const {
    const auto it = minis_.find(keyof(dataset, table));
    return it == minis_.end() ? nullptr : &it->second;
}

std::vector<TablePtr> CatalogRegistry::tables() const {
    std::vector<TablePtr> out;
    for (const auto& [k, v] : tables_) out.push_back(v);
    return out;
}

std::shared_ptr<StagingTable> StagingRegistry::create(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = tables_.emplace(name, nullptr);
    if (!inserted) {
        throw StepError("staging table '" + name + "' already exists");
    }
    it->second = std::make_shared<StagingTable>();
    it->second->name = name;
    return it->second;
}

void StagingRegistry::drop(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    tables_.erase(name);
}

void StagingRegistry::drop_prefix(const std::string& prefix) {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto it = tables_.begin(); it != tables_.end();) {
        if (it->first.rfind(prefix, 0) == 0) {
            it = tables_.erase(it);
        } else {
            ++it;
        }
    }
}

bool StagingRegistry::exists(const std::string& name) const {
    std::lock_guard<std::mutex> lock(mu_);
    return tables_.count(name) != 0;
}

std::size_t StagingRegistry::count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return tables_.size();
}

std::vector<std::string> StagingRegistry::names() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> out;
    for (const auto& [k, v] : tables_) out.push_back(k);
    return out;
}

}  // namespace skyjoin::store
