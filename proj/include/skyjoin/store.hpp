// skyjoin/store.hpp - catalog schemas, columnar tables, ingest and sampling
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skyjoin/bayes.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/geometry.hpp"
#include "skyjoin/value.hpp"

namespace skyjoin::store {

class Column {
  public:
    explicit Column(ColumnType type) : type_(type) {}

    ColumnType type() const { return type_; }
    std::size_t size() const { return nulls_.size(); }
    bool is_null(std::size_t i) const { return nulls_[i] != 0; }

    void push_null();
    void push_int(std::int64_t v);
    void push_real(double v);
    void push_text(std::string v);

    std::int64_t int_at(std::size_t i) const { return ints_[i]; }
    double real_at(std::size_t i) const { return reals_[i]; }
    const std::string& text_at(std::size_t i) const { return texts_[i]; }
    void set_real(std::size_t i, double v) { reals_[i] = v; }

    Value value_at(std::size_t i) const;
    /// CSV cell for the value (null -> unquoted empty field).
    std::string format_at(std::size_t i) const;

  private:
    ColumnType type_;
    std::vector<std::int64_t> ints_;
    std::vector<double> reals_;
    std::vector<std::string> texts_;
    std::vector<std::uint8_t> nulls_;
};

struct SphericalCoordCols {
    std::string ra, dec;
};
struct CartesianCoordCols {
    std::string cx, cy, cz;
};
using CoordCols = std::variant<SphericalCoordCols, CartesianCoordCols>;

struct ColumnSpec {
    std::string name;
    ColumnType type = ColumnType::Float64;
};

/// Static description of one catalog table.  Key columns are optional at
/// ingest time; tables without a key cannot take part in a cross-match.
struct CatalogSchema {
    std::string dataset;
    std::string table;
    CoordCols coords;
    std::vector<std::string> key_columns;
    std::optional<std::string> error_column;     // per-detection sigma, arcsec
    std::optional<double> error_floor_arcsec;    // guaranteed lower bound on it
    std::vector<ColumnSpec> payload;
    std::optional<sphere::Region> footprint;

    std::string qualified_name() const { return dataset + ":" + table; }
    /// Every stored column in stable order: coordinates, error column,
    /// payload, then key columns not already declared (implicitly int).
    std::vector<ColumnSpec> stored_columns() const;
};

class CatalogTable {
  public:
    CatalogTable(std::shared_ptr<const CatalogSchema> schema,
                 std::vector<Column> columns,
                 std::vector<sphere::UnitVector> positions,
                 std::vector<sphere::SkyCoord> skies);

    const CatalogSchema& schema() const { return *schema_; }
    std::shared_ptr<const CatalogSchema> schema_ptr() const { return schema_; }
    std::size_t row_count() const { return positions_.size(); }

    const std::vector<ColumnSpec>& column_specs() const { return specs_; }
    /// Case-insensitive lookup; -1 when absent.
    int column_index(const std::string& name) const;
    const Column& column(std::size_t i) const { return columns_[i]; }

    const sphere::UnitVector& position(std::size_t row) const { return positions_[row]; }
    const sphere::SkyCoord& sky(std::size_t row) const { return skies_[row]; }

    bool has_key() const { return !key_indexes_.empty(); }
    /// Lexicographic typed comparison of the key tuples of two rows.
    int compare_keys(std::size_t a, std::size_t b) const;
    std::string key_string(std::size_t row) const;

  private:
    std::shared_ptr<const CatalogSchema> schema_;
    std::vector<ColumnSpec> specs_;
    std::vector<Column> columns_;
    std::map<std::string, std::size_t> index_;  // lower-cased name -> column
    std::vector<std::size_t> key_indexes_;
    std::vector<sphere::UnitVector> positions_;
    std::vector<sphere::SkyCoord> skies_;
};

using TablePtr = std::shared_ptr<const CatalogTable>;

/// Reads a catalog CSV against its schema.  The header must contain every
/// schema column (case-insensitive); extra CSV columns are ignored.  Throws
/// CsvParseError (malformed cell / NULL where forbidden), BadCoordinateError
/// (position outside the sphere) or DuplicateKeyError.
TablePtr ingest_csv(std::shared_ptr<const CatalogSchema> schema,
                    const std::string& csv_path);
TablePtr ingest_csv(std::shared_ptr<const CatalogSchema> schema, std::istream& in,
                    const std::string& origin);

/// Writes the table back out; ingest(export(t)) reproduces t exactly.
void export_csv(const CatalogTable& table, std::ostream& out);
void export_csv(const CatalogTable& table, const std::string& path);

/// Uniform row sample retaining the parent schema.  Row i is kept when the
/// i-th draw of an mt19937_64 seeded with `seed` (mapped to [0,1) by taking
/// the top 53 bits) falls below `rate`; the mapping is part of the format so
/// minis are reproducible byte-for-byte across platforms.
struct MiniCatalog {
    double rate = 1.0;
    std::uint64_t seed = 0;
    std::size_t parent_rows = 0;
    TablePtr table;
};

MiniCatalog sample_mini(const TablePtr& parent, double rate, std::uint64_t seed);

void save_mini(const MiniCatalog& mini, const std::string& csv_path,
               const std::string& meta_path);
MiniCatalog load_mini(std::shared_ptr<const CatalogSchema> schema,
                      const std::string& csv_path, const std::string& meta_path);

/// All loaded catalogs and their minis, addressed case-insensitively by
/// dataset:table.
class CatalogRegistry {
  public:
    void put(TablePtr table);
    void put_mini(const std::string& dataset, const std::string& table, MiniCatalog mini);

    TablePtr find(const std::string& dataset, const std::string& table) const;
    const MiniCatalog* find_mini(const std::string& dataset, const std::string& table) const;
    std::vector<TablePtr> tables() const;

  private:
    static std::string keyof(const std::string& dataset, const std::string& table);
    std::map<std::string, TablePtr> tables_;
    std::map<std::string, MiniCatalog> minis_;
};

/// Named intermediate result of one plan step on one partition.  Registered
/// on creation, dropped when consumed or when the owning job reaches a
/// terminal state; never visible to user queries.
struct MatchRow;

struct StagingTable {
    std::string name;
    std::vector<MatchRow> rows;
};

class StagingRegistry {
  public:
    std::shared_ptr<StagingTable> create(const std::string& name);
    void drop(const std::string& name);        // idempotent
    void drop_prefix(const std::string& prefix);
    bool exists(const std::string& name) const;
    std::size_t count() const;
    std::vector<std::string> names() const;

  private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<StagingTable>> tables_;
};

/// One candidate association under construction: the source row per xmatch
/// constraint (-1 where absent) and the running evidence accumulator.
struct MatchRow {
    std::vector<std::int64_t> det;
    bayes::MatchAccumulator acc;
};

}  // namespace skyjoin::store
