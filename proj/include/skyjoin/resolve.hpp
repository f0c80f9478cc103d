// skyjoin/resolve.hpp - bound query: names resolved, types checked, WHERE split
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skyjoin/query.hpp"
#include "skyjoin/store.hpp"
#include "skyjoin/value.hpp"

namespace skyjoin::sql {

enum class ScalarType { Int, Real, Text, Bool };

struct RExpr;
using RExprPtr = std::unique_ptr<RExpr>;

struct RConst {
    Value v;
};
struct RColumn {
    int source = -1;
    int column = -1;
};
/// Derived columns of the cross-match alias.
enum class VirtualCol { Ra, Dec, Bf, LogBf };
struct RVirtual {
    VirtualCol which;
};
struct RUnary {
    UnOp op;
    RExprPtr operand;
};
struct RBinary {
    BinOp op;
    RExprPtr lhs, rhs;
};
struct RIsNull {
    RExprPtr operand;
    bool negated = false;
};

struct RExpr {
    std::variant<RConst, RColumn, RVirtual, RUnary, RBinary, RIsNull> node;
    ScalarType type = ScalarType::Real;
};

struct ResolvedSource {
    store::TablePtr table;
    std::string alias;
    int constraint = -1;  // index into ResolvedQuery::constraints, -1 = none
};

struct ResolvedConstraint {
    MatchMode mode = MatchMode::Must;
    int source = -1;
    std::vector<RExprPtr> point;  // 2 => (ra_deg, dec_deg); 3 => (cx, cy, cz)
    RExprPtr sigma;               // numeric, arcsec
    bool sigma_is_literal = false;
    double sigma_literal_arcsec = 0.0;
};

struct OutputColumn {
    std::string name;
    RExprPtr expr;
};

struct ResolvedQuery {
    std::vector<ResolvedSource> sources;
    std::vector<ResolvedConstraint> constraints;  // in query order
    std::vector<OutputColumn> select;
    std::vector<RExprPtr> pushdown;  // size = sources; null = no pushed predicate
    RExprPtr residual;               // evaluated after matching; may be null
    bool has_xmatch = false;
    std::string xmatch_alias;
    double limit = 0.0;      // linear evidence threshold
    double log_limit = 0.0;  // log(limit)
    std::optional<sphere::Region> region;
    std::optional<IntoClause> into;
};

/// Binds a parsed query against the loaded catalogs.  Throws ResolveError
/// with codes UnknownDataset / UnknownAlias / UnknownColumn / AmbiguousColumn
/// / TypeMismatch / MissingKey / UnboundSource; messages carry line:col of
/// the offending token.
ResolvedQuery resolve(const Query& q, const store::CatalogRegistry& catalogs);

/// Row bindings for expression evaluation: one row index per source (-1 =
/// every column of that source is NULL), plus the cross-match virtuals when
/// available.
struct EvalScope {
    const std::vector<ResolvedSource>* sources = nullptr;
    const std::int64_t* rows = nullptr;
    bool has_virtuals = false;
    double ra_deg = 0.0;
    double dec_deg = 0.0;
    double log_bf = 0.0;
};

/// SQL-style three-valued evaluation: any NULL operand nulls arithmetic and
/// comparisons; AND/OR propagate NULL only when undecided; IS NULL never
/// returns NULL.
Value eval(const RExpr& e, const EvalScope& scope);

/// True only when the predicate evaluates to (non-null) TRUE.
bool eval_predicate(const RExpr& e, const EvalScope& scope);

}  // namespace skyjoin::sql
