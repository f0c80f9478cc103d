// skyjoin/query.hpp - the query dialect: lexer, AST, parser, printer
//
// SELECT <exprs> [INTO DB:Table]
// FROM DS:Table AS a [CROSS JOIN DS:Table AS b ...]
// [WHERE <expr>]
// [XMATCH BAYESIAN AS x
//    MUST a ON POINT(<expr>, <expr>[, <expr>]), <sigma-expr>
//    ...
//  HAVING LIMIT <number>]
// [REGION CIRCLE J2000 <ra> <dec> <radius-arcmin>]
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skyjoin/errors.hpp"

namespace skyjoin::sql {

enum class TokenKind { Keyword, Ident, Number, String, Symbol, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;    // keywords canonical upper-case; symbols verbatim
    double number = 0.0;
    SourcePos pos;
};

/// Splits a query into tokens; throws LexError on an unexpected character or
/// an unterminated string.
std::vector<Token> tokenize(const std::string& text);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class BinOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };

struct NumberLit {
    double value = 0.0;
    bool integral = false;  // written without '.' or exponent
};
struct StringLit {
    std::string value;
};
struct ColumnRef {
    std::string qualifier;  // empty when unqualified
    std::string column;
};
struct FuncCall {
    std::string name;
    std::vector<ExprPtr> args;
};
struct Unary {
    UnOp op;
    ExprPtr operand;
};
struct Binary {
    BinOp op;
    ExprPtr lhs, rhs;
};
struct IsNull {
    ExprPtr operand;
    bool negated = false;
};

struct Expr {
    std::variant<NumberLit, StringLit, ColumnRef, FuncCall, Unary, Binary, IsNull> node;
    SourcePos pos;
};

ExprPtr make_expr(Expr e);

struct SelectItem {
    ExprPtr expr;
    std::string alias;  // empty = derive the output name from the expression
};

struct SourceRef {
    std::string dataset;
    std::string table;
    std::string alias;
    SourcePos pos;
};

enum class MatchMode { Must, May, Not };

const char* match_mode_name(MatchMode m);

struct XmatchConstraint {
    MatchMode mode = MatchMode::Must;
    std::string alias;
    std::vector<ExprPtr> point;  // 2 = (ra_deg, dec_deg), 3 = (cx, cy, cz)
    ExprPtr sigma;               // arcsec
    SourcePos pos;
};

struct XmatchClause {
    std::string alias;
    std::vector<XmatchConstraint> constraints;
    double limit = 0.0;
    SourcePos pos;
};

struct RegionClause {
    double ra_deg = 0.0;
    double dec_deg = 0.0;
    double radius_arcmin = 0.0;
};

struct IntoClause {
    std::string dataset;
    std::string table;
};

struct Query {
    std::vector<SelectItem> select;
    std::optional<IntoClause> into;
    std::vector<SourceRef> sources;
    ExprPtr where;
    std::optional<XmatchClause> xmatch;
    std::optional<RegionClause> region;
};

/// Parses a query.  Beyond grammar shape it enforces the structural rules:
/// at least two constraints with at least one MUST, one constraint per
/// alias, a positive finite limit, POINT arity 2 or 3, and an xmatch alias
/// distinct from every table alias.  Violations raise SyntaxError pointing
/// at the offending token.
Query parse(const std::string& text);

/// Canonical text form; parse(print(q)) prints back identically.
std::string print(const Query& q);
std::string print(const Expr& e);

}  // namespace skyjoin::sql
