#include <cmath>
#include <set>

#include "skyjoin/query.hpp"
#include "skyjoin/value.hpp"

namespace skyjoin::sql {

namespace {

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Query parse_query() {
        Query q;
        expect_keyword("SELECT");
        q.select.push_back(parse_select_item());
        while (accept_symbol(",")) q.select.push_back(parse_select_item());

        if (accept_keyword("INTO")) {
            IntoClause into;
            into.dataset = expect_ident("output dataset name").text;
            expect_symbol(":");
            into.table = expect_ident("output table name").text;
            q.into = std::move(into);
        }

        expect_keyword("FROM");
        q.sources.push_back(parse_source());
        while (peek_keyword("CROSS")) {
            next();
            expect_keyword("JOIN");
            q.sources.push_back(parse_source());
        }
        check_source_aliases(q.sources);

        if (accept_keyword("WHERE")) q.where = parse_expr();
        if (peek_keyword("XMATCH")) q.xmatch = parse_xmatch(q.sources);
        if (accept_keyword("REGION")) q.region = parse_region();

        const Token& t = peek();
        if (t.kind != TokenKind::End) {
            throw SyntaxError(t.pos, "end of query", describe(t),
                              "unexpected trailing input: found " + describe(t));
        }
        return q;
    }

  private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    static std::string describe(const Token& t) {
        switch (t.kind) {
            case TokenKind::End: return "end of query";
            case TokenKind::Number: return "number '" + t.text + "'";
            case TokenKind::String: return "string literal";
            default: return "'" + t.text + "'";
        }
    }

    [[noreturn]] void unexpected(const std::string& expected) {
        const Token& t = peek();
        throw SyntaxError(t.pos, expected, describe(t),
                          "expected " + expected + ", found " + describe(t));
    }

    bool peek_keyword(const std::string& kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Keyword && t.text == kw;
    }
    bool accept_keyword(const std::string& kw) {
        if (peek_keyword(kw)) {
            next();
            return true;
        }
        return false;
    }
    const Token& expect_keyword(const std::string& kw) {
        if (!peek_keyword(kw)) unexpected("'" + kw + "'");
        return next();
    }
    bool peek_symbol(const std::string& s, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Symbol && t.text == s;
    }
    bool accept_symbol(const std::string& s) {
        if (peek_symbol(s)) {
            next();
            return true;
        }
        return false;
    }
    const Token& expect_symbol(const std::string& s) {
        if (!peek_symbol(s)) unexpected("'" + s + "'");
        return next();
    }
    const Token& expect_ident(const std::string& what) {
        if (peek().kind != TokenKind::Ident) unexpected(what);
        return next();
    }
    const Token& expect_number(const std::string& what) {
        if (peek().kind != TokenKind::Number) unexpected(what);
        return next();
    }

    SelectItem parse_select_item() {
        SelectItem item;
        item.expr = parse_expr();
        if (accept_keyword("AS")) item.alias = expect_ident("output column alias").text;
        return item;
    }

    SourceRef parse_source() {
        SourceRef src;
        const Token& ds = expect_ident("dataset name");
        src.pos = ds.pos;
        src.dataset = ds.text;
        expect_symbol(":");
        src.table = expect_ident("table name").text;
        if (accept_keyword("AS")) {
            src.alias = expect_ident("table alias").text;
        } else {
            src.alias = src.table;
        }
        return src;
    }

    void check_source_aliases(const std::vector<SourceRef>& sources) {
        std::set<std::string> seen;
        for (const auto& s : sources) {
            if (!seen.insert(s.alias).second) {
                throw SyntaxError(s.pos, "a distinct table alias", "'" + s.alias + "'",
                                  "duplicate table alias '" + s.alias + "'");
            }
        }
    }

    XmatchClause parse_xmatch(const std::vector<SourceRef>& sources) {
        XmatchClause clause;
        clause.pos = peek().pos;
        expect_keyword("XMATCH");
        expect_keyword("BAYESIAN");
        expect_keyword("AS");
        const Token& alias = expect_ident("cross-match alias");
        clause.alias = alias.text;
        for (const auto& s : sources) {
            if (s.alias == clause.alias) {
                throw SyntaxError(alias.pos, "an alias distinct from every table alias",
                                  "'" + clause.alias + "'",
                                  "cross-match alias '" + clause.alias +
                                      "' collides with a table alias");
            }
        }

        std::set<std::string> constrained;
        bool any_must = false;
        while (peek_keyword("MUST") || peek_keyword("MAY") || peek_keyword("NOT")) {
            XmatchConstraint c;
            c.pos = peek().pos;
            const std::string mode = next().text;
            c.mode = mode == "MUST" ? MatchMode::Must
                     : mode == "MAY" ? MatchMode::May
                                     : MatchMode::Not;
            any_must = any_must || c.mode == MatchMode::Must;
            const Token& src_alias = expect_ident("a table alias");
            c.alias = src_alias.text;
            if (!constrained.insert(c.alias).second) {
                throw SyntaxError(src_alias.pos, "an alias with a single constraint",
                                  "'" + c.alias + "'",
                                  "alias '" + c.alias + "' appears in two constraints");
            }
            expect_keyword("ON");
            expect_keyword("POINT");
            const Token& open = expect_symbol("(");
            c.point.push_back(parse_expr());
            while (accept_symbol(",")) c.point.push_back(parse_expr());
            expect_symbol(")");
            if (c.point.size() != 2 && c.point.size() != 3) {
                throw SyntaxError(open.pos, "POINT(ra, dec) or POINT(cx, cy, cz)",
                                  format_int(static_cast<std::int64_t>(c.point.size())) +
                                      " arguments",
                                  "POINT takes 2 or 3 arguments");
            }
            expect_symbol(",");
            c.sigma = parse_expr();
            clause.constraints.push_back(std::move(c));
        }

        const Token& having = peek();
        expect_keyword("HAVING");
        expect_keyword("LIMIT");
        const Token& lim = expect_number("the evidence limit");
        clause.limit = lim.number;
        if (!(clause.limit > 0.0) || !std::isfinite(clause.limit)) {
            throw SyntaxError(lim.pos, "a positive finite limit", "'" + lim.text + "'",
                              "the evidence limit must be positive and finite");
        }

        if (clause.constraints.size() < 2) {
            throw SyntaxError(having.pos, "at least two match constraints",
                              describe(having),
                              "a cross-match needs at least two constraints");
        }
        if (!any_must) {
            throw SyntaxError(clause.pos, "at least one MUST constraint", "none",
                              "a cross-match needs at least one MUST constraint");
        }
        return clause;
    }

    RegionClause parse_region() {
        expect_keyword("CIRCLE");
        const Token& frame = expect_ident("equinox 'J2000'");
        if (frame.text != "J2000") {
            throw SyntaxError(frame.pos, "'J2000'", "'" + frame.text + "'",
                              "only the J2000 equinox is supported");
        }
        RegionClause r;
        r.ra_deg = parse_signed_number("circle RA (degrees)");
        r.dec_deg = parse_signed_number("circle Dec (degrees)");
        r.radius_arcmin = parse_signed_number("circle radius (arcmin)");
        return r;
    }

    double parse_signed_number(const std::string& what) {
        double sign = 1.0;
        if (accept_symbol("-")) sign = -1.0;
        const Token& t = expect_number(what);
        return sign * t.number;
    }

    // Expression grammar, loosest to tightest: OR, AND, NOT, comparison / IS
    // NULL, additive, multiplicative, unary minus, primary.
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (peek_keyword("OR")) {
            const SourcePos pos = next().pos;
            ExprPtr rhs = parse_and();
            lhs = make_expr(Expr{Binary{BinOp::Or, std::move(lhs), std::move(rhs)}, pos});
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (peek_keyword("AND")) {
            const SourcePos pos = next().pos;
            ExprPtr rhs = parse_not();
            lhs = make_expr(Expr{Binary{BinOp::And, std::move(lhs), std::move(rhs)}, pos});
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (peek_keyword("NOT")) {
            const SourcePos pos = next().pos;
            ExprPtr operand = parse_not();
            return make_expr(Expr{Unary{UnOp::Not, std::move(operand)}, pos});
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        ExprPtr lhs = parse_additive();
        if (peek_keyword("IS")) {
            const SourcePos pos = next().pos;
            bool negated = accept_keyword("NOT");
            expect_keyword("NULL");
            return make_expr(Expr{IsNull{std::move(lhs), negated}, pos});
        }
        static const struct {
            const char* sym;
            BinOp op;
        } ops[] = {{"=", BinOp::Eq}, {"<>", BinOp::Ne}, {"!=", BinOp::Ne},
                   {"<=", BinOp::Le}, {">=", BinOp::Ge}, {"<", BinOp::Lt},
                   {">", BinOp::Gt}};
        for (const auto& candidate : ops) {
            if (peek_symbol(candidate.sym)) {
                const SourcePos pos = next().pos;
                ExprPtr rhs = parse_additive();
                return make_expr(
                    Expr{Binary{candidate.op, std::move(lhs), std::move(rhs)}, pos});
            }
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        for (;;) {
            if (peek_symbol("+")) {
                const SourcePos pos = next().pos;
                lhs = make_expr(
                    Expr{Binary{BinOp::Add, std::move(lhs), parse_multiplicative()}, pos});
            } else if (peek_symbol("-")) {
                const SourcePos pos = next().pos;
                lhs = make_expr(
                    Expr{Binary{BinOp::Sub, std::move(lhs), parse_multiplicative()}, pos});
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        for (;;) {
            if (peek_symbol("*")) {
                const SourcePos pos = next().pos;
                lhs = make_expr(Expr{Binary{BinOp::Mul, std::move(lhs), parse_unary()}, pos});
            } else if (peek_symbol("/")) {
                const SourcePos pos = next().pos;
                lhs = make_expr(Expr{Binary{BinOp::Div, std::move(lhs), parse_unary()}, pos});
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_unary() {
        if (peek_symbol("-")) {
            const SourcePos pos = next().pos;
            return make_expr(Expr{Unary{UnOp::Neg, parse_unary()}, pos});
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.kind == TokenKind::Number) {
            next();
            const bool integral = t.text.find_first_of(".eE") == std::string::npos;
            return make_expr(Expr{NumberLit{t.number, integral}, t.pos});
        }
        if (t.kind == TokenKind::String) {
            next();
            return make_expr(Expr{StringLit{t.text}, t.pos});
        }
        if (t.kind == TokenKind::Symbol && t.text == "(") {
            next();
            ExprPtr inner = parse_expr();
            expect_symbol(")");
            return inner;
        }
        if (t.kind == TokenKind::Ident) {
            next();
            if (peek_symbol("(")) {
                next();
                FuncCall call;
                call.name = t.text;
                if (!peek_symbol(")")) {
                    call.args.push_back(parse_expr());
                    while (accept_symbol(",")) call.args.push_back(parse_expr());
                }
                expect_symbol(")");
                return make_expr(Expr{std::move(call), t.pos});
            }
            if (accept_symbol(".")) {
                const Token& col = expect_ident("a column name");
                return make_expr(Expr{ColumnRef{t.text, col.text}, t.pos});
            }
            return make_expr(Expr{ColumnRef{std::string(), t.text}, t.pos});
        }
        unexpected("an expression");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

Query parse(const std::string& text) {
    Parser p(tokenize(text));
    return p.parse_query();
}

}  // namespace skyjoin::sql
