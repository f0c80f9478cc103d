#include <sstream>

#include "skyjoin/query.hpp"
#include "skyjoin/value.hpp"

namespace skyjoin::sql {

namespace {

int precedence(BinOp op) {
    switch (op) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Eq:
        case BinOp::Ne:
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: return 4;
        case BinOp::Add:
        case BinOp::Sub: return 5;
        case BinOp::Mul:
        case BinOp::Div: return 6;
    }
    return 0;
}

const char* op_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Eq: return "=";
        case BinOp::Ne: return "<>";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "AND";
        case BinOp::Or: return "OR";
    }
    return "?";
}

std::string quote_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out.push_back(c);
    }
    out += "'";
    return out;
}

// prec = the loosest precedence printable here without parentheses.
void print_expr(std::ostream& os, const Expr& e, int prec);

void print_operand(std::ostream& os, const Expr& e, int prec) {
    const bool parens = [&] {
        if (const auto* b = std::get_if<Binary>(&e.node)) return precedence(b->op) < prec;
        if (std::holds_alternative<Unary>(e.node)) {
            return std::get<Unary>(e.node).op == UnOp::Not && prec > 3;
        }
        if (std::holds_alternative<IsNull>(e.node)) return prec > 4;
        return false;
    }();
    if (parens) {
        os << '(';
        print_expr(os, e, 0);
        os << ')';
    } else {
        print_expr(os, e, prec);
    }
}

void print_expr(std::ostream& os, const Expr& e, int prec) {
    if (const auto* n = std::get_if<NumberLit>(&e.node)) {
        os << format_double(n->value);
        return;
    }
    if (const auto* s = std::get_if<StringLit>(&e.node)) {
        os << quote_string(s->value);
        return;
    }
    if (const auto* c = std::get_if<ColumnRef>(&e.node)) {
        if (!c->qualifier.empty()) os << c->qualifier << '.';
        os << c->column;
        return;
    }
    if (const auto* f = std::get_if<FuncCall>(&e.node)) {
        os << f->name << '(';
        for (std::size_t i = 0; i < f->args.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, *f->args[i], 0);
        }
        os << ')';
        return;
    }
    if (const auto* u = std::get_if<Unary>(&e.node)) {
        if (u->op == UnOp::Not) {
            os << "NOT ";
            print_operand(os, *u->operand, 3);
        } else {
            os << '-';
            print_operand(os, *u->operand, 7);
        }
        return;
    }
    if (const auto* b = std::get_if<Binary>(&e.node)) {
        const int p = precedence(b->op);
        // Comparisons don't chain: both operands must reparse as additive.
        const bool cmp = p == 4;
        print_operand(os, *b->lhs, cmp ? 5 : p);
        os << ' ' << op_text(b->op) << ' ';
        // Same-precedence on the right needs parens to preserve left-assoc
        // shape (a - (b - c)).
        print_operand(os, *b->rhs, cmp ? 5 : p + 1);
        (void)prec;
        return;
    }
    if (const auto* isn = std::get_if<IsNull>(&e.node)) {
        print_operand(os, *isn->operand, 5);
        os << (isn->negated ? " IS NOT NULL" : " IS NULL");
        return;
    }
}

}  // namespace

std::string print(const Expr& e) {
    std::ostringstream os;
    print_expr(os, e, 0);
    return os.str();
}

std::string print(const Query& q) {
    std::ostringstream os;
    os << "SELECT ";
    for (std::size_t i = 0; i < q.select.size(); ++i) {
        if (i) os << ", ";
        os << print(*q.select[i].expr);
        if (!q.select[i].alias.empty()) os << " AS " << q.select[i].alias;
    }
    if (q.into) os << "\nINTO " << q.into->dataset << ":" << q.into->table;
    for (std::size_t i = 0; i < q.sources.size(); ++i) {
        os << (i == 0 ? "\nFROM " : "\nCROSS JOIN ");
        os << q.sources[i].dataset << ":" << q.sources[i].table << " AS "
           << q.sources[i].alias;
    }
    if (q.where) os << "\nWHERE " << print(*q.where);
    if (q.xmatch) {
        os << "\nXMATCH BAYESIAN AS " << q.xmatch->alias;
        for (const auto& c : q.xmatch->constraints) {
            os << "\n  " << match_mode_name(c.mode) << ' ' << c.alias << " ON POINT(";
            for (std::size_t i = 0; i < c.point.size(); ++i) {
                if (i) os << ", ";
                os << print(*c.point[i]);
            }
            os << "), " << print(*c.sigma);
        }
        os << "\nHAVING LIMIT " << format_double(q.xmatch->limit);
    }
    if (q.region) {
        os << "\nREGION CIRCLE J2000 " << format_double(q.region->ra_deg) << ' '
           << format_double(q.region->dec_deg) << ' '
           << format_double(q.region->radius_arcmin);
    }
    return os.str();
}

}  // namespace skyjoin::sql
