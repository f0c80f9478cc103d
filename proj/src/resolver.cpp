#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "skyjoin/resolve.hpp"

namespace skyjoin::sql {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string at(const SourcePos& pos) {
    std::ostringstream os;
    os << pos.line << ":" << pos.col << ": ";
    return os.str();
}

[[noreturn]] void fail(ErrorCode code, const SourcePos& pos, const std::string& msg) {
    throw ResolveError(code, at(pos) + msg);
}

bool is_numeric(ScalarType t) { return t == ScalarType::Int || t == ScalarType::Real; }

const char* type_name(ScalarType t) {
    switch (t) {
        case ScalarType::Int: return "int";
        case ScalarType::Real: return "real";
        case ScalarType::Text: return "text";
        case ScalarType::Bool: return "bool";
    }
    return "?";
}

ScalarType scalar_of(ColumnType t) {
    switch (t) {
        case ColumnType::Int64: return ScalarType::Int;
        case ColumnType::Float64: return ScalarType::Real;
        case ColumnType::Text: return ScalarType::Text;
    }
    return ScalarType::Real;
}

struct Usage {
    std::set<int> sources;
    bool virtuals = false;
};

void collect_usage(const RExpr& e, Usage* u) {
    if (const auto* c = std::get_if<RColumn>(&e.node)) {
        u->sources.insert(c->source);
        return;
    }
    if (std::holds_alternative<RVirtual>(e.node)) {
        u->virtuals = true;
        return;
    }
    if (const auto* un = std::get_if<RUnary>(&e.node)) {
        collect_usage(*un->operand, u);
        return;
    }
    if (const auto* b = std::get_if<RBinary>(&e.node)) {
        collect_usage(*b->lhs, u);
        collect_usage(*b->rhs, u);
        return;
    }
    if (const auto* i = std::get_if<RIsNull>(&e.node)) {
        collect_usage(*i->operand, u);
        return;
    }
}

class Resolver {
  public:
    Resolver(const Query& q, const store::CatalogRegistry& catalogs)
        : q_(q), catalogs_(catalogs) {}

    ResolvedQuery run() {
        bind_sources();
        bind_xmatch();
        bind_where();
        bind_select();
        validate_not_usage();
        out_.into = q_.into;
        if (q_.region) {
            out_.region = sphere::Region::circle(q_.region->ra_deg, q_.region->dec_deg,
                                                 q_.region->radius_arcmin);
        }
        return std::move(out_);
    }

  private:
    void bind_sources() {
        for (const auto& src : q_.sources) {
            store::TablePtr table = catalogs_.find(src.dataset, src.table);
            if (!table) {
                fail(ErrorCode::UnknownDataset, src.pos,
                     "unknown catalog '" + src.dataset + ":" + src.table + "'");
            }
            alias_index_[lower(src.alias)] = static_cast<int>(out_.sources.size());
            out_.sources.push_back(ResolvedSource{std::move(table), src.alias, -1});
        }
        if (!q_.xmatch && out_.sources.size() > 1) {
            fail(ErrorCode::UnboundSource, q_.sources[1].pos,
                 "CROSS JOIN is only meaningful together with an XMATCH clause");
        }
        out_.pushdown.resize(out_.sources.size());
    }

    void bind_xmatch() {
        if (!q_.xmatch) return;
        out_.has_xmatch = true;
        out_.xmatch_alias = q_.xmatch->alias;
        xmatch_alias_lower_ = lower(q_.xmatch->alias);
        out_.limit = q_.xmatch->limit;
        out_.log_limit = std::log(q_.xmatch->limit);

        for (const auto& c : q_.xmatch->constraints) {
            const auto it = alias_index_.find(lower(c.alias));
            if (it == alias_index_.end()) {
                fail(ErrorCode::UnknownAlias, c.pos,
                     "constraint alias '" + c.alias + "' is not declared in FROM");
            }
            const int src = it->second;
            const auto& table = *out_.sources[src].table;
            if (!table.has_key()) {
                fail(ErrorCode::MissingKey, c.pos,
                     "catalog '" + table.schema().qualified_name() +
                         "' has no key columns and cannot be cross-matched");
            }
            ResolvedConstraint rc;
            rc.mode = c.mode;
            rc.source = src;
            for (const auto& p : c.point) {
                RExprPtr expr = bind_expr(*p);
                require_single_source(*expr, src, p->pos,
                                      "POINT coordinates of the constraint on '" +
                                          c.alias + "'");
                if (!is_numeric(expr->type)) {
                    fail(ErrorCode::TypeMismatch, p->pos,
                         "POINT coordinates must be numeric");
                }
                rc.point.push_back(std::move(expr));
            }
            rc.sigma = bind_expr(*c.sigma);
            require_single_source(*rc.sigma, src, c.sigma->pos,
                                  "the positional error of the constraint on '" +
                                      c.alias + "'");
            if (!is_numeric(rc.sigma->type)) {
                fail(ErrorCode::TypeMismatch, c.sigma->pos,
                     "the positional error must be numeric (arcsec)");
            }
            if (const auto* k = std::get_if<RConst>(&rc.sigma->node)) {
                rc.sigma_is_literal = true;
                rc.sigma_literal_arcsec = k->v.as_number();
            } else if (const auto* u = std::get_if<RUnary>(&rc.sigma->node)) {
                if (u->op == UnOp::Neg && std::holds_alternative<RConst>(u->operand->node)) {
                    rc.sigma_is_literal = true;
                    rc.sigma_literal_arcsec =
                        -std::get<RConst>(u->operand->node).v.as_number();
                }
            }
            if (rc.sigma_is_literal &&
                !(rc.sigma_literal_arcsec > 0.0 && std::isfinite(rc.sigma_literal_arcsec))) {
                fail(ErrorCode::TypeMismatch, c.sigma->pos,
                     "the positional error must be positive and finite");
            }
            out_.sources[src].constraint = static_cast<int>(out_.constraints.size());
            out_.constraints.push_back(std::move(rc));
        }

        for (std::size_t i = 0; i < out_.sources.size(); ++i) {
            if (out_.sources[i].constraint < 0) {
                fail(ErrorCode::UnboundSource, q_.sources[i].pos,
                     "alias '" + out_.sources[i].alias +
                         "' takes part in no XMATCH constraint");
            }
        }
    }

    void bind_where() {
        if (!q_.where) return;
        std::vector<const Expr*> conjuncts;
        flatten_and(*q_.where, &conjuncts);
        std::vector<RExprPtr> residual_parts;
        for (const Expr* conj : conjuncts) {
            RExprPtr bound = bind_expr(*conj);
            if (bound->type != ScalarType::Bool) {
                fail(ErrorCode::TypeMismatch, conj->pos,
                     "WHERE conditions must be boolean, got " + std::string(type_name(bound->type)));
            }
            Usage u;
            collect_usage(*bound, &u);
            if (!u.virtuals && u.sources.size() == 1) {
                const int src = *u.sources.begin();
                auto& slot = out_.pushdown[src];
                if (!slot) {
                    slot = std::move(bound);
                } else {
                    auto combined = std::make_unique<RExpr>();
                    combined->type = ScalarType::Bool;
                    combined->node =
                        RBinary{BinOp::And, std::move(slot), std::move(bound)};
                    slot = std::move(combined);
                }
            } else {
                residual_parts.push_back(std::move(bound));
            }
        }
        for (auto& part : residual_parts) {
            if (!out_.residual) {
                out_.residual = std::move(part);
            } else {
                auto combined = std::make_unique<RExpr>();
                combined->type = ScalarType::Bool;
                combined->node =
                    RBinary{BinOp::And, std::move(out_.residual), std::move(part)};
                out_.residual = std::move(combined);
            }
        }
    }

    void bind_select() {
        for (const auto& item : q_.select) {
            OutputColumn col;
            col.expr = bind_expr(*item.expr);
            col.name = !item.alias.empty() ? item.alias : derive_name(*item.expr);
            out_.select.push_back(std::move(col));
        }
    }

    std::string derive_name(const Expr& e) {
        if (const auto* c = std::get_if<ColumnRef>(&e.node)) {
            if (!c->qualifier.empty() && lower(c->qualifier) == xmatch_alias_lower_ &&
                out_.has_xmatch) {
                const std::string lc = lower(c->column);
                if (lc == "ra") return "RA";
                if (lc == "dec") return "Dec";
                if (lc == "bf") return "BF";
                if (lc == "logbf") return "logBF";
            }
            return c->column;
        }
        return print(e);
    }

    void validate_not_usage() {
        auto check = [&](const RExpr& e, const char* where) {
            Usage u;
            collect_usage(e, &u);
            for (int src : u.sources) {
                const int ci = out_.sources[src].constraint;
                if (ci >= 0 && out_.constraints[ci].mode == MatchMode::Not) {
                    throw ResolveError(
                        ErrorCode::UnknownColumn,
                        std::string(where) + " references alias '" +
                            out_.sources[src].alias +
                            "', but NOT-matched catalogs contribute no columns");
                }
            }
        };
        for (const auto& item : out_.select) check(*item.expr, "the select list");
        if (out_.residual) check(*out_.residual, "the WHERE clause");
    }

    void flatten_and(const Expr& e, std::vector<const Expr*>* out) {
        if (const auto* b = std::get_if<Binary>(&e.node)) {
            if (b->op == BinOp::And) {
                flatten_and(*b->lhs, out);
                flatten_and(*b->rhs, out);
                return;
            }
        }
        out->push_back(&e);
    }

    void require_single_source(const RExpr& e, int src, const SourcePos& pos,
                               const std::string& what) {
        Usage u;
        collect_usage(e, &u);
        if (u.virtuals) {
            fail(ErrorCode::TypeMismatch, pos,
                 what + " may not reference the cross-match alias");
        }
        for (int s : u.sources) {
            if (s != src) {
                fail(ErrorCode::TypeMismatch, pos,
                     what + " may only reference columns of its own alias");
            }
        }
    }

    RExprPtr bind_expr(const Expr& e) {
        auto out = std::make_unique<RExpr>();
        if (const auto* n = std::get_if<NumberLit>(&e.node)) {
            if (n->integral && n->value >= -9.2233720368547758e18 &&
                n->value <= 9.2233720368547748e18 &&
                n->value == std::trunc(n->value)) {
                out->node = RConst{Value::of(static_cast<std::int64_t>(n->value))};
                out->type = ScalarType::Int;
            } else {
                out->node = RConst{Value::of(n->value)};
                out->type = ScalarType::Real;
            }
            return out;
        }
        if (const auto* s = std::get_if<StringLit>(&e.node)) {
            out->node = RConst{Value::of(s->value)};
            out->type = ScalarType::Text;
            return out;
        }
        if (const auto* c = std::get_if<ColumnRef>(&e.node)) {
            return bind_column(*c, e.pos);
        }
        if (const auto* f = std::get_if<FuncCall>(&e.node)) {
            fail(ErrorCode::TypeMismatch, e.pos,
                 "function '" + f->name +
                     "' is not supported: this dialect has no functions or aggregates");
        }
        if (const auto* u = std::get_if<Unary>(&e.node)) {
            RExprPtr operand = bind_expr(*u->operand);
            if (u->op == UnOp::Neg) {
                if (!is_numeric(operand->type)) {
                    fail(ErrorCode::TypeMismatch, e.pos, "unary minus needs a numeric operand");
                }
                out->type = operand->type;
            } else {
                if (operand->type != ScalarType::Bool) {
                    fail(ErrorCode::TypeMismatch, e.pos, "NOT needs a boolean operand");
                }
                out->type = ScalarType::Bool;
            }
            out->node = RUnary{u->op, std::move(operand)};
            return out;
        }
        if (const auto* b = std::get_if<Binary>(&e.node)) {
            RExprPtr lhs = bind_expr(*b->lhs);
            RExprPtr rhs = bind_expr(*b->rhs);
            switch (b->op) {
                case BinOp::Add:
                case BinOp::Sub:
                case BinOp::Mul:
                case BinOp::Div:
                    if (!is_numeric(lhs->type) || !is_numeric(rhs->type)) {
                        fail(ErrorCode::TypeMismatch, e.pos,
                             std::string("arithmetic needs numeric operands, got ") +
                                 type_name(lhs->type) + " and " + type_name(rhs->type));
                    }
                    out->type = (b->op != BinOp::Div && lhs->type == ScalarType::Int &&
                                 rhs->type == ScalarType::Int)
                                    ? ScalarType::Int
                                    : ScalarType::Real;
                    break;
                case BinOp::Eq:
                case BinOp::Ne:
                case BinOp::Lt:
                case BinOp::Le:
                case BinOp::Gt:
                case BinOp::Ge: {
                    const bool ok = (is_numeric(lhs->type) && is_numeric(rhs->type)) ||
                                    lhs->type == rhs->type;
                    if (!ok) {
                        fail(ErrorCode::TypeMismatch, e.pos,
                             std::string("cannot compare ") + type_name(lhs->type) +
                                 " with " + type_name(rhs->type));
                    }
                    out->type = ScalarType::Bool;
                    break;
                }
                case BinOp::And:
                case BinOp::Or:
                    if (lhs->type != ScalarType::Bool || rhs->type != ScalarType::Bool) {
                        fail(ErrorCode::TypeMismatch, e.pos,
                             "AND/OR need boolean operands");
                    }
                    out->type = ScalarType::Bool;
                    break;
            }
            out->node = RBinary{b->op, std::move(lhs), std::move(rhs)};
            return out;
        }
        if (const auto* i = std::get_if<IsNull>(&e.node)) {
            RExprPtr operand = bind_expr(*i->operand);
            out->node = RIsNull{std::move(operand), i->negated};
            out->type = ScalarType::Bool;
            return out;
        }
        fail(ErrorCode::TypeMismatch, e.pos, "unsupported expression");
    }

    RExprPtr bind_column(const ColumnRef& c, const SourcePos& pos) {
        auto out = std::make_unique<RExpr>();
        if (!c.qualifier.empty()) {
            const std::string q = lower(c.qualifier);
            if (out_.has_xmatch && q == xmatch_alias_lower_) {
                const std::string lc = lower(c.column);
                VirtualCol which;
                if (lc == "ra") which = VirtualCol::Ra;
                else if (lc == "dec") which = VirtualCol::Dec;
                else if (lc == "bf") which = VirtualCol::Bf;
                else if (lc == "logbf") which = VirtualCol::LogBf;
                else {
                    fail(ErrorCode::UnknownColumn, pos,
                         "the cross-match alias has columns RA, Dec, BF and logBF; '" +
                             c.column + "' is not one of them");
                }
                out->node = RVirtual{which};
                out->type = ScalarType::Real;
                return out;
            }
            const auto it = alias_index_.find(q);
            if (it == alias_index_.end()) {
                fail(ErrorCode::UnknownAlias, pos,
                     "unknown alias '" + c.qualifier + "'");
            }
            const int src = it->second;
            const int col = out_.sources[src].table->column_index(c.column);
            if (col < 0) {
                fail(ErrorCode::UnknownColumn, pos,
                     "catalog '" + out_.sources[src].table->schema().qualified_name() +
                         "' has no column '" + c.column + "'");
            }
            out->node = RColumn{src, col};
            out->type =
                scalar_of(out_.sources[src].table->column_specs()[col].type);
            return out;
        }
        int found_src = -1;
        int found_col = -1;
        for (std::size_t s = 0; s < out_.sources.size(); ++s) {
            const int col = out_.sources[s].table->column_index(c.column);
            if (col >= 0) {
                if (found_src >= 0) {
                    fail(ErrorCode::AmbiguousColumn, pos,
                         "column '" + c.column + "' exists in more than one catalog;"
                         " qualify it with an alias");
                }
                found_src = static_cast<int>(s);
                found_col = col;
            }
        }
        if (found_src < 0) {
            fail(ErrorCode::UnknownColumn, pos, "unknown column '" + c.column + "'");
        }
        out->node = RColumn{found_src, found_col};
        out->type =
            scalar_of(out_.sources[found_src].table->column_specs()[found_col].type);
        return out;
    }

    const Query& q_;
    const store::CatalogRegistry& catalogs_;
    ResolvedQuery out_;
    std::map<std::string, int> alias_index_;
    std::string xmatch_alias_lower_;
};

}  // namespace

ResolvedQuery resolve(const Query& q, const store::CatalogRegistry& catalogs) {
    return Resolver(q, catalogs).run();
}

namespace {

Value numeric_result(const RBinary& b, const Value& l, const Value& r, ScalarType type) {
    if (type == ScalarType::Int && b.op != BinOp::Div) {
        const std::int64_t a = l.as_int();
        const std::int64_t c = r.as_int();
        switch (b.op) {
            case BinOp::Add: return Value::of(a + c);
            case BinOp::Sub: return Value::of(a - c);
            case BinOp::Mul: return Value::of(a * c);
            default: break;
        }
    }
    const double a = l.as_number();
    const double c = r.as_number();
    switch (b.op) {
        case BinOp::Add: return Value::of(a + c);
        case BinOp::Sub: return Value::of(a - c);
        case BinOp::Mul: return Value::of(a * c);
        case BinOp::Div: return Value::of(a / c);
        default: break;
    }
    return Value::null();
}

int compare_values(const Value& l, const Value& r) {
    if (l.is_text() && r.is_text()) {
        const int c = l.as_text().compare(r.as_text());
        return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    if (l.is_bool() && r.is_bool()) {
        return static_cast<int>(l.as_bool()) - static_cast<int>(r.as_bool());
    }
    if (l.is_int() && r.is_int()) {
        const auto a = l.as_int();
        const auto b = r.as_int();
        return a < b ? -1 : a > b ? 1 : 0;
    }
    const double a = l.as_number();
    const double b = r.as_number();
    return a < b ? -1 : a > b ? 1 : 0;
}

Value eval_binary(const RBinary& b, const EvalScope& scope, ScalarType type) {
    if (b.op == BinOp::And || b.op == BinOp::Or) {
        const Value l = eval(*b.lhs, scope);
        const Value r = eval(*b.rhs, scope);
        const bool is_and = b.op == BinOp::And;
        // Three-valued logic: a known dominating operand decides regardless
        // of NULL on the other side.
        if (!l.is_null() && l.as_bool() == !is_and) return Value::of(!is_and);
        if (!r.is_null() && r.as_bool() == !is_and) return Value::of(!is_and);
        if (l.is_null() || r.is_null()) return Value::null();
        return Value::of(is_and ? (l.as_bool() && r.as_bool())
                                : (l.as_bool() || r.as_bool()));
    }
    const Value l = eval(*b.lhs, scope);
    if (l.is_null()) return Value::null();
    const Value r = eval(*b.rhs, scope);
    if (r.is_null()) return Value::null();
    switch (b.op) {
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul:
        case BinOp::Div:
            return numeric_result(b, l, r, type);
        case BinOp::Eq: return Value::of(compare_values(l, r) == 0);
        case BinOp::Ne: return Value::of(compare_values(l, r) != 0);
        case BinOp::Lt: return Value::of(compare_values(l, r) < 0);
        case BinOp::Le: return Value::of(compare_values(l, r) <= 0);
        case BinOp::Gt: return Value::of(compare_values(l, r) > 0);
        case BinOp::Ge: return Value::of(compare_values(l, r) >= 0);
        default: return Value::null();
    }
}

}  // namespace

Value eval(const RExpr& e, const EvalScope& scope) {
    if (const auto* k = std::get_if<RConst>(&e.node)) return k->v;
    if (const auto* c = std::get_if<RColumn>(&e.node)) {
        const std::int64_t row = scope.rows[c->source];
        if (row < 0) return Value::null();
        return (*scope.sources)[c->source].table->column(c->column).value_at(
            static_cast<std::size_t>(row));
    }
    if (const auto* v = std::get_if<RVirtual>(&e.node)) {
        if (!scope.has_virtuals) return Value::null();
        switch (v->which) {
            case VirtualCol::Ra: return Value::of(scope.ra_deg);
            case VirtualCol::Dec: return Value::of(scope.dec_deg);
            case VirtualCol::Bf: return Value::of(std::exp(scope.log_bf));
            case VirtualCol::LogBf: return Value::of(scope.log_bf);
        }
        return Value::null();
    }
    if (const auto* u = std::get_if<RUnary>(&e.node)) {
        const Value operand = eval(*u->operand, scope);
        if (operand.is_null()) return Value::null();
        if (u->op == UnOp::Neg) {
            if (operand.is_int() && e.type == ScalarType::Int) {
                return Value::of(-operand.as_int());
            }
            return Value::of(-operand.as_number());
        }
        return Value::of(!operand.as_bool());
    }
    if (const auto* b = std::get_if<RBinary>(&e.node)) {
        return eval_binary(*b, scope, e.type);
    }
    if (const auto* i = std::get_if<RIsNull>(&e.node)) {
        const Value operand = eval(*i->operand, scope);
        return Value::of(i->negated ? !operand.is_null() : operand.is_null());
    }
    return Value::null();
}

bool eval_predicate(const RExpr& e, const EvalScope& scope) {
    const Value v = eval(e, scope);
    return !v.is_null() && v.as_bool();
}

}  // namespace skyjoin::sql
