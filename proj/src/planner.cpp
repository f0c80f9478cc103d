#include "skyjoin/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace skyjoin::plan {
namespace {

using sql::MatchMode;

double log_w_over_sinh(double w) { return std::log(w) - bayes::logsinh(w); }

double log_sinh_over_w(double x) {
    if (x <= 0.0) return 0.0;
    return bayes::logsinh(x) - std::log(x);
}

/// |W + w_r x_r| when the included side has total weight `s` and the new
/// detection sits psi away from its combined position.
double combined_w(double s, double wr, double psi) {
    double c = std::cos(0.5 * psi);
    double d = s - wr;
    return std::sqrt(d * d + 4.0 * s * wr * c * c);
}

/// Largest separation at which a detection with weight anywhere in
/// [w_lo, w_hi] can still lift a partial match over the evidence budget.
/// The exact increment is log(sinh(v)/v) + log(w_r/sinh(w_r)) with
/// v = |W + w_r x_r|; v^2 is quadratic with positive curvature in both |W|
/// and w_r, so over the box |W| in [m_lo, s], w_r in [w_lo, w_hi] it peaks
/// at a corner.  Taking v at the largest corner and the log term at w_lo
/// errs large, so pruning with the result never loses a qualifying tuple.
double step_radius(double m_lo, double s, double w_lo, double w_hi, double rhs_total) {
    if (s <= 0.0 || w_lo <= 0.0) return 0.0;
    double rhs = rhs_total - log_w_over_sinh(w_lo);
    if (std::isinf(rhs) && rhs < 0.0) return sphere::kPi;
    auto bound = [&](double psi) {
        double v = std::max(std::max(combined_w(m_lo, w_lo, psi), combined_w(m_lo, w_hi, psi)),
                            std::max(combined_w(s, w_lo, psi), combined_w(s, w_hi, psi)));
        return log_sinh_over_w(v);
    };
    if (bound(0.0) < rhs) return 0.0;
    if (bound(sphere::kPi) >= rhs) return sphere::kPi;
    double lo = 0.0, hi = sphere::kPi;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (bound(mid) >= rhs ? lo : hi) = mid;
    }
    return hi;
}

double zone_height_for(double radius_rad) {
    double h = radius_rad * sphere::kDegPerRad;
    return std::clamp(h, 1.0 / 3600.0, 1.0);
}

int ra_bin(double ra_deg) {
    int b = static_cast<int>(std::floor(ra_deg));
    return std::clamp(b, 0, 359);
}

bool row_passes(const sql::ResolvedQuery& rq,
                const std::vector<sql::ResolvedSource>& eval_sources, int src,
                std::int64_t row, std::vector<std::int64_t>& rows_buf) {
    const store::CatalogTable& t = *eval_sources[src].table;
    if (rq.region && !sphere::region_contains(*rq.region, t.position(row))) return false;
    if (rq.pushdown[src]) {
        rows_buf.assign(eval_sources.size(), -1);
        rows_buf[src] = row;
        sql::EvalScope scope;
        scope.sources = &eval_sources;
        scope.rows = rows_buf.data();
        if (!sql::eval_predicate(*rq.pushdown[src], scope)) return false;
    }
    return true;
}

double eval_number(const sql::RExpr& e, const sql::EvalScope& scope,
                   const std::string& what, const std::string& at) {
    Value v = sql::eval(e, scope);
    if (v.is_null()) throw StepError(at + ": " + what + " is NULL");
    double x = v.as_number();
    if (!std::isfinite(x)) throw StepError(at + ": " + what + " is not finite");
    return x;
}

WorkingSet build_working_set(const sql::ResolvedQuery& rq, int ci) {
    const sql::ResolvedConstraint& c = rq.constraints[ci];
    WorkingSet ws;
    ws.source = c.source;
    ws.constraint = ci;
    ws.table = rq.sources[c.source].table;
    const store::CatalogTable& t = *ws.table;
    const std::string qual =
        rq.sources[c.source].alias + " (" + t.schema().qualified_name() + ")";

    bayes::Precision lit{};
    if (c.sigma_is_literal) lit = bayes::Precision::from_sigma_arcsec(c.sigma_literal_arcsec);

    std::vector<std::int64_t> rows_buf(rq.sources.size(), -1);
    sql::EvalScope scope;
    scope.sources = &rq.sources;
    scope.rows = rows_buf.data();

    double smin = std::numeric_limits<double>::infinity();
    double smax = 0.0;
    for (std::size_t i = 0; i < t.row_count(); ++i) {
        if (!row_passes(rq, rq.sources, c.source, static_cast<std::int64_t>(i), rows_buf))
            continue;
        rows_buf.assign(rq.sources.size(), -1);
        rows_buf[c.source] = static_cast<std::int64_t>(i);
        const std::string at = qual + " row " + t.key_string(i);

        sphere::UnitVector u;
        if (c.point.size() == 2) {
            sphere::SkyCoord sc{eval_number(*c.point[0], scope, "POINT right ascension", at),
                                eval_number(*c.point[1], scope, "POINT declination", at)};
            u = sphere::to_unit_vector(sc);
        } else {
            double cx = eval_number(*c.point[0], scope, "POINT x", at);
            double cy = eval_number(*c.point[1], scope, "POINT y", at);
            double cz = eval_number(*c.point[2], scope, "POINT z", at);
            try {
                u = sphere::UnitVector::of(cx, cy, cz);
            } catch (const EngineError& e) {
                throw StepError(at + ": POINT is not a direction: " + e.what());
            }
        }

        bayes::Precision prec = lit;
        double sigma_as = c.sigma_literal_arcsec;
        if (!c.sigma_is_literal) {
            sigma_as = eval_number(*c.sigma, scope, "positional error", at);
            try {
                prec = bayes::Precision::from_sigma_arcsec(sigma_as);
            } catch (const EngineError& e) {
                throw StepError(at + ": " + e.what());
            }
            const auto& floor_as = t.schema().error_floor_arcsec;
            if (floor_as && sigma_as < *floor_as * (1.0 - 1e-12))
                throw StepError(at + ": positional error " + format_double(sigma_as) +
                                " is below the declared floor " + format_double(*floor_as));
        }

        ws.rows.push_back(static_cast<std::int64_t>(i));
        ws.pos.push_back(u);
        ws.sky.push_back(sphere::from_unit_vector(u));
        ws.w.push_back(prec.w);
        smin = std::min(smin, sigma_as);
        smax = std::max(smax, sigma_as);
    }
    if (!ws.rows.empty()) {
        ws.sigma_min_as = smin;
        ws.sigma_max_as = smax;
    }
    return ws;
}

const char* mode_word(MatchMode m) {
    switch (m) {
        case MatchMode::Must: return "MUST";
        case MatchMode::May: return "MAY";
        default: return "NOT";
    }
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

std::vector<SourceStats> gather_stats(const sql::ResolvedQuery& rq,
                                      const store::CatalogRegistry& catalogs,
                                      std::vector<std::string>* warnings) {
    std::vector<SourceStats> out(rq.sources.size());
    std::vector<std::int64_t> rows_buf;
    for (std::size_t s = 0; s < rq.sources.size(); ++s) {
        SourceStats& st = out[s];
        st.source = static_cast<int>(s);
        st.alias = rq.sources[s].alias;
        const store::CatalogSchema& schema = rq.sources[s].table->schema();

        std::vector<sql::ResolvedSource> eval_sources = rq.sources;
        const store::MiniCatalog* mini = catalogs.find_mini(schema.dataset, schema.table);
        if (mini && mini->table) {
            eval_sources[s].table = mini->table;
            st.used_mini = true;
            st.rate = mini->rate;
        } else if (warnings) {
            warnings->push_back("no mini catalog for " + schema.qualified_name() +
                                "; row estimate scanned the full table");
        }

        const store::CatalogTable& scan = *eval_sources[s].table;
        double wgt = 1.0 / st.rate;
        for (std::size_t i = 0; i < scan.row_count(); ++i) {
            if (!row_passes(rq, eval_sources, static_cast<int>(s),
                            static_cast<std::int64_t>(i), rows_buf))
                continue;
            ++st.sample_pass;
            st.ra_hist[ra_bin(scan.sky(i).ra_deg)] += wgt;
        }
        st.estimated_rows = static_cast<double>(st.sample_pass) / st.rate;
    }
    return out;
}

std::vector<int> order_steps(const sql::ResolvedQuery& rq,
                             const std::vector<SourceStats>& stats) {
    std::vector<int> idx(rq.constraints.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto rank = [](MatchMode m) { return m == MatchMode::Must ? 0 : m == MatchMode::May ? 1 : 2; };
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        int ra = rank(rq.constraints[a].mode);
        int rb = rank(rq.constraints[b].mode);
        if (ra != rb) return ra < rb;
        return stats[rq.constraints[a].source].estimated_rows <
               stats[rq.constraints[b].source].estimated_rows;
    });
    return idx;
}

std::vector<double> partition_boundaries(const std::array<double, 360>& hist, int p) {
    p = std::max(1, p);
    std::array<double, 361> cum{};
    for (int i = 0; i < 360; ++i) cum[i + 1] = cum[i] + std::max(0.0, hist[i]);
    double total = cum[360];
    std::vector<double> b(static_cast<std::size_t>(p));
    if (total <= 0.0) {
        for (int k = 0; k < p; ++k) b[k] = 360.0 * k / p;
        return b;
    }
    for (int k = 0; k < p; ++k) {
        double t = total * k / p;
        // last edge not past t; ties resolve forward across zero-mass bins
        int j = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), t) - cum.begin()) - 1;
        j = std::clamp(j, 0, 359);
        double x = (cum[j] >= t || hist[j] <= 0.0) ? j : j + (t - cum[j]) / hist[j];
        b[k] = std::clamp(x, 0.0, 360.0 - 1e-9);
        if (k > 0) b[k] = std::max(b[k], b[k - 1]);
    }
    return b;
}

CompiledPlan compile(std::shared_ptr<const sql::ResolvedQuery> rq_ptr,
                     const store::CatalogRegistry& catalogs, const PlanOptions& opts) {
    const sql::ResolvedQuery& rq = *rq_ptr;
    CompiledPlan plan;
    plan.rq = rq_ptr;
    plan.stats = gather_stats(rq, catalogs, &plan.warnings);
    plan.partitions = 1;
    plan.boundaries = {0.0};
    if (!rq.has_xmatch) return plan;

    std::vector<int> order = order_steps(rq, plan.stats);
    plan.driving = order[0];

    plan.working.resize(rq.constraints.size());
    for (std::size_t ci = 0; ci < rq.constraints.size(); ++ci)
        plan.working[ci] = build_working_set(rq, static_cast<int>(ci));

    int must_count = 0;
    for (const auto& c : rq.constraints)
        if (c.mode == MatchMode::Must) ++must_count;

    for (int ci : order) {
        if (rq.constraints[ci].mode != MatchMode::Must) continue;
        if (plan.working[ci].rows.empty()) {
            plan.empty_result = true;
            plan.empty_reason = rq.sources[rq.constraints[ci].source].alias + " (" +
                                plan.working[ci].table->schema().qualified_name() +
                                "): no detections pass the filters";
            return plan;
        }
    }
    if (must_count == 1 && rq.log_limit > 0.0) {
        plan.empty_result = true;
        plan.empty_reason = "one catalog alone cannot reach the evidence limit";
        return plan;
    }

    // weight cap (best detection) and weakest weight per constraint
    std::vector<double> cap(rq.constraints.size(), 0.0);
    std::vector<double> wmin(rq.constraints.size(), 0.0);
    for (std::size_t ci = 0; ci < rq.constraints.size(); ++ci) {
        const WorkingSet& ws = plan.working[ci];
        if (ws.rows.empty()) continue;
        cap[ci] = bayes::Precision::from_sigma_arcsec(ws.sigma_min_as).w;
        wmin[ci] = bayes::Precision::from_sigma_arcsec(ws.sigma_max_as).w;
    }

    std::vector<double> must_caps{cap[plan.driving]};
    double s_included = cap[plan.driving];
    double m_lo = wmin[plan.driving];  // lower bound on |W| of the included side
    double t_min_sum = log_w_over_sinh(wmin[plan.driving]);

    // smallest projection a step at radius theta can add to |W|
    auto m_gain = [&](int ci, double theta) {
        double c = std::cos(theta);
        return (c >= 0.0 ? wmin[ci] : cap[ci]) * c;
    };

    for (std::size_t k = 1; k < order.size(); ++k) {
        int ci = order[k];
        const sql::ResolvedConstraint& c = rq.constraints[ci];
        MatchStep step;
        step.mode = c.mode;
        step.constraint = ci;

        if (c.mode == MatchMode::Must) {
            std::vector<double> with = must_caps;
            with.push_back(cap[ci]);
            std::vector<double> all = with;
            for (std::size_t k2 = k + 1; k2 < order.size(); ++k2)
                if (rq.constraints[order[k2]].mode == MatchMode::Must)
                    all.push_back(cap[order[k2]]);
            double future = bayes::coincident_log_bf(all) - bayes::coincident_log_bf(with);
            double rhs_total = rq.log_limit - future - t_min_sum;
            step.cutoff_rad = step_radius(m_lo, s_included, wmin[ci], cap[ci], rhs_total);
            if (step.cutoff_rad <= 0.0) {
                plan.empty_result = true;
                plan.empty_reason =
                    "the evidence limit is out of reach even for coincident detections";
                return plan;
            }
            m_lo = std::max(0.0, m_lo + m_gain(ci, step.cutoff_rad));
            s_included += cap[ci];
            must_caps = std::move(with);
            t_min_sum += log_w_over_sinh(wmin[ci]);
        } else {
            double rhs_total = rq.log_limit - t_min_sum;
            step.cutoff_rad = plan.working[ci].rows.empty()
                                  ? 0.0
                                  : step_radius(m_lo, s_included, wmin[ci], cap[ci], rhs_total);
            if (c.mode == MatchMode::May) {
                m_lo = std::max(0.0, std::min(m_lo, m_lo + m_gain(ci, step.cutoff_rad)));
                s_included += cap[ci];
            }
        }
        step.zone_height_deg = zone_height_for(step.cutoff_rad);
        plan.steps.push_back(step);
    }
    for (auto it = plan.steps.rbegin(); it != plan.steps.rend(); ++it) {
        if (it->mode == MatchMode::Must) {
            it->last_must = true;
            break;
        }
    }

    int p = opts.partitions > 0 ? opts.partitions : std::max(1, 4 * std::max(1, opts.workers));
    plan.partitions = p;
    plan.boundaries =
        partition_boundaries(plan.stats[rq.constraints[plan.driving].source].ra_hist, p);
    return plan;
}

std::string explain_text(const CompiledPlan& plan) {
    const sql::ResolvedQuery& rq = *plan.rq;
    std::ostringstream os;
    auto source_line = [&](int src) {
        const SourceStats& st = plan.stats[src];
        os << st.alias << " = " << rq.sources[src].table->schema().qualified_name()
           << "  est " << fmt("%.0f", st.estimated_rows) << " rows";
        if (st.used_mini) os << "  [mini rate " << format_double(st.rate) << "]";
    };

    if (!rq.has_xmatch) {
        os << "plan: scan ";
        source_line(0);
        os << "\n";
    } else if (plan.empty_result) {
        os << "plan: empty result -- " << plan.empty_reason << "\n";
    } else {
        os << "plan: cross-match " << rq.xmatch_alias << "  limit "
           << format_double(rq.limit) << "  (log " << fmt("%.6f", rq.log_limit) << ")\n";
        os << "  seed " << mode_word(rq.constraints[plan.driving].mode) << " ";
        source_line(rq.constraints[plan.driving].source);
        os << "\n";
        int n = 0;
        for (const MatchStep& step : plan.steps) {
            const sql::ResolvedConstraint& c = rq.constraints[step.constraint];
            os << "  step " << ++n << "  " << mode_word(c.mode) << " ";
            source_line(c.source);
            os << "  radius " << fmt("%.3f", step.cutoff_rad / sphere::kArcsecRad) << "\""
               << "  zone " << fmt("%.3f", step.zone_height_deg * 3600.0) << "\"";
            if (step.last_must) os << "  (evidence cut)";
            os << "\n";
        }
        os << "  partitions " << plan.partitions << "  boundaries";
        for (double b : plan.boundaries) os << " " << fmt("%.6g", b);
        os << "\n";
    }
    for (const std::string& w : plan.warnings) os << "  warning: " << w << "\n";
    return os.str();
}

}  // namespace skyjoin::plan
