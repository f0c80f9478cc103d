#include "skyjoin/executor.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "skyjoin/csv.hpp"
#include "skyjoin/zone_index.hpp"

namespace skyjoin::exec {
namespace {

using plan::CompiledPlan;
using plan::MatchStep;
using plan::WorkingSet;
using sql::MatchMode;
using store::MatchRow;

/// Internal unwind used when the job is being stopped; never escapes run().
struct CancelledSignal {};

struct Shared {
    const CompiledPlan& plan;
    const sql::ResolvedQuery& rq;
    std::string job_id;
    store::StagingRegistry& staging;
    const RunOptions& opts;
    std::vector<std::unique_ptr<zone::ZoneIndex>> index;  // parallel to plan.steps
    std::atomic<bool> stop{false};
};

void maybe_stop(const Shared& sh, std::size_t& ops) {
    if ((++ops & 0xff) == 0 && sh.stop.load(std::memory_order_relaxed))
        throw CancelledSignal{};
}

void step_pause(const Shared& sh, std::size_t& ops) {
    if (sh.opts.hooks.step_delay.count() > 0) {
        auto left = sh.opts.hooks.step_delay;
        const auto slice = std::chrono::milliseconds(5);
        while (left.count() > 0) {
            if (sh.stop.load(std::memory_order_relaxed)) throw CancelledSignal{};
            auto d = std::min(left, slice);
            std::this_thread::sleep_for(d);
            left -= d;
        }
    }
    ops |= 0xff;
    maybe_stop(sh, ops);
}

std::string stage_name(const Shared& sh, int branch, int step) {
    return sh.job_id + "/b" + std::to_string(branch) + "/s" + std::to_string(step);
}

/// True when the detection is already part of the tuple (self-join guard:
/// the same physical table row must not match itself).
bool tuple_contains(const Shared& sh, const MatchRow& m, const store::CatalogTable* table,
                    std::int64_t global) {
    for (std::size_t ci = 0; ci < m.det.size(); ++ci) {
        if (m.det[ci] < 0) continue;
        const auto& src = sh.rq.sources[sh.rq.constraints[ci].source];
        if (src.table.get() == table && m.det[ci] == global) return true;
    }
    return false;
}

bool in_wedge(const std::vector<double>& b, int wedge, double ra_deg) {
    std::size_t n = b.size();
    if (static_cast<std::size_t>(wedge) + 1 < n)
        return ra_deg >= b[wedge] && ra_deg < b[wedge + 1];
    return ra_deg >= b[wedge] || ra_deg < b[0];
}

std::vector<MatchRow> seed_rows(const Shared& sh, int branch, std::size_t& ops) {
    const WorkingSet& ws = sh.plan.working[sh.plan.driving];
    std::vector<MatchRow> out;
    for (std::size_t i = 0; i < ws.rows.size(); ++i) {
        maybe_stop(sh, ops);
        if (!in_wedge(sh.plan.boundaries, branch, ws.sky[i].ra_deg)) continue;
        MatchRow m;
        m.det.assign(sh.rq.constraints.size(), -1);
        m.det[sh.plan.driving] = ws.rows[i];
        m.acc.add(ws.pos[i], bayes::Precision::from_w(ws.w[i]));
        out.push_back(std::move(m));
    }
    return out;
}

void must_step(const Shared& sh, std::size_t step_i, const std::vector<MatchRow>& in,
               std::vector<MatchRow>& out, std::size_t& ops) {
    const MatchStep& st = sh.plan.steps[step_i];
    const WorkingSet& ws = sh.plan.working[st.constraint];
    const zone::ZoneIndex& zi = *sh.index[step_i];
    for (const MatchRow& m : in) {
        maybe_stop(sh, ops);
        sphere::UnitVector bp;
        try {
            bp = bayes::best_position(m.acc);
        } catch (const DegenerateConfiguration&) {
            continue;  // no combined position, nothing can match it
        }
        sphere::SkyCoord bps = sphere::from_unit_vector(bp);
        zi.for_candidates(bps, bp, st.cutoff_rad, [&](std::size_t idx, double) {
            maybe_stop(sh, ops);
            std::int64_t global = ws.rows[idx];
            if (tuple_contains(sh, m, ws.table.get(), global)) return;
            MatchRow nm;
            nm.det = m.det;
            nm.det[st.constraint] = global;
            nm.acc = bayes::accumulate(m.acc, ws.pos[idx],
                                       bayes::Precision::from_w(ws.w[idx]));
            if (st.last_must) {
                double lb;
                try {
                    lb = bayes::log_bayes_factor(nm.acc);
                } catch (const DegenerateConfiguration&) {
                    return;
                }
                if (!(lb >= sh.rq.log_limit)) return;
            }
            out.push_back(std::move(nm));
        });
    }
}

void may_step(const Shared& sh, std::size_t step_i, const std::vector<MatchRow>& in,
              std::vector<MatchRow>& out, std::size_t& ops) {
    const MatchStep& st = sh.plan.steps[step_i];
    const WorkingSet& ws = sh.plan.working[st.constraint];
    const zone::ZoneIndex& zi = *sh.index[step_i];
    for (const MatchRow& m : in) {
        maybe_stop(sh, ops);
        MatchRow nm = m;
        sphere::UnitVector bp;
        bool have_bp = true;
        try {
            bp = bayes::best_position(m.acc);
        } catch (const DegenerateConfiguration&) {
            have_bp = false;
        }
        if (have_bp && st.cutoff_rad > 0.0) {
            sphere::SkyCoord bps = sphere::from_unit_vector(bp);
            std::size_t best_idx = 0;
            bool found = false;
            double best_lb = 0.0;
            bayes::MatchAccumulator best_acc;
            zi.for_candidates(bps, bp, st.cutoff_rad, [&](std::size_t idx, double) {
                maybe_stop(sh, ops);
                std::int64_t global = ws.rows[idx];
                if (tuple_contains(sh, m, ws.table.get(), global)) return;
                bayes::MatchAccumulator acc2 = bayes::accumulate(
                    m.acc, ws.pos[idx], bayes::Precision::from_w(ws.w[idx]));
                double lb;
                try {
                    lb = bayes::log_bayes_factor(acc2);
                } catch (const DegenerateConfiguration&) {
                    return;
                }
                if (!(lb >= sh.rq.log_limit)) return;  // must keep the evidence above the limit
                bool better = !found || lb > best_lb ||
                              (lb == best_lb && ws.table->compare_keys(
                                                    static_cast<std::size_t>(global),
                                                    static_cast<std::size_t>(
                                                        ws.rows[best_idx])) < 0);
                if (better) {
                    found = true;
                    best_idx = idx;
                    best_lb = lb;
                    best_acc = acc2;
                }
            });
            if (found) {
                nm.det[st.constraint] = ws.rows[best_idx];
                nm.acc = best_acc;
            }
        }
        out.push_back(std::move(nm));
    }
}

void not_step(const Shared& sh, std::size_t step_i, const std::vector<MatchRow>& in,
              std::vector<MatchRow>& out, std::size_t& ops) {
    const MatchStep& st = sh.plan.steps[step_i];
    const WorkingSet& ws = sh.plan.working[st.constraint];
    const zone::ZoneIndex& zi = *sh.index[step_i];
    const auto& footprint = ws.table->schema().footprint;
    for (const MatchRow& m : in) {
        maybe_stop(sh, ops);
        sphere::UnitVector bp;
        try {
            bp = bayes::best_position(m.acc);
        } catch (const DegenerateConfiguration&) {
            out.push_back(m);
            continue;
        }
        // absence is only claimable where the catalog actually looked
        if (footprint && !sphere::region_contains(*footprint, bp)) continue;
        bool blocked = false;
        if (st.cutoff_rad > 0.0) {
            sphere::SkyCoord bps = sphere::from_unit_vector(bp);
            zi.for_candidates(bps, bp, st.cutoff_rad, [&](std::size_t idx, double) {
                if (blocked) return;
                maybe_stop(sh, ops);
                std::int64_t global = ws.rows[idx];
                if (tuple_contains(sh, m, ws.table.get(), global)) return;
                bayes::MatchAccumulator acc2 = bayes::accumulate(
                    m.acc, ws.pos[idx], bayes::Precision::from_w(ws.w[idx]));
                double lb;
                try {
                    lb = bayes::log_bayes_factor(acc2);
                } catch (const DegenerateConfiguration&) {
                    return;
                }
                if (lb >= sh.rq.log_limit) blocked = true;
            });
        }
        if (!blocked) out.push_back(m);
    }
}

std::vector<std::vector<Value>> project(const Shared& sh, const std::vector<MatchRow>& rows,
                                        std::size_t& ops) {
    std::vector<std::vector<Value>> out;
    std::vector<std::int64_t> row_buf(sh.rq.sources.size(), -1);
    sql::EvalScope scope;
    scope.sources = &sh.rq.sources;
    scope.rows = row_buf.data();
    for (const MatchRow& m : rows) {
        maybe_stop(sh, ops);
        for (std::size_t s = 0; s < sh.rq.sources.size(); ++s) {
            int ci = sh.rq.sources[s].constraint;
            row_buf[s] = ci >= 0 ? m.det[static_cast<std::size_t>(ci)] : -1;
        }
        scope.has_virtuals = true;
        try {
            sphere::UnitVector bp = bayes::best_position(m.acc);
            sphere::SkyCoord bps = sphere::from_unit_vector(bp);
            scope.ra_deg = bps.ra_deg;
            scope.dec_deg = bps.dec_deg;
            scope.log_bf = bayes::log_bayes_factor(m.acc);
        } catch (const DegenerateConfiguration&) {
            continue;
        }
        if (sh.rq.residual && !sql::eval_predicate(*sh.rq.residual, scope)) continue;
        std::vector<Value> cells;
        cells.reserve(sh.rq.select.size());
        for (const auto& item : sh.rq.select) cells.push_back(sql::eval(*item.expr, scope));
        out.push_back(std::move(cells));
    }
    return out;
}

/// Single-source query without a cross-match: filter, project.
std::vector<std::vector<Value>> scan_rows(const Shared& sh, std::size_t& ops) {
    const store::CatalogTable& t = *sh.rq.sources[0].table;
    std::vector<std::vector<Value>> out;
    std::vector<std::int64_t> row_buf(1, -1);
    sql::EvalScope scope;
    scope.sources = &sh.rq.sources;
    scope.rows = row_buf.data();
    for (std::size_t i = 0; i < t.row_count(); ++i) {
        maybe_stop(sh, ops);
        if (sh.rq.region && !sphere::region_contains(*sh.rq.region, t.position(i))) continue;
        row_buf[0] = static_cast<std::int64_t>(i);
        if (sh.rq.pushdown[0] && !sql::eval_predicate(*sh.rq.pushdown[0], scope)) continue;
        if (sh.rq.residual && !sql::eval_predicate(*sh.rq.residual, scope)) continue;
        std::vector<Value> cells;
        cells.reserve(sh.rq.select.size());
        for (const auto& item : sh.rq.select) cells.push_back(sql::eval(*item.expr, scope));
        out.push_back(std::move(cells));
    }
    return out;
}

std::vector<std::vector<Value>> run_branch(Shared& sh, int branch) {
    std::size_t ops = 0;
    if (!sh.rq.has_xmatch) {
        step_pause(sh, ops);
        return scan_rows(sh, ops);
    }
    // a failed attempt must leave no staging behind, or its retry would
    // collide with the leftover names
    struct DropBranchStaging {
        store::StagingRegistry& staging;
        std::string prefix;
        ~DropBranchStaging() { staging.drop_prefix(prefix); }
    } cleanup{sh.staging, sh.job_id + "/b" + std::to_string(branch) + "/"};
    auto cur = sh.staging.create(stage_name(sh, branch, 0));
    cur->rows = seed_rows(sh, branch, ops);
    step_pause(sh, ops);
    for (std::size_t k = 0; k < sh.plan.steps.size(); ++k) {
        auto next = sh.staging.create(stage_name(sh, branch, static_cast<int>(k) + 1));
        switch (sh.plan.steps[k].mode) {
            case MatchMode::Must: must_step(sh, k, cur->rows, next->rows, ops); break;
            case MatchMode::May: may_step(sh, k, cur->rows, next->rows, ops); break;
            case MatchMode::Not: not_step(sh, k, cur->rows, next->rows, ops); break;
        }
        sh.staging.drop(cur->name);
        cur = next;
        step_pause(sh, ops);
    }
    auto out = project(sh, cur->rows, ops);
    sh.staging.drop(cur->name);
    return out;
}

csv::Field value_field(const Value& v) {
    csv::Field f;
    if (v.is_null()) return f;
    if (v.is_int()) {
        f.text = format_int(v.as_int());
    } else if (v.is_real()) {
        f.text = format_double(v.as_real());
    } else if (v.is_bool()) {
        f.text = v.as_bool() ? "true" : "false";
    } else {
        f.text = v.as_text();
        f.quoted = f.text.empty();
    }
    return f;
}

}  // namespace

void write_result_csv(const ResultTable& t, std::ostream& out, bool sort_rows) {
    csv::Writer w(out);
    std::vector<csv::Field> header;
    for (const auto& name : t.names) header.push_back(csv::Field{name, false, 0, 0});
    w.write(header);

    std::vector<std::vector<csv::Field>> formatted;
    formatted.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        std::vector<csv::Field> fields;
        fields.reserve(row.size());
        for (const Value& v : row) fields.push_back(value_field(v));
        formatted.push_back(std::move(fields));
    }
    if (sort_rows) {
        std::sort(formatted.begin(), formatted.end(),
                  [](const std::vector<csv::Field>& a, const std::vector<csv::Field>& b) {
                      for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
                          if (a[i].text != b[i].text) return a[i].text < b[i].text;
                      }
                      return a.size() < b.size();
                  });
    }
    for (const auto& fields : formatted) w.write(fields);
}

ResultTable run(const CompiledPlan& plan, const std::string& job_id,
                store::StagingRegistry& staging, const RunOptions& opts, RunReport* report) {
    ResultTable out;
    for (const auto& item : plan.rq->select) out.names.push_back(item.name);
    if (plan.empty_result) return out;

    Shared sh{plan, *plan.rq, job_id, staging, opts};
    sh.index.resize(plan.steps.size());
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        const WorkingSet& ws = plan.working[plan.steps[k].constraint];
        sh.index[k] = std::make_unique<zone::ZoneIndex>(ws.sky, ws.pos,
                                                        plan.steps[k].zone_height_deg);
    }

    struct DropStaging {
        store::StagingRegistry& staging;
        std::string prefix;
        ~DropStaging() { staging.drop_prefix(prefix); }
    } cleanup{staging, job_id + "/"};

    const int branches = plan.partitions;
    const int workers = std::max(1, opts.workers);

    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::deque<int>> queues(static_cast<std::size_t>(workers));
    for (int b = 0; b < branches; ++b) queues[static_cast<std::size_t>(b % workers)].push_back(b);
    std::vector<std::vector<std::vector<Value>>> results(static_cast<std::size_t>(branches));
    std::vector<BranchReport> reports(static_cast<std::size_t>(branches));
    std::vector<int> attempts(static_cast<std::size_t>(branches), 0);
    int remaining = branches;
    std::exception_ptr first_error;

    auto worker_fn = [&](int id) {
        for (;;) {
            int b = -1;
            int attempt = 0;
            {
                std::unique_lock<std::mutex> lk(mu);
                cv.wait(lk, [&] {
                    return sh.stop.load() || remaining == 0 ||
                           !queues[static_cast<std::size_t>(id)].empty();
                });
                if (sh.stop.load() || remaining == 0) return;
                b = queues[static_cast<std::size_t>(id)].front();
                queues[static_cast<std::size_t>(id)].pop_front();
                attempt = ++attempts[static_cast<std::size_t>(b)];
            }
            try {
                if (opts.hooks.on_branch_start) opts.hooks.on_branch_start(b, attempt, id);
                auto rows = run_branch(sh, b);
                std::lock_guard<std::mutex> lk(mu);
                reports[static_cast<std::size_t>(b)] =
                    BranchReport{b, attempt, id, rows.size()};
                results[static_cast<std::size_t>(b)] = std::move(rows);
                if (--remaining == 0) cv.notify_all();
            } catch (const CancelledSignal&) {
                return;
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (attempt > opts.max_retries) {
                    if (!first_error) first_error = std::current_exception();
                    sh.stop.store(true);
                    cv.notify_all();
                    return;
                }
                queues[static_cast<std::size_t>((id + 1) % workers)].push_back(b);
                cv.notify_all();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int id = 0; id < workers; ++id) pool.emplace_back(worker_fn, id);

    const bool has_deadline = opts.timeout.count() > 0;
    const auto deadline = std::chrono::steady_clock::now() + opts.timeout;
    int stop_why = 0;  // 1 = timeout, 2 = cancelled
    {
        std::unique_lock<std::mutex> lk(mu);
        for (;;) {
            if (remaining == 0 || first_error) break;
            if (has_deadline && std::chrono::steady_clock::now() >= deadline) {
                stop_why = 1;
                break;
            }
            lk.unlock();
            bool want_cancel = opts.cancelled && opts.cancelled();
            lk.lock();
            if (want_cancel) {
                stop_why = 2;
                break;
            }
            cv.wait_for(lk, std::chrono::milliseconds(20));
        }
        if (stop_why != 0) sh.stop.store(true);
        cv.notify_all();
    }
    for (auto& th : pool) th.join();

    if (stop_why == 1)
        throw EngineError(ErrorCode::JobTimedOut,
                          "job " + job_id + " exceeded its time limit");
    if (stop_why == 2)
        throw EngineError(ErrorCode::JobCancelled, "job " + job_id + " was cancelled");
    if (first_error) std::rethrow_exception(first_error);

    for (int b = 0; b < branches; ++b) {
        auto& rows = results[static_cast<std::size_t>(b)];
        for (auto& r : rows) out.rows.push_back(std::move(r));
    }
    if (report) report->branches = reports;
    return out;
}

}  // namespace skyjoin::exec
