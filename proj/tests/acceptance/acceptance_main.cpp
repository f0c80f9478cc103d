// Eight acceptance gates, one pass/fail line each.  Exit code = failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <variant>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common/fixtures.hpp"
#include "common/oracle.hpp"
#include "common/quadrature.hpp"
#include "skyjoin/bayes.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/executor.hpp"
#include "skyjoin/geometry.hpp"
#include "skyjoin/planner.hpp"
#include "skyjoin/query.hpp"
#include "skyjoin/resolve.hpp"
#include "skyjoin/store.hpp"
#include "skyjoin/zone_index.hpp"

using namespace skyjoin;
using skyjoin::testsupport::BruteCatalog;
using skyjoin::testsupport::BruteTuple;
using skyjoin::testsupport::SkyRng;
using skyjoin::testsupport::ingest_from_string;
using skyjoin::testsupport::simple_schema;

namespace {

constexpr double kArcsecRad = sphere::kRadPerDeg / 3600.0;

struct Ctx {
    int failures = 0;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            std::cerr << "    check failed: " << what << "\n";
        }
    }
};

/// The flagship three-catalog query, verbatim.
const char* kQuery1 =
    "SELECT x.RA, x.Dec,\n"
    "       s.ObjID, s.RA, s.Dec, s.mag_g, s.mag_r, s.mag_i,\n"
    "       g.ObjID, g.RA, g.Dec, g.mag_nuv, g.mag_fuv,\n"
    "       t.ObjID, t.RA, t.Dec, t.mag_J, t.mag_H, t.mag_K\n"
    "INTO   MyDB:NewResults\n"
    "FROM   SDSS:PhotoObjAll AS s\n"
    "       CROSS JOIN GALEX:PhotoObjAll AS g\n"
    "       CROSS JOIN TwoMASS:PhotoXSC AS t\n"
    "WHERE  s.Galaxy = 1\n"
    "XMATCH BAYESIAN AS x\n"
    "       MUST s ON POINT(s.Cx, s.Cy, s.Cz), 0.1\n"
    "       MUST g ON POINT(g.Ra, g.Dec), 0.2\n"
    "       MAY  t ON POINT(t.Ra, t.Dec), 0.5\n"
    "       HAVING LIMIT 1e6\n"
    "REGION CIRCLE J2000 180 0 60\n";

sphere::UnitVector circle_point(double psi_rad) {
    return sphere::UnitVector{std::cos(psi_rad), std::sin(psi_rad), 0.0};
}

double engine_log_bf(const std::vector<double>& sigma_rad,
                     const std::vector<sphere::UnitVector>& xs) {
    bayes::MatchAccumulator acc;
    for (std::size_t i = 0; i < xs.size(); ++i)
        acc = bayes::accumulate(acc, xs[i], bayes::Precision::from_sigma_rad(sigma_rad[i]));
    return bayes::log_bayes_factor(acc);
}

// --- shared plan/run/oracle plumbing -------------------------------------

std::shared_ptr<const sql::ResolvedQuery> bind(const store::CatalogRegistry& reg,
                                               const std::string& text) {
    return std::make_shared<const sql::ResolvedQuery>(sql::resolve(sql::parse(text), reg));
}

plan::CompiledPlan make_plan(const store::CatalogRegistry& reg, const std::string& text,
                             int partitions, int workers) {
    plan::PlanOptions opts;
    opts.partitions = partitions;
    opts.workers = workers;
    return plan::compile(bind(reg, text), reg, opts);
}

exec::ResultTable run_plan(const plan::CompiledPlan& p, int workers,
                           const exec::RunOptions* custom = nullptr) {
    store::StagingRegistry staging;
    exec::RunOptions opts;
    if (custom) opts = *custom;
    opts.workers = workers;
    return exec::run(p, "job-acc", staging, opts);
}

std::vector<BruteCatalog> brute_from_plan(const plan::CompiledPlan& p) {
    std::vector<BruteCatalog> cats(p.working.size());
    for (std::size_t ci = 0; ci < p.working.size(); ++ci) {
        const plan::WorkingSet& ws = p.working[ci];
        BruteCatalog& c = cats[ci];
        c.mode = p.rq->constraints[ci].mode;
        c.pos = ws.pos;
        c.w = ws.w;
        c.table_id = ws.table.get();
        int kcol = ws.table->column_index("ObjID");
        for (std::int64_t r : ws.rows)
            c.key.push_back(ws.table->column(std::size_t(kcol)).int_at(std::size_t(r)));
        if (c.mode == sql::MatchMode::Not && ws.table->schema().footprint)
            c.footprint = &*ws.table->schema().footprint;
    }
    return cats;
}

std::vector<int> order_of(const plan::CompiledPlan& p) {
    std::vector<int> order{p.driving};
    for (const auto& st : p.steps) order.push_back(st.constraint);
    return order;
}

std::string sorted_csv(const exec::ResultTable& t) {
    std::ostringstream os;
    exec::write_result_csv(t, os, true);
    return os.str();
}

// --- the synthetic three-survey field for criteria 4-6 --------------------

struct Survey {
    store::CatalogRegistry reg;
    int planted_sdss = 0, planted_galex = 0, planted_twomass = 0;
};

Survey make_survey() {
    Survey sv;
    SkyRng rng(31);
    const sphere::UnitVector center = sphere::to_unit_vector({180.0, 0.0});
    const double field_rad = 1.0 * sphere::kRadPerDeg;

    std::ostringstream s, g, t;
    s.precision(17);
    g.precision(17);
    t.precision(17);
    s << "ObjID,RA,Dec,Cx,Cy,Cz,Galaxy,mag_g,mag_r,mag_i\n";
    g << "ObjID,RA,Dec,mag_nuv,mag_fuv\n";
    t << "ObjID,RA,Dec,mag_J,mag_H,mag_K\n";

    auto sdss_row = [&](std::int64_t id, const sphere::UnitVector& v, int galaxy) {
        sphere::SkyCoord sc = sphere::from_unit_vector(v);
        s << id << ',' << sc.ra_deg << ',' << sc.dec_deg << ',' << v.x << ',' << v.y << ','
          << v.z << ',' << galaxy << ',' << rng.uniform(14, 23) << ','
          << rng.uniform(14, 23) << ',' << rng.uniform(14, 23) << '\n';
    };
    auto galex_row = [&](std::int64_t id, const sphere::UnitVector& v) {
        sphere::SkyCoord sc = sphere::from_unit_vector(v);
        g << id << ',' << sc.ra_deg << ',' << sc.dec_deg << ',' << rng.uniform(16, 25) << ','
          << rng.uniform(16, 25) << '\n';
    };
    auto twomass_row = [&](std::int64_t id, const sphere::UnitVector& v) {
        sphere::SkyCoord sc = sphere::from_unit_vector(v);
        t << id << ',' << sc.ra_deg << ',' << sc.dec_deg << ',' << rng.uniform(10, 18) << ','
          << rng.uniform(10, 18) << ',' << rng.uniform(10, 18) << '\n';
    };

    for (int i = 0; i < 400; ++i) {
        sphere::UnitVector truth = rng.near(center, field_rad);
        int galaxy = (i % 5 == 4) ? 0 : 1;
        sdss_row(1000 + i, rng.near(truth, 0.2 * kArcsecRad), galaxy);
        sv.planted_sdss++;
        if (rng.u01() < 0.85) {
            galex_row(2000 + i, rng.near(truth, 0.4 * kArcsecRad));
            sv.planted_galex++;
        }
        if (rng.u01() < 0.70) {
            twomass_row(3000 + i, rng.near(truth, 1.0 * kArcsecRad));
            sv.planted_twomass++;
        }
    }
    for (int i = 0; i < 600; ++i)
        sdss_row(9100000 + i, rng.near(center, 1.4 * sphere::kRadPerDeg),
                 rng.u01() < 0.5 ? 1 : 0);
    for (int i = 0; i < 500; ++i)
        galex_row(9200000 + i, rng.near(center, 1.4 * sphere::kRadPerDeg));
    for (int i = 0; i < 500; ++i)
        twomass_row(9300000 + i, rng.near(center, 1.4 * sphere::kRadPerDeg));

    using store::ColumnSpec;
    using skyjoin::ColumnType;
    sv.reg.put(ingest_from_string(
        simple_schema("SDSS", "PhotoObjAll",
                      {ColumnSpec{"Cx", ColumnType::Float64}, ColumnSpec{"Cy", ColumnType::Float64},
                       ColumnSpec{"Cz", ColumnType::Float64}, ColumnSpec{"Galaxy", ColumnType::Int64},
                       ColumnSpec{"mag_g", ColumnType::Float64}, ColumnSpec{"mag_r", ColumnType::Float64},
                       ColumnSpec{"mag_i", ColumnType::Float64}}),
        s.str()));
    sv.reg.put(ingest_from_string(
        simple_schema("GALEX", "PhotoObjAll",
                      {ColumnSpec{"mag_nuv", ColumnType::Float64},
                       ColumnSpec{"mag_fuv", ColumnType::Float64}}),
        g.str()));
    sv.reg.put(ingest_from_string(
        simple_schema("TwoMASS", "PhotoXSC",
                      {ColumnSpec{"mag_J", ColumnType::Float64},
                       ColumnSpec{"mag_H", ColumnType::Float64},
                       ColumnSpec{"mag_K", ColumnType::Float64}}),
        t.str()));
    return sv;
}

struct KeyedRow {
    std::vector<std::int64_t> keys;
    double lb = 0.0;

    bool operator<(const KeyedRow& o) const { return keys < o.keys; }
    bool operator==(const KeyedRow& o) const { return keys == o.keys; }
};

std::vector<KeyedRow> oracle_rows(const plan::CompiledPlan& p) {
    auto tuples =
        testsupport::brute_force_match(brute_from_plan(p), order_of(p), p.rq->log_limit);
    std::vector<KeyedRow> out;
    for (const auto& tp : tuples) {
        KeyedRow k;
        for (std::size_t ci = 0; ci < tp.key.size(); ++ci)
            if (p.rq->constraints[ci].mode != sql::MatchMode::Not) k.keys.push_back(tp.key[ci]);
        k.lb = tp.log_bf;
        out.push_back(std::move(k));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// --- criteria --------------------------------------------------------------

void criterion_evidence_vs_quadrature(Ctx& ctx) {
    const double deg = sphere::kRadPerDeg;
    for (double s2 : {2.0, 5.0}) {
        for (double psi_deg : {0.0, 1.0, 3.0, 8.0}) {
            std::vector<double> sig{2.0 * deg, s2 * deg};
            std::vector<sphere::UnitVector> xs{circle_point(0.0), circle_point(psi_deg * deg)};
            double lb = engine_log_bf(sig, xs);
            double quad = testsupport::quadrature_log_bf(sig, xs);
            ctx.expect(std::fabs(std::expm1(lb - quad)) <= 0.01,
                       "two detections, sigma2=" + std::to_string(s2) +
                           " deg, psi=" + std::to_string(psi_deg) + " deg");
        }
    }
    for (double spread_deg : {1.5, 4.0}) {
        std::vector<double> sig{2.0 * deg, 3.0 * deg, 5.0 * deg};
        double r = spread_deg * deg;
        std::vector<sphere::UnitVector> xs{
            circle_point(0.0), circle_point(r),
            sphere::UnitVector::of(std::cos(0.5 * r) * std::cos(0.8 * r),
                                   std::sin(0.5 * r) * std::cos(0.8 * r), std::sin(0.8 * r))};
        double lb = engine_log_bf(sig, xs);
        double quad = testsupport::quadrature_log_bf(sig, xs);
        ctx.expect(std::fabs(std::expm1(lb - quad)) <= 0.01,
                   "three detections, spread=" + std::to_string(spread_deg) + " deg");
    }
}

void criterion_gaussian_limit(Ctx& ctx) {
    int checked = 0;
    for (int i = 0; i < 10; ++i) {
        double sigma_as = 0.01 * std::pow(100.0, i / 9.0);  // 0.01" .. 1"
        double sigma = sigma_as * kArcsecRad;
        for (int k = 0; k < 10; ++k) {
            double psi = k * sigma;
            std::vector<double> sig{sigma, sigma};
            std::vector<sphere::UnitVector> xs{circle_point(0.0), circle_point(psi)};
            double lb = engine_log_bf(sig, xs);
            double gauss = bayes::gaussian_limit_log_bf(sig, xs);
            ctx.expect(std::fabs(lb - gauss) <= 1e-6 * std::fabs(gauss),
                       "sigma=" + std::to_string(sigma_as) + "\" k=" + std::to_string(k));
            ++checked;
        }
    }
    ctx.expect(checked == 100, "grid size");
}

void criterion_zone_exactness(Ctx& ctx) {
    SkyRng rng(57);
    const sphere::UnitVector cluster = sphere::to_unit_vector({30.0, 10.0});
    const sphere::UnitVector polar = sphere::to_unit_vector({0.0, 88.5});

    std::vector<std::vector<sphere::UnitVector>> cats(3);
    for (int i = 0; i < 1000; ++i) cats[0].push_back(rng.near(cluster, 5.0 * sphere::kRadPerDeg));
    for (int i = 0; i < 1000; ++i) cats[1].push_back(rng.direction());
    for (int i = 0; i < 950; ++i)
        cats[2].push_back(i % 2 == 0 ? rng.near(polar, 3.0 * sphere::kRadPerDeg)
                                     : rng.direction());
    // planted close pairs so the arcsecond cutoffs are not trivially empty
    for (int i = 0; i < 50; ++i)
        cats[2].push_back(rng.near(cats[0][std::size_t(i * 7)], 0.5 * kArcsecRad));

    const double cutoffs[] = {1.0 * kArcsecRad, 10.0 * kArcsecRad, 1.0 * sphere::kRadPerDeg};
    const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
    for (auto [a, b] : pairs) {
        std::vector<sphere::SkyCoord> sky_b;
        for (const auto& v : cats[std::size_t(b)]) sky_b.push_back(sphere::from_unit_vector(v));
        for (double theta : cutoffs) {
            double h = std::clamp(theta * sphere::kDegPerRad, 1.0 / 3600.0, 1.0);
            zone::ZoneIndex zi(sky_b, cats[std::size_t(b)], h);
            std::set<std::pair<int, int>> zoned;
            for (std::size_t i = 0; i < cats[std::size_t(a)].size(); ++i) {
                sphere::SkyCoord sc = sphere::from_unit_vector(cats[std::size_t(a)][i]);
                zi.for_candidates(sc, cats[std::size_t(a)][i], theta,
                                  [&](std::size_t j, double) {
                                      zoned.emplace(int(i), int(j));
                                  });
            }
            std::set<std::pair<int, int>> brute;
            for (std::size_t i = 0; i < cats[std::size_t(a)].size(); ++i)
                for (std::size_t j = 0; j < cats[std::size_t(b)].size(); ++j)
                    if (sphere::angular_distance(cats[std::size_t(a)][i],
                                                 cats[std::size_t(b)][j]) <= theta)
                        brute.emplace(int(i), int(j));
            ctx.expect(zoned == brute,
                       "catalogs (" + std::to_string(a) + "," + std::to_string(b) +
                           ") cutoff " + std::to_string(theta * sphere::kDegPerRad) + " deg");
        }
    }
}

void criterion_oracle_equivalence(Ctx& ctx) {
    Survey sv = make_survey();
    auto p = make_plan(sv.reg, kQuery1, 4, 2);
    ctx.expect(!p.empty_result, "plan is non-empty");
    auto t = run_plan(p, 2);

    // key tuples from the verbatim select list: ObjID sits at 2, 8 and 13
    std::vector<KeyedRow> got;
    for (const auto& row : t.rows) {
        KeyedRow k;
        for (std::size_t idx : {std::size_t{2}, std::size_t{8}, std::size_t{13}})
            k.keys.push_back(row[idx].is_null() ? -1 : row[idx].as_int());
        got.push_back(std::move(k));
    }
    std::sort(got.begin(), got.end());

    auto want = oracle_rows(p);
    ctx.expect(got.size() == want.size(),
               "row count: engine " + std::to_string(got.size()) + " vs oracle " +
                   std::to_string(want.size()));
    ctx.expect(got.size() >= 50, "at least 50 matched tuples");
    if (got.size() == want.size()) {
        bool all = true;
        for (std::size_t i = 0; i < got.size(); ++i) all = all && got[i] == want[i];
        ctx.expect(all, "key tuples equal the brute-force reference");
    }

    std::size_t got_nulls = 0, want_nulls = 0;
    for (const auto& r : got) got_nulls += (r.keys[2] < 0);
    for (const auto& r : want) want_nulls += (r.keys[2] < 0);
    ctx.expect(got_nulls == want_nulls, "MAY null counts agree");
    ctx.expect(got_nulls > 0, "planted drop-outs produce NULL keys");

    // second pass with the virtuals exposed: BF within 1e-9 relative
    std::string with_bf = std::string("SELECT s.ObjID, g.ObjID, t.ObjID, x.BF, x.logBF\n") +
                          std::string(kQuery1).substr(std::string(kQuery1).find("FROM"));
    auto p2 = make_plan(sv.reg, with_bf, 4, 2);
    auto t2 = run_plan(p2, 2);
    std::vector<KeyedRow> got2;
    bool bf_consistent = true;
    for (const auto& row : t2.rows) {
        KeyedRow k;
        for (std::size_t idx : {std::size_t{0}, std::size_t{1}, std::size_t{2}})
            k.keys.push_back(row[idx].is_null() ? -1 : row[idx].as_int());
        double bf = row[3].as_real();
        double lb = row[4].as_real();
        bf_consistent = bf_consistent && std::fabs(bf - std::exp(lb)) <= 1e-12 * bf;
        k.lb = lb;
        got2.push_back(std::move(k));
    }
    ctx.expect(bf_consistent, "BF equals exp(logBF)");
    std::sort(got2.begin(), got2.end());
    ctx.expect(got2.size() == want.size(), "BF pass row count");
    if (got2.size() == want.size()) {
        bool ok = true;
        for (std::size_t i = 0; i < got2.size(); ++i) {
            ok = ok && got2[i] == want[i] &&
                 std::fabs(std::expm1(got2[i].lb - want[i].lb)) <= 1e-9;
        }
        ctx.expect(ok, "Bayes factors within 1e-9 relative of the reference");
    }
}

void criterion_partition_invariance(Ctx& ctx) {
    Survey sv = make_survey();
    std::string baseline;
    for (int parts : {1, 2, 4, 8}) {
        for (int workers : {1, 2, 4}) {
            auto p = make_plan(sv.reg, kQuery1, parts, workers);
            std::string csv = sorted_csv(run_plan(p, workers));
            if (baseline.empty()) baseline = csv;
            ctx.expect(csv == baseline, "partitions=" + std::to_string(parts) +
                                            " workers=" + std::to_string(workers));
        }
    }
    ctx.expect(!baseline.empty() && baseline.find('\n') != baseline.rfind('\n'),
               "result has rows");
}

void criterion_fault_tolerance(Ctx& ctx) {
    Survey sv = make_survey();
    auto p = make_plan(sv.reg, kQuery1, 4, 2);
    std::string baseline = sorted_csv(run_plan(p, 2));

    exec::RunOptions once;
    once.max_retries = 1;
    once.hooks.on_branch_start = [](int b, int attempt, int) {
        if (b == 2 && attempt == 1) throw StepError("injected fault");
    };
    store::StagingRegistry staging1;
    exec::RunOptions o1 = once;
    o1.workers = 2;
    auto healed = exec::run(p, "job-acc", staging1, o1);
    ctx.expect(sorted_csv(healed) == baseline, "retried run equals the fault-free output");
    ctx.expect(staging1.count() == 0, "staging empty after the retried run");

    exec::RunOptions never;
    never.workers = 2;
    never.max_retries = 0;
    never.hooks.on_branch_start = [](int b, int, int) {
        if (b == 2) throw StepError("injected fault");
    };
    store::StagingRegistry staging2;
    bool threw = false;
    try {
        exec::run(p, "job-acc", staging2, never);
    } catch (const StepError&) {
        threw = true;
    }
    ctx.expect(threw, "zero retries surface the failure");
    ctx.expect(staging2.count() == 0, "staging empty after the failed run");
}

void criterion_sampling(Ctx& ctx) {
    std::ostringstream os;
    os.precision(17);
    os << "ObjID,RA,Dec\n";
    SkyRng rng(99);
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        sphere::SkyCoord sc = sphere::from_unit_vector(rng.direction());
        os << i << ',' << sc.ra_deg << ',' << sc.dec_deg << '\n';
    }
    store::TablePtr table = ingest_from_string(simple_schema("big", "T"), os.str());
    ctx.expect(table->row_count() == std::size_t(n), "ingested 1e6 rows");

    store::MiniCatalog mini = store::sample_mini(table, 1e-3, 424242);
    double expectation = n * 1e-3;
    double five_sigma = 5.0 * std::sqrt(n * 1e-3 * (1.0 - 1e-3));
    double count = double(mini.table->row_count());
    ctx.expect(std::fabs(count - expectation) <= five_sigma,
               "sampled count " + std::to_string(std::size_t(count)) + " within 5 sigma of 1000");

    store::MiniCatalog again = store::sample_mini(table, 1e-3, 424242);
    ctx.expect(again.table->row_count() == mini.table->row_count(), "same seed, same rows");

    testsupport::TempDir tmp;
    std::string base1 = tmp.path + "/m1", base2 = tmp.path + "/m2";
    store::save_mini(mini, base1 + ".csv", base1 + ".meta");
    store::save_mini(again, base2 + ".csv", base2 + ".meta");
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    ctx.expect(!slurp(base1 + ".csv").empty(), "mini csv written");
    ctx.expect(slurp(base1 + ".csv") == slurp(base2 + ".csv"), "byte-identical mini csv");
    ctx.expect(slurp(base1 + ".meta") == slurp(base2 + ".meta"), "byte-identical mini meta");
}

void criterion_parser_goldens(Ctx& ctx) {
    sql::Query q = sql::parse(kQuery1);
    ctx.expect(q.select.size() == 19, "19 output columns");
    ctx.expect(q.into && q.into->dataset == "MyDB" && q.into->table == "NewResults", "INTO");
    ctx.expect(q.sources.size() == 3, "three sources");
    if (q.sources.size() == 3) {
        ctx.expect(q.sources[0].dataset == "SDSS" && q.sources[0].table == "PhotoObjAll" &&
                       q.sources[0].alias == "s",
                   "first source");
        ctx.expect(q.sources[2].dataset == "TwoMASS" && q.sources[2].alias == "t",
                   "third source");
    }
    ctx.expect(q.where != nullptr, "WHERE present");
    ctx.expect(q.xmatch.has_value(), "XMATCH present");
    if (q.xmatch) {
        const auto& x = *q.xmatch;
        ctx.expect(x.alias == "x", "xmatch alias");
        ctx.expect(x.limit == 1e6, "limit 1e6");
        ctx.expect(x.constraints.size() == 3, "three constraints");
        if (x.constraints.size() == 3) {
            auto sigma_lit = [](const sql::ExprPtr& e) {
                const auto* n = std::get_if<sql::NumberLit>(&e->node);
                return n ? n->value : -1.0;
            };
            ctx.expect(x.constraints[0].mode == sql::MatchMode::Must &&
                           x.constraints[0].alias == "s" && x.constraints[0].point.size() == 3 &&
                           sigma_lit(x.constraints[0].sigma) == 0.1,
                       "MUST s via cartesian point, sigma 0.1");
            ctx.expect(x.constraints[1].mode == sql::MatchMode::Must &&
                           x.constraints[1].point.size() == 2 &&
                           sigma_lit(x.constraints[1].sigma) == 0.2,
                       "MUST g, sigma 0.2");
            ctx.expect(x.constraints[2].mode == sql::MatchMode::May &&
                           sigma_lit(x.constraints[2].sigma) == 0.5,
                       "MAY t, sigma 0.5");
        }
    }
    ctx.expect(q.region && q.region->ra_deg == 180.0 && q.region->dec_deg == 0.0 &&
                   q.region->radius_arcmin == 60.0,
               "REGION circle");

    // pretty-print fixpoint
    std::string once = sql::print(q);
    std::string twice = sql::print(sql::parse(once));
    ctx.expect(once == twice, "print/parse fixpoint");

    const char* malformed[] = {
        "",
        "SELECT",
        "SELECT FROM a:b AS t",
        "SELECT t.x a:b AS t",
        "SELECT t.x FROM a:b",
        "SELECT t.x FROM a:b AS",
        "SELECT t.x FROM a:b AS t WHERE",
        "SELECT t.x, FROM a:b AS t",
        "SELECT t.x FROM a:b AS t\nXMATCH BAYESIAN AS x\nHAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t\nXMATCH BAYESIAN AS x\n"
        "MUST t ON POINT(t.RA, t.Dec), 0.1\nHAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS x\n"
        "MAY t ON POINT(t.RA, t.Dec), 0.1\nMAY u ON POINT(u.RA, u.Dec), 0.1\n"
        "HAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS x\n"
        "MUST t ON POINT(t.RA, t.Dec), 0.1\nMUST t ON POINT(t.RA, t.Dec), 0.2\n"
        "HAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS x\n"
        "MUST t ON POINT(t.RA), 0.1\nMUST u ON POINT(u.RA, u.Dec), 0.1\nHAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS x\n"
        "MUST t ON POINT(t.A, t.B, t.C, t.D), 0.1\nMUST u ON POINT(u.RA, u.Dec), 0.1\n"
        "HAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS x\n"
        "MUST t ON POINT(t.RA, t.Dec), 0.1\nMUST u ON POINT(u.RA, u.Dec), 0.1\n"
        "HAVING LIMIT 0",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS x\n"
        "MUST t ON POINT(t.RA, t.Dec), 0.1\nMUST u ON POINT(u.RA, u.Dec), 0.1\n"
        "HAVING LIMIT -3",
        "SELECT t.x FROM a:b AS t CROSS JOIN a:c AS u\nXMATCH BAYESIAN AS t\n"
        "MUST t ON POINT(t.RA, t.Dec), 0.1\nMUST u ON POINT(u.RA, u.Dec), 0.1\n"
        "HAVING LIMIT 2",
        "SELECT t.x FROM a:b AS t REGION CIRCLE J2000 1 2",
        "SELECT t.x FROM a:b AS t REGION CIRCLE 1 2 3",
        "SELECT t.x FROM a:b AS t REGION CIRCLE J2000 1 2 3 4",
    };
    int caught = 0, deep = 0;
    for (const char* text : malformed) {
        try {
            sql::parse(text);
        } catch (const SyntaxError& e) {
            ++caught;
            if (e.pos().line >= 1 && e.pos().col >= 1) {
                if (e.pos().line > 1) ++deep;
            } else {
                ctx.expect(false, std::string("position missing for: ") + text);
            }
        } catch (const LexError&) {
            ctx.expect(false, std::string("lexer, not parser, rejected: ") + text);
        }
    }
    ctx.expect(caught == 20, "all 20 malformed queries raise SyntaxError (got " +
                                 std::to_string(caught) + ")");
    ctx.expect(deep >= 1, "multi-line queries report line numbers past the first");
}

struct Criterion {
    const char* label;
    double budget_sec;
    std::function<void(Ctx&)> body;
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"evidence matches spherical quadrature (n=2,3)", 60.0, criterion_evidence_vs_quadrature},
        {"small-angle evidence matches the Gaussian form", 1.0, criterion_gaussian_limit},
        {"zone candidate sets equal brute force", 30.0, criterion_zone_exactness},
        {"flagship query equals the N-way reference", 60.0, criterion_oracle_equivalence},
        {"result set invariant across partitions/workers", 300.0, criterion_partition_invariance},
        {"branch retry heals injected faults", 60.0, criterion_fault_tolerance},
        {"mini sampling is binomial and reproducible", 0.0, criterion_sampling},
        {"parser golden suite", 0.0, criterion_parser_goldens},
    };

    int failed = 0;
    int idx = 0;
    for (const auto& c : criteria) {
        ++idx;
        Ctx ctx;
        auto start = std::chrono::steady_clock::now();
        try {
            c.body(ctx);
        } catch (const std::exception& e) {
            ctx.expect(false, std::string("unexpected exception: ") + e.what());
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_sec > 0.0 && elapsed > c.budget_sec)
            ctx.expect(false, "runtime budget exceeded");
        bool ok = ctx.failures == 0;
        failed += !ok;
        std::printf("criterion %d  %s  %s  (%.2fs)\n", idx, ok ? "PASS" : "FAIL", c.label,
                    elapsed);
        std::fflush(stdout);
    }
    std::printf("%d of 8 criteria passed\n", 8 - failed);
    return failed;
}
