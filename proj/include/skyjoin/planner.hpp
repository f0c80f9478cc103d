// skyjoin/planner.hpp - statistics, step ordering, cutoffs, partitioning
#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skyjoin/resolve.hpp"
#include "skyjoin/store.hpp"

namespace skyjoin::plan {

/// One constraint's detections after push-down and region filtering, with
/// positions and weights evaluated from the constraint's POINT/error
/// expressions.  Shared by the planner (bounds, histograms) and the executor
/// (the actual join).
struct WorkingSet {
    int source = -1;
    int constraint = -1;
    store::TablePtr table;
    std::vector<std::int64_t> rows;  // global row ids, ascending
    std::vector<sphere::UnitVector> pos;
    std::vector<sphere::SkyCoord> sky;
    std::vector<double> w;
    double sigma_min_as = 0.0;  // over the rows above (literal: the literal)
    double sigma_max_as = 0.0;
};

struct SourceStats {
    int source = -1;
    std::string alias;
    bool used_mini = false;  // false = full-table fallback (with a warning)
    double rate = 1.0;
    std::size_t sample_pass = 0;
    double estimated_rows = 0.0;
    std::array<double, 360> ra_hist{};  // 1-degree bins, weighted by 1/rate
};

struct MatchStep {
    sql::MatchMode mode = sql::MatchMode::Must;
    int constraint = -1;
    bool last_must = false;  // the evidence threshold is applied after this step
    double cutoff_rad = 0.0;
    double zone_height_deg = 1.0;
};

struct CompiledPlan {
    std::shared_ptr<const sql::ResolvedQuery> rq;
    bool empty_result = false;
    std::string empty_reason;
    int driving = -1;  // constraint index seeding the pipeline
    std::vector<MatchStep> steps;
    int partitions = 1;
    std::vector<double> boundaries;  // RA cut points, size = partitions
    std::vector<SourceStats> stats;  // per source index
    std::vector<WorkingSet> working;  // per constraint index
    std::vector<std::string> warnings;
};

struct PlanOptions {
    int partitions = 0;  // 0 = auto: 4 * workers
    int workers = 1;
};

/// Filtered-row estimates per source.  Uses the registered mini catalog when
/// present, otherwise falls back to an exact count over the full table and
/// records a warning.
std::vector<SourceStats> gather_stats(const sql::ResolvedQuery& rq,
                                      const store::CatalogRegistry& catalogs,
                                      std::vector<std::string>* warnings);

/// Constraint execution order: the driving MUST first (smallest estimate),
/// remaining MUSTs by ascending estimate, then MAYs, then NOTs.
std::vector<int> order_steps(const sql::ResolvedQuery& rq,
                             const std::vector<SourceStats>& stats);

/// Equal-count RA cut points from a 1-degree histogram.  boundaries[0] is the
/// start of the first wedge; wedge i spans [b_i, b_{i+1}) and the last wedge
/// wraps around 360.  Ties (zero-mass plateaus) resolve to the largest RA so
/// cut points stay inside the populated span.
std::vector<double> partition_boundaries(const std::array<double, 360>& hist, int p);

CompiledPlan compile(std::shared_ptr<const sql::ResolvedQuery> rq,
                     const store::CatalogRegistry& catalogs, const PlanOptions& opts);

std::string explain_text(const CompiledPlan& plan);

}  // namespace skyjoin::plan
