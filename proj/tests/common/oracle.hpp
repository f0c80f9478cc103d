// tests/common/oracle.hpp - radius-free brute-force match oracle
#pragma once

#include <cstdint>
#include <vector>

#include "skyjoin/geometry.hpp"
#include "skyjoin/query.hpp"

namespace skyjoin::testsupport {

/// One constraint's detections, already filtered the way the engine filters
/// (push-down + region), in row order.
struct BruteCatalog {
    sql::MatchMode mode = sql::MatchMode::Must;
    std::vector<sphere::UnitVector> pos;
    std::vector<double> w;
    std::vector<std::int64_t> key;
    /// Identity of the backing table for the self-join rule; two constraints
    /// with the same non-null table_id must not pick the same key.
    const void* table_id = nullptr;
    const sphere::Region* footprint = nullptr;  // honored for NOT only
};

struct BruteTuple {
    std::vector<std::int64_t> key;  // per catalog, -1 where absent
    double log_bf = 0.0;
};

/// Exhaustive reference implementation of the match semantics: every MUST
/// combination is enumerated (no search radius, no zones), the evidence cut
/// runs once over complete MUST tuples, then MAY and NOT constraints apply
/// in `step_order` exactly like the engine's greedy steps.  step_order lists
/// catalog indexes, the driving MUST first.  Tuples come back sorted by key
/// vector.
std::vector<BruteTuple> brute_force_match(const std::vector<BruteCatalog>& cats,
                                          const std::vector<int>& step_order,
                                          double log_limit);

}  // namespace skyjoin::testsupport
