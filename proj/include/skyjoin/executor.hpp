// skyjoin/executor.hpp - partitioned, multi-worker plan execution
#pragma once

#include <chrono>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "skyjoin/planner.hpp"
#include "skyjoin/store.hpp"

namespace skyjoin::exec {

struct ResultTable {
    std::vector<std::string> names;
    std::vector<std::vector<Value>> rows;
};

/// Header + rows; with sort_rows the formatted rows are emitted in
/// lexicographic order, which makes output independent of partitioning.
void write_result_csv(const ResultTable& t, std::ostream& out, bool sort_rows);

/// Injection points for fault and scheduling tests.
struct TestHooks {
    /// Runs at the start of every (branch, attempt) on its worker thread;
    /// throwing simulates a branch failure.
    std::function<void(int branch, int attempt, int worker)> on_branch_start;
    std::chrono::milliseconds step_delay{0};  // slows each step down
};

struct RunOptions {
    int workers = 1;
    int max_retries = 1;  // re-runs allowed per branch, on the next worker
    std::chrono::milliseconds timeout{0};  // 0 = unlimited
    std::function<bool()> cancelled;       // polled while the job runs
    TestHooks hooks;
};

struct BranchReport {
    int branch = -1;
    int attempts = 0;
    int worker = -1;  // worker that completed the branch
    std::size_t rows = 0;
};

struct RunReport {
    std::vector<BranchReport> branches;
};

/// Executes a compiled plan: partitions become branches, branch i starts on
/// worker i mod W, a failed branch is retried on the next worker up to
/// max_retries extra attempts.  Per-branch staging tables are registered in
/// `staging` under "<job_id>/..." and are all dropped by the time run
/// returns, whatever the outcome.  Throws the first branch error once
/// retries are exhausted, or EngineError with JobTimedOut / JobCancelled.
/// Output rows are assembled in branch order, deterministic for a fixed
/// partition count.
ResultTable run(const plan::CompiledPlan& plan, const std::string& job_id,
                store::StagingRegistry& staging, const RunOptions& opts,
                RunReport* report = nullptr);

}  // namespace skyjoin::exec
