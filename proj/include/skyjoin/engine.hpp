// skyjoin/engine.hpp - catalogs + planner + executor + job lanes in one place
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "skyjoin/config.hpp"
#include "skyjoin/executor.hpp"
#include "skyjoin/planner.hpp"
#include "skyjoin/queue.hpp"
#include "skyjoin/store.hpp"

namespace skyjoin::engine {

/// Owns everything a session needs: ingested catalogs, their minis (loaded
/// from <output_dir>/minis when previously sampled), the staging registry
/// and the job lanes.  Results land under <output_dir>: INTO d:t writes
/// <output_dir>/<d>/<t>.csv, everything else <output_dir>/results/<job>.csv.
class Engine {
  public:
    explicit Engine(config::File cfg);
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const config::Settings& settings() const { return cfg_.settings; }
    const store::CatalogRegistry& catalogs() const { return catalogs_; }
    store::StagingRegistry& staging() { return staging_; }

    /// Parse + resolve + plan, no execution.
    std::string explain(const std::string& query_text);

    jobs::JobRecord submit(const std::string& query_text, jobs::QueueKind kind);
    jobs::JobRecord wait(const std::string& id) { return queue_->wait(id); }
    jobs::JobRecord status(const std::string& id) const { return queue_->status(id); }
    jobs::JobRecord cancel(const std::string& id) { return queue_->cancel(id); }
    std::vector<jobs::JobRecord> jobs() const { return queue_->list(); }

    /// submit + wait.
    jobs::JobRecord run_query(const std::string& query_text, jobs::QueueKind kind);

    /// Samples (or re-samples) a mini for every catalog and persists it under
    /// <output_dir>/minis.  rate <= 0 or seed == 0 fall back to the settings.
    std::vector<std::string> sample_minis(double rate, std::uint64_t seed);

    /// Emit result rows in a partitioning-independent order.
    bool sort_output = false;
    /// Test instrumentation forwarded to every run.
    exec::TestHooks hooks;

  private:
    jobs::RunOutcome run_job(const jobs::JobRecord& job,
                             const std::function<bool()>& cancelled,
                             std::chrono::milliseconds timeout);

    config::File cfg_;
    store::CatalogRegistry catalogs_;
    store::StagingRegistry staging_;
    std::unique_ptr<jobs::JobQueue> queue_;
};

}  // namespace skyjoin::engine
