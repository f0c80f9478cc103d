#include "skyjoin/engine.hpp"

#include <filesystem>
#include <fstream>

#include "skyjoin/query.hpp"
#include "skyjoin/resolve.hpp"

namespace skyjoin::engine {

namespace fs = std::filesystem;

namespace {

std::string mini_base(const config::Settings& s, const store::CatalogSchema& schema) {
    return (fs::path(s.output_dir) / "minis" / (schema.dataset + "." + schema.table)).string();
}

}  // namespace

Engine::Engine(config::File cfg) : cfg_(std::move(cfg)) {
    fs::create_directories(fs::path(cfg_.settings.output_dir) / "results");
    fs::create_directories(fs::path(cfg_.settings.output_dir) / "minis");

    for (const config::CatalogEntry& entry : cfg_.catalogs) {
        auto schema = std::shared_ptr<const store::CatalogSchema>(entry.schema);
        store::TablePtr table = store::ingest_csv(schema, entry.csv_path);
        catalogs_.put(table);
        std::string base = mini_base(cfg_.settings, *schema);
        if (fs::exists(base + ".csv") && fs::exists(base + ".meta")) {
            catalogs_.put_mini(schema->dataset, schema->table,
                               store::load_mini(schema, base + ".csv", base + ".meta"));
        }
    }

    jobs::JobQueue::Config qc;
    qc.jobs_dir = (fs::path(cfg_.settings.output_dir) / "jobs").string();
    qc.quick_slots = cfg_.settings.quick_slots;
    qc.long_slots = cfg_.settings.long_slots;
    qc.quick_timeout = cfg_.settings.quick_timeout;
    qc.long_timeout = cfg_.settings.long_timeout;
    queue_ = std::make_unique<jobs::JobQueue>(
        qc, [this](const jobs::JobRecord& job, const std::function<bool()>& cancelled,
                   std::chrono::milliseconds timeout) {
            return run_job(job, cancelled, timeout);
        });
}

Engine::~Engine() = default;

std::string Engine::explain(const std::string& query_text) {
    sql::Query q = sql::parse(query_text);
    auto rq = std::make_shared<const sql::ResolvedQuery>(sql::resolve(q, catalogs_));
    plan::PlanOptions po;
    po.partitions = cfg_.settings.partitions;
    po.workers = cfg_.settings.workers;
    plan::CompiledPlan plan = plan::compile(rq, catalogs_, po);
    return plan::explain_text(plan);
}

jobs::JobRecord Engine::submit(const std::string& query_text, jobs::QueueKind kind) {
    // reject malformed queries at submit time, with the canonical text stored
    sql::Query q = sql::parse(query_text);
    sql::resolve(q, catalogs_);
    return queue_->submit(sql::print(q), kind);
}

jobs::JobRecord Engine::run_query(const std::string& query_text, jobs::QueueKind kind) {
    return queue_->wait(submit(query_text, kind).id);
}

jobs::RunOutcome Engine::run_job(const jobs::JobRecord& job,
                                 const std::function<bool()>& cancelled,
                                 std::chrono::milliseconds timeout) {
    sql::Query q = sql::parse(job.query);
    auto rq = std::make_shared<const sql::ResolvedQuery>(sql::resolve(q, catalogs_));
    plan::PlanOptions po;
    po.partitions = cfg_.settings.partitions;
    po.workers = cfg_.settings.workers;
    plan::CompiledPlan plan = plan::compile(rq, catalogs_, po);

    exec::RunOptions ro;
    ro.workers = cfg_.settings.workers;
    ro.max_retries = cfg_.settings.retries;
    ro.timeout = timeout;
    ro.cancelled = cancelled;
    ro.hooks = hooks;
    exec::ResultTable result = exec::run(plan, job.id, staging_, ro);

    fs::path out_path;
    if (rq->into) {
        out_path = fs::path(cfg_.settings.output_dir) / rq->into->dataset /
                   (rq->into->table + ".csv");
        fs::create_directories(out_path.parent_path());
    } else {
        out_path = fs::path(cfg_.settings.output_dir) / "results" / (job.id + ".csv");
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_path.string());
    exec::write_result_csv(result, out, sort_output);
    if (!out) throw IoError("failed while writing " + out_path.string());
    return jobs::RunOutcome{out_path.string(), result.rows.size()};
}

std::vector<std::string> Engine::sample_minis(double rate, std::uint64_t seed) {
    if (rate <= 0.0) rate = cfg_.settings.sample_rate;
    if (seed == 0) seed = cfg_.settings.sample_seed;
    std::vector<std::string> written;
    for (const store::TablePtr& table : catalogs_.tables()) {
        store::MiniCatalog mini = store::sample_mini(table, rate, seed);
        std::string base = mini_base(cfg_.settings, table->schema());
        store::save_mini(mini, base + ".csv", base + ".meta");
        catalogs_.put_mini(table->schema().dataset, table->schema().table, std::move(mini));
        written.push_back(base + ".csv");
    }
    return written;
}

}  // namespace skyjoin::engine
