#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "skyjoin/engine.hpp"
#include "skyjoin/query.hpp"

namespace {

using namespace skyjoin;

std::string load_query_text(const std::string& inline_text, const std::string& file) {
    if (!inline_text.empty() && !file.empty())
        throw ConfigError("give the query either inline or with --file, not both");
    if (!inline_text.empty()) return inline_text;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw IoError("cannot read query file " + file);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    throw ConfigError("no query given: pass it inline or with --file");
}

void print_record(const jobs::JobRecord& r, std::ostream& os) {
    os << r.id << "  " << jobs::job_state_name(r.state) << "  queue=" << jobs::queue_kind_name(r.queue);
    if (r.state == jobs::JobState::Done)
        os << "  rows=" << r.rows << "  output=" << r.output_path;
    if (!r.error.empty()) os << "  error=" << r.error;
    if (r.elapsed_sec > 0.0) os << "  elapsed=" << format_double(r.elapsed_sec) << "s";
    os << "\n";
}

int exit_for_state(const jobs::JobRecord& r) {
    switch (r.state) {
        case jobs::JobState::Done: return 0;
        case jobs::JobState::TimedOut: return exit_code_for(ErrorCode::JobTimedOut);
        case jobs::JobState::Cancelled: return exit_code_for(ErrorCode::JobCancelled);
        default: return exit_code_for(ErrorCode::JobFailed);
    }
}

std::string jobs_dir_of(const config::File& cfg) {
    return (std::filesystem::path(cfg.settings.output_dir) / "jobs").string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skyjoin - probabilistic cross-identification across sky catalogs"};
    app.require_subcommand(1);

    std::string config_path = "skyjoin.ini";
    app.add_option("-c,--config", config_path, "engine + catalog configuration")
        ->capture_default_str();

    std::string query_text, query_file, queue_name = "quick", job_id;
    bool sort_output = false;
    int workers_override = 0, partitions_override = 0;
    long long step_delay_ms = 0;
    double rate = 0.0;
    std::uint64_t seed = 0;

    auto add_query_opts = [&](CLI::App* cmd) {
        cmd->add_option("query", query_text, "query text");
        cmd->add_option("-f,--file", query_file, "read the query from a file");
        cmd->add_option("--workers", workers_override, "override [engine] workers");
        cmd->add_option("--partitions", partitions_override, "override [engine] partitions");
    };

    CLI::App* run = app.add_subcommand("run", "run a query and wait for its result");
    add_query_opts(run);
    run->add_option("--queue", queue_name, "quick or long")->capture_default_str();
    run->add_flag("--sort-output", sort_output, "emit rows in a partition-independent order");
    run->add_option("--debug-step-delay-ms", step_delay_ms, "slow each plan step down")
        ->group("");

    CLI::App* explain = app.add_subcommand("explain", "show the execution plan for a query");
    add_query_opts(explain);

    CLI::App* sample = app.add_subcommand("sample", "build and persist mini catalogs");
    sample->add_option("--rate", rate, "sampling rate in (0, 1]; default from config");
    sample->add_option("--seed", seed, "sampling seed; default from config");

    CLI::App* status = app.add_subcommand("status", "show one job or the whole registry");
    status->add_option("job", job_id, "job id; omit to list every job");

    CLI::App* cancel = app.add_subcommand("cancel", "ask a queued or running job to stop");
    cancel->add_option("job", job_id, "job id")->required();

    app.add_subcommand("catalogs", "list the configured catalogs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        config::File cfg = config::load_file(config_path);
        if (workers_override > 0) cfg.settings.workers = workers_override;
        if (partitions_override > 0) cfg.settings.partitions = partitions_override;

        // registry-only commands skip catalog ingest entirely
        if (status->parsed()) {
            if (job_id.empty()) {
                for (const auto& r : jobs::JobQueue::load_all(jobs_dir_of(cfg)))
                    print_record(r, std::cout);
            } else {
                print_record(jobs::JobQueue::load_record(jobs_dir_of(cfg), job_id), std::cout);
            }
            return 0;
        }
        if (cancel->parsed()) {
            jobs::JobQueue::request_cancel(jobs_dir_of(cfg), job_id);
            std::cout << "cancel requested for " << job_id << "\n";
            return 0;
        }

        engine::Engine eng(std::move(cfg));

        if (run->parsed()) {
            if (queue_name != "quick" && queue_name != "long")
                throw ConfigError("--queue must be quick or long");
            eng.sort_output = sort_output;
            eng.hooks.step_delay = std::chrono::milliseconds(step_delay_ms);
            jobs::JobRecord rec = eng.run_query(
                load_query_text(query_text, query_file),
                queue_name == "long" ? jobs::QueueKind::Long : jobs::QueueKind::Quick);
            print_record(rec, rec.state == jobs::JobState::Done ? std::cout : std::cerr);
            return exit_for_state(rec);
        }
        if (explain->parsed()) {
            std::cout << eng.explain(load_query_text(query_text, query_file));
            return 0;
        }
        if (sample->parsed()) {
            for (const std::string& path : eng.sample_minis(rate, seed))
                std::cout << path << "\n";
            return 0;
        }
        // catalogs
        for (const store::TablePtr& t : eng.catalogs().tables()) {
            std::cout << t->schema().qualified_name() << "  rows=" << t->row_count();
            const store::MiniCatalog* mini =
                eng.catalogs().find_mini(t->schema().dataset, t->schema().table);
            if (mini)
                std::cout << "  mini_rows=" << mini->table->row_count()
                          << "  rate=" << format_double(mini->rate);
            std::cout << "\n";
        }
        return 0;
    } catch (const skyjoin::EngineError& e) {
        std::cerr << "error[" << error_code_name(e.code()) << "] " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
