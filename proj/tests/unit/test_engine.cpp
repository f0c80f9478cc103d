#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "common/fixtures.hpp"
#include "doctest.h"
#include "skyjoin/config.hpp"
#include "skyjoin/engine.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/queue.hpp"
#include "skyjoin/query.hpp"
#include "skyjoin/synthetic.hpp"

using namespace skyjoin;
using skyjoin::testsupport::TempDir;

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

/// Small demo field shared by the engine tests.
struct DemoFixture {
    TempDir tmp;
    std::string ini_path;
    config::File cfg;
    std::string query1, dropout;

    DemoFixture() {
        synth::DemoSpec spec;
        spec.seed = 11;
        spec.objects = 80;
        spec.sdss_background = 60;
        spec.galex_background = 50;
        spec.twomass_background = 40;
        spec.field_radius_deg = 1.0;
        ini_path = synth::write_demo(tmp.path, spec);
        cfg = config::load_file(ini_path);
        query1 = slurp((fs::path(tmp.path) / "query1.sql").string());
        dropout = slurp((fs::path(tmp.path) / "dropout.sql").string());
    }

    std::string jobs_dir() const {
        return (fs::path(cfg.settings.output_dir) / "jobs").string();
    }
};

bool reach_state(const engine::Engine& eng, const std::string& id, jobs::JobState want,
                 int budget_ms) {
    for (int waited = 0; waited < budget_ms; waited += 5) {
        if (eng.status(id).state == want) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return eng.status(id).state == want;
}

}  // namespace

TEST_CASE("demo engine answers the flagship query end to end") {
    DemoFixture d;
    engine::Engine eng(d.cfg);

    CHECK(eng.catalogs().tables().size() == 3);
    CHECK(eng.catalogs().find("sdss", "PhotoObj") != nullptr);
    CHECK(eng.catalogs().find("SDSS", "photoobj") != nullptr);  // case-insensitive
    REQUIRE(eng.catalogs().find("galex", "Detections") != nullptr);
    CHECK(eng.catalogs().find("galex", "Detections")->schema().footprint.has_value());

    std::string plan = eng.explain(d.query1);
    CHECK(plan.find("plan: cross-match x") != std::string::npos);
    CHECK(plan.find("seed MUST") != std::string::npos);

    jobs::JobRecord rec = eng.run_query(d.query1, jobs::QueueKind::Quick);
    CHECK(rec.state == jobs::JobState::Done);
    CHECK(rec.rows > 0);
    CHECK(rec.error.empty());
    REQUIRE(fs::exists(rec.output_path));
    CHECK(rec.output_path.find("results") != std::string::npos);
    std::string body = slurp(rec.output_path);
    CHECK(line_count(body) == rec.rows + 1);
    CHECK(body.rfind("sdss_id,galex_id,tm_id,RA,Dec,logBF\n", 0) == 0);

    // stored query text is the canonical print
    CHECK(eng.status(rec.id).query == sql::print(sql::parse(d.query1)));
}

TEST_CASE("INTO routes output under the target dataset directory") {
    DemoFixture d;
    engine::Engine eng(d.cfg);
    const char* q =
        "SELECT s.ObjID, g.ObjID INTO MyDB:Close\n"
        "FROM sdss:PhotoObj AS s CROSS JOIN galex:Detections AS g\n"
        "XMATCH BAYESIAN AS x\n"
        "  MUST s ON POINT(s.RA, s.Dec), 0.1\n"
        "  MUST g ON POINT(g.Ra, g.Dec), 0.2\n"
        "HAVING LIMIT 1e6\n";
    jobs::JobRecord rec = eng.run_query(q, jobs::QueueKind::Long);
    CHECK(rec.state == jobs::JobState::Done);
    CHECK(rec.queue == jobs::QueueKind::Long);
    fs::path want = fs::path(d.cfg.settings.output_dir) / "MyDB" / "Close.csv";
    CHECK(fs::path(rec.output_path) == want);
    CHECK(fs::exists(want));
}

TEST_CASE("NOT query from the demo runs to completion") {
    DemoFixture d;
    engine::Engine eng(d.cfg);
    jobs::JobRecord rec = eng.run_query(d.dropout, jobs::QueueKind::Quick);
    CHECK(rec.state == jobs::JobState::Done);
    CHECK(fs::exists(rec.output_path));
}

TEST_CASE("minis persist on disk and reload with the engine") {
    DemoFixture d;
    {
        engine::Engine eng(d.cfg);
        CHECK(eng.catalogs().find_mini("sdss", "PhotoObj") == nullptr);
        auto written = eng.sample_minis(0.5, 13);
        REQUIRE(written.size() == 3);
        for (const auto& p : written) CHECK(fs::exists(p));
        REQUIRE(eng.catalogs().find_mini("sdss", "PhotoObj") != nullptr);
        CHECK(eng.catalogs().find_mini("sdss", "PhotoObj")->rate == 0.5);
        CHECK(eng.catalogs().find_mini("sdss", "PhotoObj")->seed == 13);
    }
    engine::Engine again(d.cfg);
    const store::MiniCatalog* mini = again.catalogs().find_mini("sdss", "PhotoObj");
    REQUIRE(mini != nullptr);
    CHECK(mini->rate == 0.5);
    CHECK(mini->seed == 13);
    CHECK(again.catalogs().find_mini("twomass", "PSC") != nullptr);

    // rate <= 0 / seed == 0 fall back to the config values
    auto redone = again.sample_minis(0.0, 0);
    REQUIRE(redone.size() == 3);
    CHECK(again.catalogs().find_mini("sdss", "PhotoObj")->rate == 0.1);
    CHECK(again.catalogs().find_mini("sdss", "PhotoObj")->seed == 7);

    // a planned query now reports the sampled estimate
    std::string plan = again.explain(d.query1);
    CHECK(plan.find("mini rate 0.1") != std::string::npos);
    CHECK(plan.find("warning") == std::string::npos);
}

TEST_CASE("submission rejects bad queries before they reach the queue") {
    DemoFixture d;
    engine::Engine eng(d.cfg);
    CHECK_THROWS_AS(eng.submit("SELECT", jobs::QueueKind::Quick), SyntaxError);
    CHECK_THROWS_AS(eng.submit("SELECT z.q FROM nope:X AS z", jobs::QueueKind::Quick),
                    ResolveError);
    CHECK(eng.jobs().empty());
    CHECK_THROWS_AS(eng.status("job-999"), UnknownJobError);
}

TEST_CASE("queued and running jobs can be cancelled") {
    DemoFixture d;
    d.cfg.settings.quick_slots = 1;
    engine::Engine eng(d.cfg);
    eng.hooks.step_delay = std::chrono::milliseconds(120);

    auto j1 = eng.submit(d.query1, jobs::QueueKind::Quick);
    auto j2 = eng.submit(d.query1, jobs::QueueKind::Quick);
    auto j3 = eng.submit(d.query1, jobs::QueueKind::Quick);

    // j1 holds the only slot, so j3 is still queued: cancel is immediate
    jobs::JobRecord r3 = eng.cancel(j3.id);
    CHECK(r3.state == jobs::JobState::Cancelled);
    CHECK(eng.status(j3.id).state == jobs::JobState::Cancelled);

    // cross-process cancellation: drop a marker file for the running job
    REQUIRE(reach_state(eng, j1.id, jobs::JobState::Running, 3000));
    jobs::JobQueue::request_cancel(d.jobs_dir(), j1.id);
    CHECK(eng.wait(j1.id).state == jobs::JobState::Cancelled);

    CHECK(eng.wait(j2.id).state == jobs::JobState::Done);

    auto all = eng.jobs();
    CHECK(all.size() == 3);
    CHECK_THROWS_AS(jobs::JobQueue::request_cancel(d.jobs_dir(), "job-042"), UnknownJobError);
}

TEST_CASE("quick-lane deadline times a job out") {
    DemoFixture d;
    d.cfg.settings.quick_timeout = std::chrono::milliseconds(150);
    engine::Engine eng(d.cfg);
    eng.hooks.step_delay = std::chrono::milliseconds(80);

    jobs::JobRecord rec = eng.run_query(d.query1, jobs::QueueKind::Quick);
    CHECK(rec.state == jobs::JobState::TimedOut);
    CHECK(rec.output_path.empty());
    CHECK(eng.staging().count() == 0);
}

TEST_CASE("sorted output is identical across worker and partition counts") {
    DemoFixture d;

    config::File cfg1 = d.cfg;
    cfg1.settings.workers = 1;
    cfg1.settings.partitions = 1;
    cfg1.settings.output_dir = (fs::path(d.tmp.path) / "out1").string();
    engine::Engine e1(cfg1);
    e1.sort_output = true;
    auto r1 = e1.run_query(d.query1, jobs::QueueKind::Quick);

    config::File cfg2 = d.cfg;
    cfg2.settings.workers = 3;
    cfg2.settings.partitions = 8;
    cfg2.settings.output_dir = (fs::path(d.tmp.path) / "out2").string();
    engine::Engine e2(cfg2);
    e2.sort_output = true;
    auto r2 = e2.run_query(d.query1, jobs::QueueKind::Quick);

    REQUIRE(r1.state == jobs::JobState::Done);
    REQUIRE(r2.state == jobs::JobState::Done);
    CHECK(r1.rows == r2.rows);
    CHECK(slurp(r1.output_path) == slurp(r2.output_path));
}

TEST_CASE("job records persist across queue instances") {
    TempDir tmp;
    jobs::JobQueue::Config qc;
    qc.jobs_dir = (fs::path(tmp.path) / "jobs").string();

    auto runner = [](const jobs::JobRecord& job, const std::function<bool()>& cancelled,
                     std::chrono::milliseconds) -> jobs::RunOutcome {
        int ms = std::stoi(job.query);
        auto start = std::chrono::steady_clock::now();
        while (std::chrono::steady_clock::now() - start < std::chrono::milliseconds(ms)) {
            if (cancelled()) throw EngineError(ErrorCode::JobCancelled, "stop");
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        return jobs::RunOutcome{"out.csv", 7};
    };

    std::string first_id;
    {
        jobs::JobQueue q(qc, runner);
        auto rec = q.submit("1", jobs::QueueKind::Quick);
        first_id = rec.id;
        CHECK(first_id == "job-001");
        rec = q.wait(first_id);
        CHECK(rec.state == jobs::JobState::Done);
        CHECK(rec.rows == 7);
        CHECK(rec.output_path == "out.csv");
        CHECK(rec.elapsed_sec >= 0.0);
    }

    // records outlive the queue object
    jobs::JobRecord persisted = jobs::JobQueue::load_record(qc.jobs_dir, first_id);
    CHECK(persisted.state == jobs::JobState::Done);
    CHECK(persisted.query == "1");
    CHECK(persisted.rows == 7);

    // a crashed process left a running record behind; the next queue retires
    // it and continues the id sequence
    {
        std::ofstream out((fs::path(qc.jobs_dir) / "job-007.json").string());
        out << "{\"id\":\"job-007\",\"queue\":\"quick\",\"state\":\"running\","
               "\"query\":\"5\",\"error\":\"\",\"output\":\"\",\"rows\":0,"
               "\"elapsed_sec\":0.0}\n";
    }
    {
        jobs::JobQueue q(qc, runner);
        jobs::JobRecord dead = q.status("job-007");
        CHECK(dead.state == jobs::JobState::Failed);
        CHECK(dead.error == "interrupted: the owning process exited");

        auto rec = q.submit("1", jobs::QueueKind::Long);
        CHECK(rec.id == "job-008");
        CHECK(q.wait(rec.id).state == jobs::JobState::Done);

        auto all = jobs::JobQueue::load_all(qc.jobs_dir);
        CHECK(all.size() == 3);
        for (const auto& r : all) CHECK(jobs::is_terminal(r.state));
    }

    CHECK_THROWS_AS(jobs::JobQueue::load_record(qc.jobs_dir, "job-felix"), UnknownJobError);
}

TEST_CASE("queue lanes run independently and honor cancel flags") {
    TempDir tmp;
    jobs::JobQueue::Config qc;
    qc.jobs_dir = (fs::path(tmp.path) / "jobs").string();
    qc.quick_slots = 1;
    qc.long_slots = 1;
    qc.quick_timeout = std::chrono::milliseconds(250);

    auto runner = [](const jobs::JobRecord& job, const std::function<bool()>& cancelled,
                     std::chrono::milliseconds timeout) -> jobs::RunOutcome {
        int ms = std::stoi(job.query);
        auto start = std::chrono::steady_clock::now();
        while (std::chrono::steady_clock::now() - start < std::chrono::milliseconds(ms)) {
            if (cancelled()) throw EngineError(ErrorCode::JobCancelled, "stop");
            if (timeout.count() > 0 &&
                std::chrono::steady_clock::now() - start >= timeout)
                throw EngineError(ErrorCode::JobTimedOut, "late");
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        return jobs::RunOutcome{"", 0};
    };
    jobs::JobQueue q(qc, runner);

    // the quick lane times out, the long lane does not
    auto slow_quick = q.submit("600", jobs::QueueKind::Quick);
    auto slow_long = q.submit("600", jobs::QueueKind::Long);
    CHECK(q.wait(slow_quick.id).state == jobs::JobState::TimedOut);
    CHECK(q.wait(slow_long.id).state == jobs::JobState::Done);

    // cancelling a running job flips its flag
    auto victim = q.submit("5000", jobs::QueueKind::Long);
    for (int i = 0; i < 1000 && q.status(victim.id).state != jobs::JobState::Running; ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    REQUIRE(q.status(victim.id).state == jobs::JobState::Running);
    q.cancel(victim.id);
    CHECK(q.wait(victim.id).state == jobs::JobState::Cancelled);

    // cancelling a terminal job changes nothing
    CHECK(q.cancel(victim.id).state == jobs::JobState::Cancelled);
}
