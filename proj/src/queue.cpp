#include "skyjoin/queue.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace skyjoin::jobs {

namespace fs = std::filesystem;
using nlohmann::json;

const char* queue_kind_name(QueueKind k) { return k == QueueKind::Quick ? "quick" : "long"; }

const char* job_state_name(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
        case JobState::TimedOut: return "timed-out";
        default: return "cancelled";
    }
}

bool is_terminal(JobState s) {
    return s != JobState::Queued && s != JobState::Running;
}

namespace {

JobState state_from_name(const std::string& s) {
    for (JobState st : {JobState::Queued, JobState::Running, JobState::Done, JobState::Failed,
                        JobState::TimedOut, JobState::Cancelled})
        if (s == job_state_name(st)) return st;
    throw IoError("unrecognized job state '" + s + "'");
}

json to_json(const JobRecord& r) {
    return json{{"id", r.id},
                {"queue", queue_kind_name(r.queue)},
                {"state", job_state_name(r.state)},
                {"query", r.query},
                {"error", r.error},
                {"output", r.output_path},
                {"rows", r.rows},
                {"elapsed_sec", r.elapsed_sec}};
}

JobRecord from_json(const json& j) {
    JobRecord r;
    r.id = j.at("id").get<std::string>();
    r.queue = j.at("queue").get<std::string>() == "long" ? QueueKind::Long : QueueKind::Quick;
    r.state = state_from_name(j.at("state").get<std::string>());
    r.query = j.value("query", "");
    r.error = j.value("error", "");
    r.output_path = j.value("output", "");
    r.rows = j.value("rows", std::size_t{0});
    r.elapsed_sec = j.value("elapsed_sec", 0.0);
    return r;
}

std::string record_path(const std::string& dir, const std::string& id) {
    return (fs::path(dir) / (id + ".json")).string();
}

JobRecord read_record(const std::string& dir, const std::string& id) {
    std::ifstream in(record_path(dir, id));
    if (!in) throw UnknownJobError("no job named '" + id + "'");
    json j;
    try {
        in >> j;
        return from_json(j);
    } catch (const json::exception& e) {
        throw IoError("job record for '" + id + "' is unreadable: " + e.what());
    }
}

}  // namespace

JobQueue::JobQueue(Config cfg, JobRunner runner)
    : cfg_(std::move(cfg)), runner_(std::move(runner)) {
    fs::create_directories(cfg_.jobs_dir);
    // continue the id sequence and retire jobs a previous process left live
    for (const JobRecord& r : load_all(cfg_.jobs_dir)) {
        std::size_t n = std::strtoull(r.id.c_str() + (r.id.rfind("job-", 0) == 0 ? 4 : 0),
                                      nullptr, 10);
        counter_ = std::max(counter_, n);
        if (!is_terminal(r.state)) {
            JobRecord dead = r;
            dead.state = JobState::Failed;
            dead.error = "interrupted: the owning process exited";
            persist_locked(dead);
        }
    }
    quick_.slots = std::max(1, cfg_.quick_slots);
    long_.slots = std::max(1, cfg_.long_slots);
    for (int i = 0; i < quick_.slots; ++i)
        quick_.threads.emplace_back([this] { worker(QueueKind::Quick); });
    for (int i = 0; i < long_.slots; ++i)
        long_.threads.emplace_back([this] { worker(QueueKind::Long); });
}

JobQueue::~JobQueue() {
    {
        std::lock_guard<std::mutex> lk(mu_);
        stopping_ = true;
        // queued jobs will never run; running ones are asked to stop
        for (auto& [id, rec] : live_) {
            if (rec.state == JobState::Queued) {
                rec.state = JobState::Cancelled;
                persist_locked(rec);
            } else if (rec.state == JobState::Running) {
                cancel_flags_[id] = true;
            }
        }
        quick_.fifo.clear();
        long_.fifo.clear();
    }
    cv_.notify_all();
    for (auto& t : quick_.threads) t.join();
    for (auto& t : long_.threads) t.join();
}

std::string JobQueue::cancel_marker(const std::string& id) const {
    return (fs::path(cfg_.jobs_dir) / (id + ".cancel")).string();
}

std::string JobQueue::next_id_locked() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%03zu", ++counter_);
    return buf;
}

void JobQueue::persist_locked(const JobRecord& rec) const {
    std::string path = record_path(cfg_.jobs_dir, rec.id);
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write job record " + path);
        out << to_json(rec).dump(2) << "\n";
    }
    fs::rename(tmp, path);
}

JobRecord JobQueue::submit(const std::string& query, QueueKind kind) {
    std::lock_guard<std::mutex> lk(mu_);
    if (stopping_) throw StepError("the job queue is shutting down");
    JobRecord rec;
    rec.id = next_id_locked();
    rec.queue = kind;
    rec.state = JobState::Queued;
    rec.query = query;
    live_[rec.id] = rec;
    persist_locked(rec);
    (kind == QueueKind::Quick ? quick_ : long_).fifo.push_back(rec.id);
    cv_.notify_all();
    return rec;
}

void JobQueue::worker(QueueKind kind) {
    Lane& lane = kind == QueueKind::Quick ? quick_ : long_;
    const auto timeout = kind == QueueKind::Quick ? cfg_.quick_timeout : cfg_.long_timeout;
    for (;;) {
        std::string id;
        {
            std::unique_lock<std::mutex> lk(mu_);
            cv_.wait(lk, [&] { return stopping_ || !lane.fifo.empty(); });
            if (stopping_) return;
            id = lane.fifo.front();
            lane.fifo.pop_front();
            JobRecord& rec = live_[id];
            if (rec.state != JobState::Queued) continue;  // cancelled while queued
            rec.state = JobState::Running;
            persist_locked(rec);
        }

        auto cancelled = [this, id] {
            {
                std::lock_guard<std::mutex> lk(mu_);
                auto it = cancel_flags_.find(id);
                if (it != cancel_flags_.end() && it->second) return true;
            }
            return fs::exists(cancel_marker(id));
        };

        JobRecord snapshot;
        {
            std::lock_guard<std::mutex> lk(mu_);
            snapshot = live_[id];
        }
        auto started = std::chrono::steady_clock::now();
        JobState final_state = JobState::Done;
        std::string error;
        RunOutcome outcome;
        try {
            outcome = runner_(snapshot, cancelled, timeout);
        } catch (const EngineError& e) {
            if (e.code() == ErrorCode::JobTimedOut) {
                final_state = JobState::TimedOut;
            } else if (e.code() == ErrorCode::JobCancelled) {
                final_state = JobState::Cancelled;
            } else {
                final_state = JobState::Failed;
                error = std::string(error_code_name(e.code())) + ": " + e.what();
            }
        } catch (const std::exception& e) {
            final_state = JobState::Failed;
            error = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        std::error_code ec;
        fs::remove(cancel_marker(id), ec);
        {
            std::lock_guard<std::mutex> lk(mu_);
            JobRecord& rec = live_[id];
            rec.state = final_state;
            rec.error = error;
            rec.elapsed_sec = elapsed;
            if (final_state == JobState::Done) {
                rec.output_path = outcome.output_path;
                rec.rows = outcome.rows;
            }
            cancel_flags_.erase(id);
            persist_locked(rec);
        }
        cv_.notify_all();
    }
}

JobRecord JobQueue::status(const std::string& id) const {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = live_.find(id);
        if (it != live_.end()) return it->second;
    }
    return read_record(cfg_.jobs_dir, id);
}

JobRecord JobQueue::cancel(const std::string& id) {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = live_.find(id);
    if (it == live_.end()) return read_record(cfg_.jobs_dir, id);
    JobRecord& rec = it->second;
    if (rec.state == JobState::Queued) {
        rec.state = JobState::Cancelled;
        persist_locked(rec);
        cv_.notify_all();
    } else if (rec.state == JobState::Running) {
        cancel_flags_[id] = true;
        std::ofstream marker(cancel_marker(id));
    }
    return rec;
}

JobRecord JobQueue::wait(const std::string& id) {
    std::unique_lock<std::mutex> lk(mu_);
    for (;;) {
        auto it = live_.find(id);
        if (it == live_.end()) {
            lk.unlock();
            return read_record(cfg_.jobs_dir, id);
        }
        if (is_terminal(it->second.state)) return it->second;
        cv_.wait_for(lk, std::chrono::milliseconds(20));
    }
}

std::vector<JobRecord> JobQueue::list() const {
    std::map<std::string, JobRecord> merged;
    for (const JobRecord& r : load_all(cfg_.jobs_dir)) merged[r.id] = r;
    {
        std::lock_guard<std::mutex> lk(mu_);
        for (const auto& [id, rec] : live_) merged[id] = rec;
    }
    std::vector<JobRecord> out;
    for (auto& [id, rec] : merged) out.push_back(rec);
    return out;
}

JobRecord JobQueue::load_record(const std::string& jobs_dir, const std::string& id) {
    return read_record(jobs_dir, id);
}

std::vector<JobRecord> JobQueue::load_all(const std::string& jobs_dir) {
    std::vector<JobRecord> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(jobs_dir, ec)) {
        if (entry.path().extension() != ".json") continue;
        try {
            out.push_back(read_record(jobs_dir, entry.path().stem().string()));
        } catch (const EngineError&) {
            // a half-written record never hides the rest of the registry
        }
    }
    std::sort(out.begin(), out.end(),
              [](const JobRecord& a, const JobRecord& b) { return a.id < b.id; });
    return out;
}

void JobQueue::request_cancel(const std::string& jobs_dir, const std::string& id) {
    read_record(jobs_dir, id);  // throws UnknownJobError for unknown ids
    std::ofstream marker((fs::path(jobs_dir) / (id + ".cancel")).string());
}

}  // namespace skyjoin::jobs
