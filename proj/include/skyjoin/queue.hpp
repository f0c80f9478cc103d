// skyjoin/queue.hpp - QUICK/LONG job lanes with persistent job records
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "skyjoin/errors.hpp"

namespace skyjoin::jobs {

enum class QueueKind { Quick, Long };
enum class JobState { Queued, Running, Done, Failed, TimedOut, Cancelled };

const char* queue_kind_name(QueueKind k);
const char* job_state_name(JobState s);
bool is_terminal(JobState s);

struct JobRecord {
    std::string id;
    QueueKind queue = QueueKind::Quick;
    JobState state = JobState::Queued;
    std::string query;
    std::string error;        // set when state == Failed
    std::string output_path;  // set when state == Done
    std::size_t rows = 0;
    double elapsed_sec = 0.0;
};

struct RunOutcome {
    std::string output_path;
    std::size_t rows = 0;
};

/// Executes one job: run the query, write its output, return where it went.
/// `cancelled` must be polled; the run must give up promptly once it returns
/// true.  Signal timeout/cancel by throwing EngineError with JobTimedOut /
/// JobCancelled; any other exception marks the job Failed.
using JobRunner = std::function<RunOutcome(const JobRecord& job,
                                           const std::function<bool()>& cancelled,
                                           std::chrono::milliseconds timeout)>;

/// Two FIFO lanes with independent worker-slot counts.  Every state change
/// is persisted as <jobs_dir>/<id>.json, so a separate process can inspect
/// the registry; a <jobs_dir>/<id>.cancel marker file asks a running job to
/// stop, which makes cancellation work across processes too.
class JobQueue {
  public:
    struct Config {
        std::string jobs_dir;
        int quick_slots = 2;
        int long_slots = 1;
        std::chrono::milliseconds quick_timeout{30000};
        std::chrono::milliseconds long_timeout{3600000};
    };

    JobQueue(Config cfg, JobRunner runner);
    ~JobQueue();

    JobQueue(const JobQueue&) = delete;
    JobQueue& operator=(const JobQueue&) = delete;

    /// Queues a query and returns its record (state Queued, fresh id).
    JobRecord submit(const std::string& query, QueueKind kind);

    /// In-memory record if the job is live, else the persisted one.
    /// Throws UnknownJobError for ids this jobs_dir has never seen.
    JobRecord status(const std::string& id) const;

    /// Cancels a queued job immediately; flags a running one and returns
    /// without waiting.  Cancelling a terminal job is a no-op.  Returns the
    /// record as of the call.
    JobRecord cancel(const std::string& id);

    /// Blocks until the job reaches a terminal state.
    JobRecord wait(const std::string& id);

    std::vector<JobRecord> list() const;

    /// Reads one persisted record straight from a jobs directory.
    static JobRecord load_record(const std::string& jobs_dir, const std::string& id);
    static std::vector<JobRecord> load_all(const std::string& jobs_dir);
    /// Drops a cancel request marker for a (possibly foreign) running job.
    static void request_cancel(const std::string& jobs_dir, const std::string& id);

  private:
    struct Lane {
        std::deque<std::string> fifo;
        int slots = 0;
        std::vector<std::thread> threads;
    };

    void worker(QueueKind kind);
    void persist_locked(const JobRecord& rec) const;
    std::string next_id_locked();
    std::string cancel_marker(const std::string& id) const;

    Config cfg_;
    JobRunner runner_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::size_t counter_ = 0;
    std::map<std::string, JobRecord> live_;
    std::map<std::string, bool> cancel_flags_;
    Lane quick_, long_;
};

}  // namespace skyjoin::jobs
