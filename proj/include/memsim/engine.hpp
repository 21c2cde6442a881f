#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "memsim/json_io.hpp"
#include "memsim/session.hpp"

namespace memsim {

/// One telemetry message. `data` is a JSON document.
struct TelemetryFrame {
    std::uint64_t seq = 0;
    std::string event;  // snapshot, tick, state, attack, end
    std::string data;

    friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

/// A subscriber's bounded queue. When full, the oldest tick frame is dropped;
/// lifecycle frames are never dropped and order is never changed.
class TelemetrySubscription {
public:
    TelemetrySubscription(std::uint64_t decimation, std::size_t capacity);

    /// Next frame, or nullopt after `timeout` or once finished.
    std::optional<TelemetryFrame> next(std::chrono::milliseconds timeout);
    /// True once the terminal frame has been read.
    bool finished() const;
    std::uint64_t decimation() const noexcept { return decimation_; }
    std::uint64_t dropped() const;

private:
    friend class TelemetryHub;
    void push(TelemetryFrame frame, bool droppable);
    void close();

    const std::uint64_t decimation_;
    const std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::pair<TelemetryFrame, bool>> queue_;
    bool closed_ = false;
    std::uint64_t dropped_ = 0;
};

/// Single-producer, many-subscriber fan-out for one session. Every frame gets
/// the next sequence number, so all subscribers see one total order.
class TelemetryHub {
public:
    TelemetryHub(std::uint64_t session_id, std::string config_digest, std::size_t buffer_capacity);

    /// New subscribers first get a snapshot of the current state; if the
    /// session has already ended they also get the terminal frame.
    std::shared_ptr<TelemetrySubscription> subscribe(std::uint64_t decimation);
    void unsubscribe(const std::shared_ptr<TelemetrySubscription>& sub);
    std::size_t subscriber_count() const;

    void publish_tick(std::uint64_t tick, const TickRecord& record);
    void publish_state(SessionState state, double sim_time);
    void publish_attack(const SessionEvent& event);
    void publish_end(SessionState state, double sim_time, std::optional<std::uint64_t> fault_tick);
    /// Forget the previous run (session reset); the stream continues.
    void restart();

private:
    void broadcast(const std::string& event, std::string data);
    std::string snapshot_locked() const;

    const std::uint64_t session_id_;
    const std::string digest_;
    const std::size_t capacity_;
    mutable std::mutex mutex_;
    std::vector<std::shared_ptr<TelemetrySubscription>> subs_;
    std::uint64_t seq_ = 0;
    SessionState state_ = SessionState::Created;
    double sim_time_ = 0.0;
    std::optional<std::pair<std::uint64_t, TickRecord>> last_tick_;
    std::optional<AttackConfig> attack_;
    std::optional<std::string> end_frame_;
};

/// JSON payload of a tick frame.
Json tick_payload(std::uint64_t tick, const TickRecord& record);
Json event_payload(const SessionEvent& event);

struct ActorOptions {
    double pace = 0.0;                  // sim seconds per wall second; 0 runs flat out
    std::size_t telemetry_buffer = 1024;
    std::uint64_t chunk_ticks = 100;    // ticks simulated between command checks
};

struct SessionSummary {
    std::uint64_t id = 0;
    SessionState state = SessionState::Created;
    double sim_time = 0.0;
    std::uint64_t ticks_done = 0;
    std::uint64_t total_ticks = 0;
    std::string config_digest;
    std::optional<AttackConfig> attack;
    std::optional<std::uint64_t> fault_tick;
    std::string fault_reason;
};

Json to_json(const SessionSummary& summary);

/// Owns one session on its own worker thread. Lifecycle commands and attack
/// updates go through one ordered queue and take effect between ticks.
class SessionActor {
public:
    /// Throws ValidationError if the config is invalid.
    SessionActor(std::uint64_t id, ScenarioConfig config, ActorOptions options = {});
    ~SessionActor();
    SessionActor(const SessionActor&) = delete;
    SessionActor& operator=(const SessionActor&) = delete;

    std::uint64_t id() const noexcept { return id_; }
    const ScenarioConfig& config() const noexcept { return config_; }

    /// created/paused -> running, optionally pausing at sim time `until`.
    /// Throws LifecycleError on any other state.
    void start(std::optional<double> until = std::nullopt);
    /// running -> paused. Throws LifecycleError otherwise.
    void pause();
    /// Back to created with the frozen config and seed.
    void reset();
    /// Throws ValidationError or LifecycleError.
    SessionEvent apply_attack(const AttackConfig& attack);

    SessionSummary summary() const;
    SessionLog log_snapshot() const;
    /// Blocks until the session is not running; false on timeout.
    bool wait_idle(std::chrono::milliseconds timeout) const;

    TelemetryHub& telemetry() noexcept { return hub_; }

private:
    struct Start {
        std::optional<double> until;
    };
    struct Pause {};
    struct Reset {};
    struct Attack {
        AttackConfig attack;
    };
    using Command = std::variant<Start, Pause, Reset, Attack>;
    struct Pending {
        Command command;
        std::promise<std::optional<SessionEvent>> done;
    };

    std::optional<SessionEvent> submit(Command command);
    std::optional<SessionEvent> execute(const Command& command);
    void worker();
    void run_chunk(std::unique_lock<std::mutex>& lock);
    void set_state(SessionState state);

    const std::uint64_t id_;
    const ScenarioConfig config_;
    const ActorOptions options_;
    TelemetryHub hub_;

    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    std::deque<Pending> queue_;
    std::unique_ptr<Session> session_;
    SessionState state_ = SessionState::Created;
    std::uint64_t until_tick_ = 0;
    std::chrono::steady_clock::time_point pace_wall_;
    std::uint64_t pace_tick_ = 0;
    bool stop_ = false;
    std::thread thread_;
};

/// Registry of live sessions with monotonically increasing ids.
class SessionManager {
public:
    explicit SessionManager(ActorOptions options = {});

    /// Throws ValidationError if the config is invalid.
    std::shared_ptr<SessionActor> create(ScenarioConfig config);
    std::shared_ptr<SessionActor> find(std::uint64_t id) const;
    std::vector<std::shared_ptr<SessionActor>> list() const;

private:
    ActorOptions options_;
    mutable std::mutex mutex_;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, std::shared_ptr<SessionActor>> sessions_;
};

}  // namespace memsim
