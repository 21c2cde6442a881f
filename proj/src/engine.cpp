#include "memsim/engine.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

// ---- telemetry -------------------------------------------------------------

TelemetrySubscription::TelemetrySubscription(std::uint64_t decimation, std::size_t capacity)
    : decimation_(std::max<std::uint64_t>(decimation, 1)), capacity_(std::max<std::size_t>(capacity, 1)) {}

void TelemetrySubscription::push(TelemetryFrame frame, bool droppable) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        if (queue_.size() >= capacity_) {
            auto oldest = std::find_if(queue_.begin(), queue_.end(), [](const auto& f) { return f.second; });
            if (oldest != queue_.end()) {
                queue_.erase(oldest);
                ++dropped_;
            } else if (droppable) {
                ++dropped_;
                return;
            }
        }
        queue_.emplace_back(std::move(frame), droppable);
    }
    cv_.notify_all();
}

void TelemetrySubscription::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

std::optional<TelemetryFrame> TelemetrySubscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    TelemetryFrame frame = std::move(queue_.front().first);
    queue_.pop_front();
    return frame;
}

bool TelemetrySubscription::finished() const {
    std::lock_guard lock(mutex_);
    return closed_ && queue_.empty();
}

std::uint64_t TelemetrySubscription::dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
}

Json tick_payload(std::uint64_t tick, const TickRecord& r) {
    Json j;
    j["tick"] = tick;
    j["t"] = r.t;
    j["x"] = r.truth.x;
    j["y"] = r.truth.y;
    j["heading"] = r.truth.heading;
    j["v_true"] = r.truth.v;
    j["v_est"] = r.control.v_est;
    j["v_wheel"] = r.control.diag.v_wheel;
    j["ax_imu"] = r.imu.accel.x;
    j["pressure"] = r.pressure;
    j["cmd_a"] = r.control.a_long;
    j["cmd_yaw"] = r.control.yaw_rate;
    j["brake"] = r.control.brake;
    return j;
}

Json event_payload(const SessionEvent& e) {
    Json j;
    j["tick"] = e.tick;
    j["t"] = e.t;
    j["kind"] = to_string(e.kind);
    j["attack"] = to_json(e.attack);
    return j;
}

TelemetryHub::TelemetryHub(std::uint64_t session_id, std::string config_digest, std::size_t buffer_capacity)
    : session_id_(session_id), digest_(std::move(config_digest)), capacity_(buffer_capacity) {}

std::string TelemetryHub::snapshot_locked() const {
    Json j;
    j["id"] = session_id_;
    j["state"] = to_string(state_);
    j["sim_time"] = sim_time_;
    j["config_digest"] = digest_;
    j["attack"] = attack_ ? to_json(*attack_) : Json(nullptr);
    j["last"] = last_tick_ ? tick_payload(last_tick_->first, last_tick_->second) : Json(nullptr);
    return j.dump();
}

std::shared_ptr<TelemetrySubscription> TelemetryHub::subscribe(std::uint64_t decimation) {
    auto sub = std::make_shared<TelemetrySubscription>(decimation, capacity_);
    std::lock_guard lock(mutex_);
    sub->push({seq_, "snapshot", snapshot_locked()}, false);
    if (end_frame_) {
        sub->push({seq_, "end", *end_frame_}, false);
        sub->close();
    } else {
        subs_.push_back(sub);
    }
    return sub;
}

void TelemetryHub::unsubscribe(const std::shared_ptr<TelemetrySubscription>& sub) {
    std::lock_guard lock(mutex_);
    subs_.erase(std::remove(subs_.begin(), subs_.end(), sub), subs_.end());
}

std::size_t TelemetryHub::subscriber_count() const {
    std::lock_guard lock(mutex_);
    return subs_.size();
}

void TelemetryHub::broadcast(const std::string& event, std::string data) {
    const std::uint64_t seq = ++seq_;
    for (const auto& sub : subs_) sub->push({seq, event, data}, false);
}

void TelemetryHub::publish_tick(std::uint64_t tick, const TickRecord& record) {
    std::lock_guard lock(mutex_);
    const std::uint64_t seq = ++seq_;
    last_tick_.emplace(tick, record);
    sim_time_ = record.t;
    std::string data;
    for (const auto& sub : subs_) {
        if (tick % sub->decimation() != 0) continue;
        if (data.empty()) data = tick_payload(tick, record).dump();
        sub->push({seq, "tick", data}, true);
    }
}

void TelemetryHub::publish_state(SessionState state, double sim_time) {
    std::lock_guard lock(mutex_);
    state_ = state;
    sim_time_ = sim_time;
    Json j;
    j["state"] = to_string(state);
    j["sim_time"] = sim_time;
    broadcast("state", j.dump());
}

void TelemetryHub::publish_attack(const SessionEvent& event) {
    std::lock_guard lock(mutex_);
    attack_ = event.attack;
    broadcast("attack", event_payload(event).dump());
}

void TelemetryHub::publish_end(SessionState state, double sim_time, std::optional<std::uint64_t> fault_tick) {
    std::lock_guard lock(mutex_);
    state_ = state;
    sim_time_ = sim_time;
    Json j;
    j["state"] = to_string(state);
    j["sim_time"] = sim_time;
    j["fault_tick"] = fault_tick ? Json(*fault_tick) : Json(nullptr);
    end_frame_ = j.dump();
    broadcast("end", *end_frame_);
    for (const auto& sub : subs_) sub->close();
    subs_.clear();
}

void TelemetryHub::restart() {
    std::lock_guard lock(mutex_);
    last_tick_.reset();
    attack_.reset();
    end_frame_.reset();
    sim_time_ = 0.0;
}

// ---- actor -----------------------------------------------------------------

Json to_json(const SessionSummary& s) {
    Json j;
    j["id"] = s.id;
    j["state"] = to_string(s.state);
    j["sim_time"] = s.sim_time;
    j["ticks_done"] = s.ticks_done;
    j["total_ticks"] = s.total_ticks;
    j["config_digest"] = s.config_digest;
    j["attack"] = s.attack ? to_json(*s.attack) : Json(nullptr);
    j["fault_tick"] = s.fault_tick ? Json(*s.fault_tick) : Json(nullptr);
    if (!s.fault_reason.empty()) j["fault_reason"] = s.fault_reason;
    return j;
}

namespace {

ScenarioConfig validated(ScenarioConfig cfg) {
    validate(cfg);
    return cfg;
}

}  // namespace

SessionActor::SessionActor(std::uint64_t id, ScenarioConfig config, ActorOptions options)
    : id_(id),
      config_(validated(std::move(config))),
      options_(options),
      hub_(id, config_digest(config_), options.telemetry_buffer),
      session_(std::make_unique<Session>(config_)) {
    if (config_.attack) hub_.publish_attack(SessionEvent{0, 0.0, SessionEventKind::AttackApplied,
                                                         *session_->active_attack()});
    thread_ = std::thread([this] { worker(); });
}

SessionActor::~SessionActor() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

std::optional<SessionEvent> SessionActor::submit(Command command) {
    std::future<std::optional<SessionEvent>> result;
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(Pending{std::move(command), {}});
        result = queue_.back().done.get_future();
    }
    cv_.notify_all();
    return result.get();
}

void SessionActor::start(std::optional<double> until) { submit(Start{until}); }
void SessionActor::pause() { submit(Pause{}); }
void SessionActor::reset() { submit(Reset{}); }

SessionEvent SessionActor::apply_attack(const AttackConfig& attack) {
    IssueList issues;
    issues.merge(validate(attack), "attack");
    issues.throw_if_any();
    return *submit(Attack{attack});
}

void SessionActor::set_state(SessionState state) {
    state_ = state;
    cv_.notify_all();
    if (state == SessionState::Completed || state == SessionState::Faulted) {
        hub_.publish_end(state, session_->sim_time(), session_->log().fault_tick);
    } else {
        hub_.publish_state(state, session_->sim_time());
    }
}

std::optional<SessionEvent> SessionActor::execute(const Command& command) {
    if (const auto* start = std::get_if<Start>(&command)) {
        if (state_ != SessionState::Created && state_ != SessionState::Paused) {
            throw LifecycleError("cannot start a " + to_string(state_) + " session");
        }
        until_tick_ = session_->total_ticks();
        if (start->until) {
            const double ticks = std::floor(*start->until / config_.dt + 1e-9) + 1.0;
            if (std::isnan(ticks)) throw std::invalid_argument("until must be a number");
            if (ticks < static_cast<double>(until_tick_)) {
                until_tick_ = ticks <= 0.0 ? 0 : static_cast<std::uint64_t>(ticks);
            }
        }
        pace_wall_ = std::chrono::steady_clock::now();
        pace_tick_ = session_->next_tick();
        set_state(SessionState::Running);
        return std::nullopt;
    }
    if (std::holds_alternative<Pause>(command)) {
        if (state_ != SessionState::Running) throw LifecycleError("cannot pause a " + to_string(state_) + " session");
        set_state(SessionState::Paused);
        return std::nullopt;
    }
    if (std::holds_alternative<Reset>(command)) {
        session_ = std::make_unique<Session>(config_);
        hub_.restart();
        set_state(SessionState::Created);
        if (config_.attack) {
            hub_.publish_attack(SessionEvent{0, 0.0, SessionEventKind::AttackApplied, *session_->active_attack()});
        }
        return std::nullopt;
    }
    const auto& attack = std::get<Attack>(command);
    if (state_ == SessionState::Completed || state_ == SessionState::Faulted) {
        throw LifecycleError("cannot apply an attack to a " + to_string(state_) + " session");
    }
    const SessionEvent event = session_->apply_attack(attack.attack);
    hub_.publish_attack(event);
    return event;
}

void SessionActor::run_chunk(std::unique_lock<std::mutex>& lock) {
    std::uint64_t end = std::min(session_->next_tick() + options_.chunk_ticks, until_tick_);
    if (options_.pace > 0.0) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - pace_wall_).count();
        const auto allowed = pace_tick_ + static_cast<std::uint64_t>(wall * options_.pace / config_.dt) + 1;
        if (allowed <= session_->next_tick()) {
            const double wait_s =
                static_cast<double>(session_->next_tick() - pace_tick_) * config_.dt / options_.pace - wall;
            cv_.wait_for(lock, std::chrono::duration<double>(std::max(wait_s, 1e-4)),
                         [&] { return stop_ || !queue_.empty(); });
            return;
        }
        end = std::min(end, allowed);
    }
    if (session_->next_tick() < end) {
        session_->run_ticks_until(end, [&](std::uint64_t k, const TickRecord& r) { hub_.publish_tick(k, r); });
    }
    if (session_->state() == SessionState::Faulted) {
        set_state(SessionState::Faulted);
    } else if (session_->state() == SessionState::Completed) {
        set_state(SessionState::Completed);
    } else if (session_->next_tick() >= until_tick_) {
        set_state(SessionState::Paused);
    }
}

void SessionActor::worker() {
    std::unique_lock lock(mutex_);
    while (true) {
        cv_.wait(lock, [&] { return stop_ || !queue_.empty() || state_ == SessionState::Running; });
        if (stop_) break;
        while (!queue_.empty()) {
            Pending pending = std::move(queue_.front());
            queue_.pop_front();
            try {
                pending.done.set_value(execute(pending.command));
            } catch (...) {
                pending.done.set_exception(std::current_exception());
            }
        }
        cv_.notify_all();
        if (state_ == SessionState::Running) run_chunk(lock);
    }
    for (auto& pending : queue_) {
        pending.done.set_exception(std::make_exception_ptr(LifecycleError("session is shutting down")));
    }
}

SessionSummary SessionActor::summary() const {
    std::lock_guard lock(mutex_);
    SessionSummary s;
    s.id = id_;
    s.state = state_;
    s.sim_time = session_->sim_time();
    s.ticks_done = session_->next_tick();
    s.total_ticks = session_->total_ticks();
    s.config_digest = config_digest(config_);
    s.attack = session_->active_attack();
    s.fault_tick = session_->log().fault_tick;
    s.fault_reason = session_->fault_reason();
    return s;
}

SessionLog SessionActor::log_snapshot() const {
    std::lock_guard lock(mutex_);
    return session_->log();
}

bool SessionActor::wait_idle(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return state_ != SessionState::Running && queue_.empty(); });
}

// ---- manager ---------------------------------------------------------------

SessionManager::SessionManager(ActorOptions options) : options_(options) {}

std::shared_ptr<SessionActor> SessionManager::create(ScenarioConfig config) {
    validate(config);
    std::lock_guard lock(mutex_);
    const std::uint64_t id = next_id_++;
    auto actor = std::make_shared<SessionActor>(id, std::move(config), options_);
    sessions_.emplace(id, actor);
    return actor;
}

std::shared_ptr<SessionActor> SessionManager::find(std::uint64_t id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::shared_ptr<SessionActor>> SessionManager::list() const {
    std::lock_guard lock(mutex_);
    std::vector<std::shared_ptr<SessionActor>> out;
    for (const auto& [id, actor] : sessions_) out.push_back(actor);
    return out;
}

}  // namespace memsim
