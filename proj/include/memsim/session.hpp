#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "memsim/attacker.hpp"
#include "memsim/control.hpp"
#include "memsim/scenario.hpp"
#include "memsim/sensors.hpp"
#include "memsim/vehicle.hpp"

namespace memsim {

/// Everything known about one plant tick. `truth` is the state at time t,
/// before the step that the recorded command drives. Between control ticks
/// the sensor and control fields hold their last values.
struct TickRecord {
    double t = 0.0;
    VehicleState truth;
    ImuSample imu;
    WheelSample wheel;
    ControlOutput control;
    double pressure = 0.0;  // acoustic pressure at the sensor, Pa

    friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

enum class SessionEventKind { AttackApplied, AttackReplaced };

/// A live change to the session. The attack is stored with start_t resolved,
/// so replaying the event needs no knowledge of when it was issued.
struct SessionEvent {
    std::uint64_t tick = 0;  // first tick the change affects
    double t = 0.0;          // sim time when it was issued
    SessionEventKind kind = SessionEventKind::AttackApplied;
    AttackConfig attack;

    friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

struct SessionLog {
    ScenarioConfig config;
    std::vector<SessionEvent> events;
    std::vector<TickRecord> records;
    std::optional<std::uint64_t> fault_tick;

    friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

enum class SessionState { Created, Running, Paused, Completed, Faulted };

std::string to_string(SessionState state);
std::string to_string(SessionEventKind kind);

using TickObserver = std::function<void(std::uint64_t tick, const TickRecord& record)>;

/// One deterministic simulation. Per tick: attacker pressure, sensor sampling
/// (on control ticks), controller, record, plant step.
class Session {
public:
    /// Throws ValidationError if the config is invalid.
    explicit Session(ScenarioConfig config);

    const ScenarioConfig& config() const noexcept { return log_.config; }
    const SessionLog& log() const noexcept { return log_; }
    SessionState state() const noexcept { return state_; }

    /// Index of the next tick to simulate.
    std::uint64_t next_tick() const noexcept { return next_tick_; }
    /// Time of the last recorded tick, 0 before the first.
    double sim_time() const noexcept;
    std::uint64_t total_ticks() const noexcept { return log_.config.last_tick() + 1; }

    const std::optional<AttackConfig>& active_attack() const noexcept { return attack_; }
    const std::string& fault_reason() const noexcept { return fault_reason_; }

    /// Simulates every tick with t <= until_t (capped at the duration) and
    /// leaves the session Paused, or Completed at the end. Returns the number
    /// of ticks simulated. Throws LifecycleError unless Created or Paused.
    std::uint64_t run(double until_t, const TickObserver& observer = {});
    std::uint64_t run_to_end(const TickObserver& observer = {});
    /// Simulates ticks up to (excluding) end_tick.
    std::uint64_t run_ticks_until(std::uint64_t end_tick, const TickObserver& observer = {});

    /// Installs or replaces the attack from the next tick on. An unset
    /// start_t becomes the current sim time. Throws ValidationError on an
    /// invalid attack and LifecycleError once Completed or Faulted.
    const SessionEvent& apply_attack(AttackConfig attack);

private:
    void set_attack(const AttackConfig& attack);
    bool simulate_tick(std::uint64_t k, const TickObserver& observer);

    SessionLog log_;
    SessionState state_ = SessionState::Created;
    std::uint64_t next_tick_ = 0;
    std::string fault_reason_;

    VehicleState vehicle_;
    ControllerState controller_;
    NoiseStreams noise_;
    WheelEncoder encoder_;
    std::optional<AttackConfig> attack_;
    AcousticExposure exposure_;
    ImuSample imu_;
    WheelSample wheel_;
    ControlOutput control_;
};

/// Re-runs a config with a recorded event schedule; reproduces the original
/// log bit for bit.
SessionLog replay(const ScenarioConfig& config, const std::vector<SessionEvent>& events);

}  // namespace memsim
