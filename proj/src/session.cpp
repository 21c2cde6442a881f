#include "memsim/session.hpp"

#include <cmath>
#include <stdexcept>

namespace memsim {

namespace {

bool finite(const VehicleState& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) && std::isfinite(s.v) &&
           std::isfinite(s.yaw_rate) && std::isfinite(s.a_long) && std::isfinite(s.omega_wheel_left) &&
           std::isfinite(s.omega_wheel_right) && std::isfinite(s.wheel_angle_left) &&
           std::isfinite(s.wheel_angle_right);
}

bool finite(const TickRecord& r) {
    return finite(r.truth) && std::isfinite(r.imu.accel.x) && std::isfinite(r.imu.accel.y) &&
           std::isfinite(r.imu.accel.z) && std::isfinite(r.imu.gyro_z) && std::isfinite(r.wheel.omega_left) &&
           std::isfinite(r.wheel.omega_right) && std::isfinite(r.control.a_long) &&
           std::isfinite(r.control.yaw_rate) && std::isfinite(r.control.brake) && std::isfinite(r.control.v_est) &&
           std::isfinite(r.pressure);
}

VehicleState initial_state(const ScenarioConfig& cfg) {
    VehicleState s;
    s.heading = wrap_angle(cfg.setpoints.heading_set);
    s.v = cfg.initial_speed;
    const WheelSpeeds w = wheel_speeds(s.v, 0.0, cfg.vehicle);
    s.omega_wheel_left = w.omega_left;
    s.omega_wheel_right = w.omega_right;
    return s;
}

ScenarioConfig checked(ScenarioConfig cfg) {
    validate(cfg);
    return cfg;
}

}  // namespace

std::string to_string(SessionState state) {
    switch (state) {
        case SessionState::Created: return "created";
        case SessionState::Running: return "running";
        case SessionState::Paused: return "paused";
        case SessionState::Completed: return "completed";
        case SessionState::Faulted: return "faulted";
    }
    return "unknown";
}

std::string to_string(SessionEventKind kind) {
    return kind == SessionEventKind::AttackApplied ? "attack_applied" : "attack_replaced";
}

Session::Session(ScenarioConfig config)
    : log_{checked(std::move(config)), {}, {}, std::nullopt},
      noise_(log_.config.seed),
      encoder_(log_.config.sensors.encoder, log_.config.sensors.mems.sample_rate, log_.config.vehicle) {
    vehicle_ = initial_state(log_.config);
    controller_ = ControllerState::starting_at(vehicle_.heading, vehicle_.v);
    if (log_.config.attack) {
        AttackConfig attack = *log_.config.attack;
        if (!attack.start_t) attack.start_t = 0.0;
        set_attack(attack);
    }
    log_.records.reserve(static_cast<std::size_t>(total_ticks()));
}

double Session::sim_time() const noexcept { return log_.records.empty() ? 0.0 : log_.records.back().t; }

void Session::set_attack(const AttackConfig& attack) {
    attack_ = attack;
    exposure_ = exposure_for(attack);
}

const SessionEvent& Session::apply_attack(AttackConfig attack) {
    if (state_ == SessionState::Completed || state_ == SessionState::Faulted) {
        throw LifecycleError("cannot apply an attack to a " + to_string(state_) + " session");
    }
    IssueList issues;
    issues.merge(validate(attack), "attack");
    issues.throw_if_any();
    if (!attack.start_t) attack.start_t = sim_time();

    SessionEvent event;
    event.tick = next_tick_;
    event.t = sim_time();
    event.kind = attack_ ? SessionEventKind::AttackReplaced : SessionEventKind::AttackApplied;
    event.attack = attack;
    set_attack(attack);
    log_.events.push_back(event);
    return log_.events.back();
}

std::uint64_t Session::run(double until_t, const TickObserver& observer) {
    if (std::isnan(until_t)) throw std::invalid_argument("until_t must be a number");
    const double dt = log_.config.dt;
    std::uint64_t end = total_ticks();
    if (until_t < 0.0) {
        end = 0;
    } else if (until_t / dt < static_cast<double>(end)) {
        end = std::min(end, static_cast<std::uint64_t>(std::floor(until_t / dt + 1e-9)) + 1);
    }
    return run_ticks_until(end, observer);
}

std::uint64_t Session::run_to_end(const TickObserver& observer) { return run_ticks_until(total_ticks(), observer); }

std::uint64_t Session::run_ticks_until(std::uint64_t end_tick, const TickObserver& observer) {
    if (state_ != SessionState::Created && state_ != SessionState::Paused) {
        throw LifecycleError("cannot run a " + to_string(state_) + " session");
    }
    end_tick = std::min(end_tick, total_ticks());
    state_ = SessionState::Running;
    std::uint64_t done = 0;
    while (next_tick_ < end_tick) {
        if (!simulate_tick(next_tick_, observer)) {
            state_ = SessionState::Faulted;
            return done;
        }
        ++next_tick_;
        ++done;
    }
    state_ = next_tick_ >= total_ticks() ? SessionState::Completed : SessionState::Paused;
    return done;
}

bool Session::simulate_tick(std::uint64_t k, const TickObserver& observer) {
    const ScenarioConfig& cfg = log_.config;
    const double t = static_cast<double>(k) * cfg.dt;
    try {
        TickRecord record;
        record.t = t;
        record.pressure = attack_ ? exposure_.pressure(t) : 0.0;

        const std::uint64_t substeps = cfg.substeps();
        if (k % substeps == 0) {
            const std::uint64_t sample = k / substeps;
            const TrueKinematics kin{vehicle_.a_long, vehicle_.v * vehicle_.yaw_rate, vehicle_.yaw_rate};
            imu_ = sample_imu(kin, exposure_, cfg.sensors.mems, sample, noise_);
            wheel_ = encoder_.sample(vehicle_, sample);
            const ControlMode mode =
                cfg.scenario_kind == ScenarioKind::Cruise ? ControlMode::Cruise : ControlMode::BrakeTest;
            control_ = control_tick(controller_, cfg.controller, mode, cfg.setpoints, imu_, wheel_,
                                    1.0 / cfg.sensors.mems.sample_rate, cfg.vehicle.wheel_radius);
        }
        record.truth = vehicle_;
        record.truth.t = t;
        record.imu = imu_;
        record.wheel = wheel_;
        record.control = control_;
        if (!finite(record)) {
            log_.fault_tick = k;
            fault_reason_ = "non-finite value in tick record";
            return false;
        }
        log_.records.push_back(record);
        if (observer) observer(k, log_.records.back());

        if (cfg.scenario_kind == ScenarioKind::Cruise) {
            vehicle_ = step_vehicle(vehicle_, DriveCommand{control_.a_long, control_.yaw_rate}, cfg.dt, cfg.vehicle);
        } else {
            vehicle_ = step_braking(vehicle_, BrakeCommand{control_.brake, control_.yaw_rate}, cfg.dt, cfg.vehicle);
        }
        // Re-derive time from the index so it never accumulates rounding.
        vehicle_.t = static_cast<double>(k + 1) * cfg.dt;
        if (!finite(vehicle_)) {
            log_.fault_tick = k;
            fault_reason_ = "vehicle state diverged";
            return false;
        }
    } catch (const std::exception& e) {
        log_.fault_tick = k;
        fault_reason_ = e.what();
        return false;
    }
    return true;
}

SessionLog replay(const ScenarioConfig& config, const std::vector<SessionEvent>& events) {
    Session session(config);
    for (const SessionEvent& event : events) {
        if (event.tick < session.next_tick()) throw std::invalid_argument("event schedule is not ordered by tick");
        if (event.tick > 0) session.run_ticks_until(event.tick);
        if (session.state() == SessionState::Faulted || session.state() == SessionState::Completed) break;
        session.apply_attack(event.attack);
    }
    if (session.state() == SessionState::Created || session.state() == SessionState::Paused) session.run_to_end();
    return session.log();
}

}  // namespace memsim
