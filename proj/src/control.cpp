#include "memsim/control.hpp"

#include <algorithm>
#include <cmath>

#include "memsim/vehicle.hpp"

namespace memsim {

std::vector<FieldIssue> validate(const PidGains& g) {
    IssueList issues;
    issues.require(std::isfinite(g.kp) && g.kp >= 0.0, "kp", "must be finite and >= 0");
    issues.require(std::isfinite(g.ki) && g.ki >= 0.0, "ki", "must be finite and >= 0");
    issues.require(std::isfinite(g.kd) && g.kd >= 0.0, "kd", "must be finite and >= 0");
    issues.require(std::isfinite(g.output_min) && std::isfinite(g.output_max) && g.output_min < g.output_max,
                   "output_min", "must be below output_max");
    return issues.issues();
}

PidStep pid_step_error(const PidGains& gains, const PidState& state, double error, double dt) {
    const double derivative = state.has_prev ? (error - state.prev_error) / dt : 0.0;
    const double candidate = state.integrator + error * dt;
    const double unclamped = gains.kp * error + gains.ki * candidate + gains.kd * derivative;
    const bool inside = unclamped >= gains.output_min && unclamped <= gains.output_max;
    const bool unwinding = (unclamped > gains.output_max && error < 0.0) ||
                           (unclamped < gains.output_min && error > 0.0);

    PidStep out;
    out.state.integrator = (inside || unwinding) ? candidate : state.integrator;
    out.state.prev_error = error;
    out.state.has_prev = true;
    const double raw = gains.kp * error + gains.ki * out.state.integrator + gains.kd * derivative;
    out.command = std::clamp(raw, gains.output_min, gains.output_max);
    return out;
}

PidStep pid_step(const PidGains& gains, const PidState& state, double setpoint, double measurement, double dt) {
    return pid_step_error(gains, state, setpoint - measurement, dt);
}

std::vector<FieldIssue> validate(const FusionConfig& cfg) {
    IssueList issues;
    issues.require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "alpha", "must be within [0, 1]");
    issues.require(std::isfinite(cfg.slip_threshold) && cfg.slip_threshold > 0.0, "slip_threshold", "must be > 0");
    return issues.issues();
}

double fuse_velocity(double v_imu, double v_wheel, const FusionConfig& cfg) {
    if (!cfg.fusion_enabled) return v_imu;
    return cfg.alpha * v_wheel + (1.0 - cfg.alpha) * v_imu;
}

SlipState detect_slip(double v_est_imu, double v_wheel, const FusionConfig& cfg) {
    const double ratio = (v_est_imu - v_wheel) / std::max(v_est_imu, 0.1);
    return {ratio > cfg.slip_threshold, ratio};
}

std::vector<FieldIssue> validate(const AbsConfig& cfg) {
    IssueList issues;
    issues.require(std::isfinite(cfg.apply_rate) && cfg.apply_rate > 0.0, "apply_rate", "must be > 0");
    issues.require(std::isfinite(cfg.release_rate) && cfg.release_rate > 0.0, "release_rate", "must be > 0");
    issues.require(std::isfinite(cfg.min_speed) && cfg.min_speed >= 0.0, "min_speed", "must be >= 0");
    issues.require(cfg.requested_pressure >= 0.0 && cfg.requested_pressure <= 1.0, "requested_pressure",
                   "must be within [0, 1]");
    return issues.issues();
}

double abs_modulate(double current, double requested, bool slipping, double dt, const AbsConfig& cfg) {
    double next = current;
    if (slipping) {
        next = current - cfg.release_rate * dt;
    } else {
        const double step = cfg.apply_rate * dt;
        next = current + std::clamp(requested - current, -step, step);
    }
    return std::clamp(next, 0.0, 1.0);
}

std::vector<FieldIssue> validate(const ControllerConfig& cfg) {
    IssueList issues;
    issues.merge(validate(cfg.speed_pid), "speed_pid");
    issues.merge(validate(cfg.heading_pid), "heading_pid");
    issues.merge(validate(cfg.fusion), "fusion");
    issues.merge(validate(cfg.abs), "abs");
    return issues.issues();
}

ControllerState ControllerState::starting_at(double heading) {
    ControllerState state;
    state.heading_est = heading;
    return state;
}

ControllerState ControllerState::starting_at(double heading, double speed) {
    ControllerState state = starting_at(heading);
    state.v_est = speed;
    state.initialized = true;
    return state;
}

ControlOutput control_tick(ControllerState& state, const ControllerConfig& cfg, ControlMode mode,
                           const Setpoints& setpoints, const std::optional<ImuSample>& imu,
                           const std::optional<WheelSample>& wheel, double dt, double wheel_radius) {
    if (!imu || !wheel) {
        ControlOutput held = state.last;
        held.diag.missing_sample = true;
        return held;
    }

    ControlOutput out;
    const double v_wheel = wheel->speed(wheel_radius);
    double v_imu = v_wheel;
    if (state.initialized) {
        v_imu = integrate_imu_velocity(state.v_est, imu->accel.x, dt);
        state.heading_est = wrap_angle(state.heading_est + imu->gyro_z * dt);
    }
    state.initialized = true;

    if (mode == ControlMode::Cruise) {
        // Wheels that look like they are slipping are not trusted this tick.
        const SlipState slip = detect_slip(std::max(v_imu, 0.0), v_wheel, cfg.fusion);
        state.v_est = cfg.fusion.fusion_enabled && slip.slipping ? v_imu : fuse_velocity(v_imu, v_wheel, cfg.fusion);
        out.diag.slip_ratio = slip.slip_ratio;
        out.diag.slipping = slip.slipping;
        const PidStep speed = pid_step(cfg.speed_pid, state.speed, setpoints.v_set, state.v_est, dt);
        state.speed = speed.state;
        out.a_long = speed.command;
    } else {
        // Braking: wheels are what we are checking, so the IMU alone is the
        // speed reference.
        state.v_est = v_imu;
        const SlipState slip = detect_slip(std::max(state.v_est, 0.0), v_wheel, cfg.fusion);
        const double requested = cfg.abs.requested_pressure;
        if (cfg.abs.enabled && state.v_est > cfg.abs.min_speed) {
            if (slip.slipping) state.abs_engaged = true;
            state.brake_pressure = state.abs_engaged
                                       ? abs_modulate(state.brake_pressure, requested, slip.slipping, dt, cfg.abs)
                                       : requested;
        } else {
            state.brake_pressure = requested;
        }
        out.brake = state.brake_pressure;
        out.diag.slip_ratio = slip.slip_ratio;
        out.diag.slipping = slip.slipping;
        out.diag.abs_engaged = state.abs_engaged && cfg.abs.enabled && state.v_est > cfg.abs.min_speed;
    }

    const double heading_error = wrap_angle(setpoints.heading_set - state.heading_est);
    const PidStep heading = pid_step_error(cfg.heading_pid, state.heading, heading_error, dt);
    state.heading = heading.state;
    out.yaw_rate = heading.command;

    out.v_est = state.v_est;
    out.diag.v_imu = v_imu;
    out.diag.v_wheel = v_wheel;
    out.diag.heading_est = state.heading_est;
    out.diag.heading_error = heading_error;
    state.last = out;
    return out;
}

}  // namespace memsim
