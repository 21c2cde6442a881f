#include "memsim/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memsim {

namespace {

constexpr double kStraightYawEps = 1e-9;

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw std::invalid_argument(std::string("non-finite ") + what);
}

void check_step_inputs(const VehicleState& s, double dt) {
    require_finite(dt, "dt");
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    for (double value : {s.t, s.x, s.y, s.heading, s.v, s.yaw_rate, s.a_long, s.omega_wheel_left,
                         s.omega_wheel_right, s.wheel_angle_left, s.wheel_angle_right}) {
        require_finite(value, "vehicle state");
    }
    if (s.v < 0.0) throw std::invalid_argument("vehicle speed must be non-negative");
}

struct Travel {
    double distance = 0.0;  // arc length covered during the step
    double v_end = 0.0;
};

// Constant acceleration over dt, stopping (not reversing) at zero speed.
Travel travel(double v0, double accel, double dt) {
    const double v1 = v0 + accel * dt;
    if (v1 >= 0.0) return {(v0 + 0.5 * accel * dt) * dt, v1};
    return {v0 * v0 / (2.0 * -accel), 0.0};
}

// Moves the pose along an arc of the given length and heading change.
void advance_pose(VehicleState& s, double distance, double yaw_rate, double dt) {
    const double dpsi = yaw_rate * dt;
    if (std::abs(yaw_rate) < kStraightYawEps) {
        s.x += distance * std::cos(s.heading);
        s.y += distance * std::sin(s.heading);
    } else {
        const double radius = distance / dpsi;
        s.x += radius * (std::sin(s.heading + dpsi) - std::sin(s.heading));
        s.y += radius * (std::cos(s.heading) - std::cos(s.heading + dpsi));
        s.heading = wrap_angle(s.heading + dpsi);
    }
}

}  // namespace

VehicleParams VehicleParams::rc_scale() {
    VehicleParams p;
    p.wheel_radius = 0.033;
    p.track_width = 0.16;
    p.mass = 2.5;
    p.max_accel = 2.0;
    p.max_brake_decel = 6.0;
    p.mu_peak = 0.8;
    p.slip_lock_threshold = 0.15;
    return p;
}

std::vector<FieldIssue> validate(const VehicleParams& p) {
    IssueList issues;
    issues.require(std::isfinite(p.wheel_radius) && p.wheel_radius > 0.0, "wheel_radius", "must be > 0");
    issues.require(std::isfinite(p.track_width) && p.track_width > 0.0, "track_width", "must be > 0");
    issues.require(std::isfinite(p.mass) && p.mass > 0.0, "mass", "must be > 0");
    issues.require(std::isfinite(p.max_accel) && p.max_accel > 0.0, "max_accel", "must be > 0");
    issues.require(std::isfinite(p.max_brake_decel) && p.max_brake_decel > 0.0, "max_brake_decel",
                   "must be > 0");
    issues.require(std::isfinite(p.mu_peak) && p.mu_peak > 0.0, "mu_peak", "must be > 0");
    issues.require(p.slip_lock_threshold > 0.0 && p.slip_lock_threshold < 1.0, "slip_lock_threshold",
                   "must be in (0, 1)");
    return issues.issues();
}

double wrap_angle(double angle) {
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) wrapped += 2.0 * kPi;
    return wrapped;
}

WheelSpeeds wheel_speeds(double v, double yaw_rate, const VehicleParams& params) {
    const double half_track = 0.5 * yaw_rate * params.track_width;
    return {(v - half_track) / params.wheel_radius, (v + half_track) / params.wheel_radius};
}

double friction_coefficient(double slip, const VehicleParams& params) {
    const double lambda = std::clamp(slip, 0.0, 1.0);
    const double peak = params.slip_lock_threshold;
    if (lambda <= peak) return params.mu_peak * lambda / peak;
    return params.mu_peak * (1.0 - 0.4 * (lambda - peak) / (1.0 - peak));
}

double slip_ratio(const VehicleState& state, const VehicleParams& params) {
    if (state.v <= 0.0) return 0.0;
    const double surface = params.wheel_radius * 0.5 * (state.omega_wheel_left + state.omega_wheel_right);
    return std::clamp((state.v - surface) / state.v, 0.0, 1.0);
}

VehicleState step_vehicle(const VehicleState& state, const DriveCommand& cmd, double dt,
                          const VehicleParams& params) {
    check_step_inputs(state, dt);
    require_finite(cmd.a_long, "a_long command");
    require_finite(cmd.yaw_rate, "yaw_rate command");
    const double limit = std::max(params.max_accel, params.max_brake_decel);
    if (std::abs(cmd.a_long) > limit) throw std::invalid_argument("a_long command outside actuator envelope");

    const Travel tr = travel(state.v, cmd.a_long, dt);
    // A stationary car cannot turn; rest stays a fixed point.
    const double yaw = (state.v == 0.0 && tr.v_end == 0.0) ? 0.0 : cmd.yaw_rate;

    VehicleState next = state;
    next.t = state.t + dt;
    advance_pose(next, tr.distance, yaw, dt);
    next.v = tr.v_end;
    next.yaw_rate = yaw;
    next.a_long = (tr.v_end - state.v) / dt;
    const WheelSpeeds w = wheel_speeds(next.v, yaw, params);
    next.omega_wheel_left = w.omega_left;
    next.omega_wheel_right = w.omega_right;
    const double turn = 0.5 * yaw * dt * params.track_width;
    next.wheel_angle_left += (tr.distance - turn) / params.wheel_radius;
    next.wheel_angle_right += (tr.distance + turn) / params.wheel_radius;
    next.braking = false;
    return next;
}

VehicleState step_braking(const VehicleState& state, const BrakeCommand& cmd, double dt,
                          const VehicleParams& params) {
    check_step_inputs(state, dt);
    require_finite(cmd.yaw_rate, "yaw_rate command");
    if (!(cmd.pressure >= 0.0 && cmd.pressure <= 1.0)) {
        throw std::invalid_argument("brake pressure must be in [0, 1]");
    }

    const double v0 = state.v;
    const double r = params.wheel_radius;
    const double surface0 = std::min(v0, r * 0.5 * (state.omega_wheel_left + state.omega_wheel_right));
    const double lambda = v0 > 0.0 ? std::clamp((v0 - surface0) / v0, 0.0, 1.0) : 0.0;
    const double body_decel = v0 > 0.0 ? friction_coefficient(lambda, params) * kGravity : 0.0;

    const Travel body = travel(v0, -body_decel, dt);
    const double wheel_decel = cmd.pressure * params.max_brake_decel;
    const Travel wheel = travel(std::max(surface0, 0.0), -wheel_decel, dt);
    const double surface1 = std::min(wheel.v_end, body.v_end);
    const double yaw = (v0 == 0.0 && body.v_end == 0.0) ? 0.0 : cmd.yaw_rate;

    VehicleState next = state;
    next.t = state.t + dt;
    advance_pose(next, body.distance, yaw, dt);
    next.v = body.v_end;
    next.yaw_rate = yaw;
    next.a_long = (body.v_end - v0) / dt;
    const WheelSpeeds w = wheel_speeds(surface1, yaw, params);
    next.omega_wheel_left = w.omega_left;
    next.omega_wheel_right = w.omega_right;
    const double wheel_distance = std::min(wheel.distance, body.distance);
    const double turn = 0.5 * yaw * dt * params.track_width;
    next.wheel_angle_left += (wheel_distance - turn) / r;
    next.wheel_angle_right += (wheel_distance + turn) / r;
    next.braking = cmd.pressure > 0.0 || surface1 < next.v;
    return next;
}

}  // namespace memsim
