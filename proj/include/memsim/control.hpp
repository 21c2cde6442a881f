#pragma once

#include <optional>
#include <vector>

#include "memsim/error.hpp"
#include "memsim/sensors.hpp"

namespace memsim {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double output_min = -1.0;
    double output_max = 1.0;

    friend bool operator==(const PidGains&, const PidGains&) = default;
};

struct PidState {
    double integrator = 0.0;
    double prev_error = 0.0;
    bool has_prev = false;

    friend bool operator==(const PidState&, const PidState&) = default;
};

struct PidStep {
    double command = 0.0;
    PidState state;
};

std::vector<FieldIssue> validate(const PidGains& gains);

/// PID on a precomputed error with conditional anti-windup: the integrator
/// only takes e*dt when that keeps the unclamped output inside the bounds or
/// the error is pulling the output back inside. The derivative term is zero
/// on the first call.
PidStep pid_step_error(const PidGains& gains, const PidState& state, double error, double dt);

PidStep pid_step(const PidGains& gains, const PidState& state, double setpoint, double measurement, double dt);

struct FusionConfig {
    double alpha = 0.98;            // weight on wheel-speed velocity
    double slip_threshold = 0.17;
    bool fusion_enabled = true;

    friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

std::vector<FieldIssue> validate(const FusionConfig& cfg);

/// Complementary blend of wheel and IMU velocity.
double fuse_velocity(double v_imu, double v_wheel, const FusionConfig& cfg);

struct SlipState {
    bool slipping = false;
    double slip_ratio = 0.0;
};

/// Slip of the wheels relative to the IMU speed, with a 0.1 m/s floor on the
/// denominator so standstill stays finite.
SlipState detect_slip(double v_est_imu, double v_wheel, const FusionConfig& cfg);

struct AbsConfig {
    bool enabled = true;
    double apply_rate = 2.0;          // pressure fraction per second
    double release_rate = 4.0;
    double min_speed = 3.0;           // m/s; below this the driver request passes through
    double requested_pressure = 1.0;  // driver request during a brake test

    friend bool operator==(const AbsConfig&, const AbsConfig&) = default;
};

std::vector<FieldIssue> validate(const AbsConfig& cfg);

/// Rate-limited bang-bang modulation: release while slipping, otherwise ramp
/// toward the request. Output is clamped to [0, 1].
double abs_modulate(double current_pressure, double requested_pressure, bool slipping, double dt,
                    const AbsConfig& cfg);

struct ControllerConfig {
    PidGains speed_pid{1.5, 0.3, 0.0, -3.0, 3.0};
    PidGains heading_pid{2.0, 0.0, 0.1, -1.0, 1.0};
    FusionConfig fusion;
    AbsConfig abs;

    friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

std::vector<FieldIssue> validate(const ControllerConfig& cfg);

enum class ControlMode { Cruise, BrakeTest };

struct Setpoints {
    double v_set = 13.89;     // m/s
    double heading_set = 0.0; // rad

    friend bool operator==(const Setpoints&, const Setpoints&) = default;
};

struct ControlDiagnostics {
    double v_imu = 0.0;  // IMU-propagated speed before fusion
    double v_wheel = 0.0;
    double heading_est = 0.0;
    double heading_error = 0.0;
    double slip_ratio = 0.0;
    bool slipping = false;
    bool abs_engaged = false;
    bool missing_sample = false;

    friend bool operator==(const ControlDiagnostics&, const ControlDiagnostics&) = default;
};

struct ControlOutput {
    double a_long = 0.0;
    double yaw_rate = 0.0;
    double brake = 0.0;
    double v_est = 0.0;
    ControlDiagnostics diag;

    friend bool operator==(const ControlOutput&, const ControlOutput&) = default;
};

struct ControllerState {
    PidState speed;
    PidState heading;
    double v_est = 0.0;
    double heading_est = 0.0;
    double brake_pressure = 0.0;
    bool abs_engaged = false;
    bool initialized = false;
    ControlOutput last;

    /// Fresh controller that knows the vehicle's initial heading.
    static ControllerState starting_at(double heading);
    /// Controller already tracking the given speed, as after a steady cruise.
    static ControllerState starting_at(double heading, double speed);
};

/// One controller tick. Propagates the IMU speed, fuses it with the wheels
/// (cruise) or uses it as the slip reference (brake test), runs the speed and
/// heading loops and, when braking, the ABS. A missing sample repeats the
/// previous command and flags `missing_sample`.
ControlOutput control_tick(ControllerState& state, const ControllerConfig& cfg, ControlMode mode,
                           const Setpoints& setpoints, const std::optional<ImuSample>& imu,
                           const std::optional<WheelSample>& wheel, double dt, double wheel_radius);

}  // namespace memsim
