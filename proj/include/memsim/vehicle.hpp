#pragma once

#include <vector>

#include "memsim/error.hpp"

namespace memsim {

inline constexpr double kGravity = 9.81;  // m/s^2
inline constexpr double kPi = 3.14159265358979323846;

struct VehicleParams {
    double wheel_radius = 0.3;         // m
    double track_width = 1.6;          // m
    double mass = 1500.0;              // kg
    double max_accel = 3.0;            // m/s^2
    double max_brake_decel = 9.0;      // m/s^2, wheel-surface decel at full pressure
    double mu_peak = 0.9;
    double slip_lock_threshold = 0.15; // slip ratio at peak friction

    static VehicleParams full_scale() { return {}; }
    /// Small robot-car scale, for desk-sized exploration.
    static VehicleParams rc_scale();

    friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

std::vector<FieldIssue> validate(const VehicleParams& params);

/// Ground-truth kinematic state of the victim vehicle.
struct VehicleState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;   // rad, (-pi, pi]
    double v = 0.0;         // longitudinal speed, m/s, never negative
    double yaw_rate = 0.0;  // rad/s
    double a_long = 0.0;    // realized longitudinal accel over the last step
    double omega_wheel_left = 0.0;
    double omega_wheel_right = 0.0;
    double wheel_angle_left = 0.0;   // accumulated rotation, rad
    double wheel_angle_right = 0.0;
    bool braking = false;

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct DriveCommand {
    double a_long = 0.0;    // m/s^2
    double yaw_rate = 0.0;  // rad/s
};

struct BrakeCommand {
    double pressure = 0.0;  // fraction of full brake pressure
    double yaw_rate = 0.0;
};

struct WheelSpeeds {
    double omega_left = 0.0;
    double omega_right = 0.0;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// No-slip wheel angular speeds for a given body speed and yaw rate.
WheelSpeeds wheel_speeds(double v, double yaw_rate, const VehicleParams& params);

/// Piecewise-linear tyre friction curve: 0 at zero slip, mu_peak at the
/// lock threshold, 0.6 * mu_peak at full lock.
double friction_coefficient(double slip_ratio, const VehicleParams& params);

/// Longitudinal slip of the average wheel, in [0, 1]; 0 at standstill.
double slip_ratio(const VehicleState& state, const VehicleParams& params);

/// Advances the free-rolling vehicle by one step of constant twist. The pose
/// follows the exact circular arc (or straight line for |yaw_rate| < 1e-9)
/// traced at mid-interval speed; speed clamps at zero.
/// Throws std::invalid_argument on non-finite input, dt <= 0 or a command
/// outside the actuator envelope.
VehicleState step_vehicle(const VehicleState& state, const DriveCommand& cmd, double dt,
                          const VehicleParams& params);

/// Advances the vehicle under brake pressure. Wheel surface speed drops at
/// pressure * max_brake_decel, the body decelerates at mu(slip) * g, and the
/// wheel can never turn faster than free rolling.
VehicleState step_braking(const VehicleState& state, const BrakeCommand& cmd, double dt,
                          const VehicleParams& params);

}  // namespace memsim
