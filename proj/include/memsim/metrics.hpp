#pragma once

#include <optional>
#include <string>

#include "memsim/json_io.hpp"
#include "memsim/session.hpp"

namespace memsim {

enum class AttackOutcome { NoAttack, Ineffective, Effective };

std::string to_string(AttackOutcome outcome);

struct MetricsReport {
    double velocity_rmse_vs_setpoint = 0.0;  // m/s
    double max_velocity_est_error = 0.0;     // max |v_est - v_true|, m/s
    double max_lateral_deviation = 0.0;      // m
    double max_heading_error = 0.0;          // rad
    double imu_wheel_discrepancy_rms = 0.0;  // m/s
    double jerk_rms = 0.0;                   // m/s^3
    std::optional<double> stopping_distance; // m, brake tests only
    /// Longest stretch over which the velocity-error test held, s. Against a
    /// reference the error is the part the attack added.
    double velocity_error_sustained = 0.0;
    AttackOutcome attack_success = AttackOutcome::NoAttack;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Scores a log. With a benign reference (same seed, same config apart from
/// the attack) lateral and heading deviation are measured against the
/// reference trajectory and the verdict uses attack-induced errors;
/// otherwise against the straight setpoint path. Throws ReferenceMismatch
/// when the reference does not match.
MetricsReport compute_metrics(const SessionLog& log, const SessionLog* reference = nullptr);

/// Throws ReferenceMismatch unless the two logs share seed and
/// config-minus-attack.
void check_reference(const SessionLog& log, const SessionLog& reference);

/// Stopping distance of an ideal stop at the friction peak.
double ideal_stopping_distance(double v0, const VehicleParams& vehicle);

/// Bound on imu_wheel_discrepancy_rms for a benign fused run: three times the
/// sum of one second of integrated accelerometer noise and the encoder speed
/// quantum.
double benign_discrepancy_envelope(const ScenarioConfig& cfg);

Json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const Json& j);

/// Per-metric difference a - b (stopping distance null unless both have one).
Json metrics_delta(const MetricsReport& a, const MetricsReport& b);

}  // namespace memsim
