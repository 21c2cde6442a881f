#include "memsim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

namespace {

double rms(double sum_sq, std::size_t n) { return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n)); }

// Perpendicular offset of p from the line through o with direction heading.
double cross_track(double px, double py, double ox, double oy, double heading) {
    return std::abs(-(px - ox) * std::sin(heading) + (py - oy) * std::cos(heading));
}

bool has_attack(const SessionLog& log) { return log.config.attack.has_value() || !log.events.empty(); }

std::optional<double> stopping_distance(const SessionLog& log) {
    const auto& rs = log.records;
    std::size_t start = rs.size();
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (rs[i].control.brake > 0.0) {
            start = i;
            break;
        }
    }
    if (start == rs.size()) return rs.empty() ? std::nullopt : std::optional<double>(0.0);
    double distance = 0.0;
    for (std::size_t i = start + 1; i < rs.size(); ++i) {
        distance += std::hypot(rs[i].truth.x - rs[i - 1].truth.x, rs[i].truth.y - rs[i - 1].truth.y);
        if (rs[i].truth.v == 0.0) break;
    }
    return distance;
}

}  // namespace

std::string to_string(AttackOutcome outcome) {
    switch (outcome) {
        case AttackOutcome::NoAttack: return "no_attack";
        case AttackOutcome::Ineffective: return "ineffective";
        case AttackOutcome::Effective: return "effective";
    }
    return "unknown";
}

void check_reference(const SessionLog& log, const SessionLog& reference) {
    if (log.config.seed != reference.config.seed) {
        throw ReferenceMismatch("reference seed " + std::to_string(reference.config.seed) + " differs from " +
                                std::to_string(log.config.seed));
    }
    if (without_attack(log.config) != without_attack(reference.config)) {
        throw ReferenceMismatch("reference config differs apart from the attack");
    }
}

double ideal_stopping_distance(double v0, const VehicleParams& vehicle) {
    return v0 * v0 / (2.0 * vehicle.mu_peak * kGravity);
}

double benign_discrepancy_envelope(const ScenarioConfig& cfg) {
    const auto& m = cfg.sensors.mems;
    const double noise = m.noise_std_accel * cfg.dt * m.sample_rate;
    double quantum = 0.0;
    if (cfg.sensors.encoder.ticks_per_rev > 0) {
        quantum = cfg.vehicle.wheel_radius * 2.0 * kPi /
                  (cfg.sensors.encoder.ticks_per_rev / cfg.sensors.encoder.sample_rate);
    }
    return 3.0 * (noise + quantum);
}

MetricsReport compute_metrics(const SessionLog& log, const SessionLog* reference) {
    if (reference) check_reference(log, *reference);
    const ScenarioConfig& cfg = log.config;
    const auto& rs = log.records;
    const std::size_t n = rs.size();
    MetricsReport m;

    double sum_speed = 0.0;
    double sum_disc = 0.0;
    double sum_jerk = 0.0;
    const double limit = cfg.thresholds.velocity_error_fraction * cfg.setpoints.v_set;
    std::size_t run = 0;
    std::size_t longest = 0;
    const TickRecord* origin = n > 0 ? &rs.front() : nullptr;

    for (std::size_t i = 0; i < n; ++i) {
        const TickRecord& r = rs[i];
        const double speed_err = r.truth.v - cfg.setpoints.v_set;
        sum_speed += speed_err * speed_err;
        const double est_err = r.control.v_est - r.truth.v;
        m.max_velocity_est_error = std::max(m.max_velocity_est_error, std::abs(est_err));
        const double disc = r.control.diag.v_imu - r.control.diag.v_wheel;
        sum_disc += disc * disc;
        if (i > 0) {
            const double jerk = (r.truth.a_long - rs[i - 1].truth.a_long) / cfg.dt;
            sum_jerk += jerk * jerk;
        }

        double verdict_err = std::abs(est_err);
        const TickRecord* ref = reference && i < reference->records.size() ? &reference->records[i] : nullptr;
        if (ref) {
            verdict_err = std::abs(est_err - (ref->control.v_est - ref->truth.v));
            m.max_lateral_deviation = std::max(
                m.max_lateral_deviation, cross_track(r.truth.x, r.truth.y, ref->truth.x, ref->truth.y, ref->truth.heading));
            m.max_heading_error =
                std::max(m.max_heading_error, std::abs(wrap_angle(r.truth.heading - ref->truth.heading)));
        } else if (!reference) {
            m.max_lateral_deviation =
                std::max(m.max_lateral_deviation, cross_track(r.truth.x, r.truth.y, origin->truth.x, origin->truth.y,
                                                              cfg.setpoints.heading_set));
            m.max_heading_error =
                std::max(m.max_heading_error, std::abs(wrap_angle(r.truth.heading - cfg.setpoints.heading_set)));
        }
        run = verdict_err > limit ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    m.velocity_rmse_vs_setpoint = rms(sum_speed, n);
    m.imu_wheel_discrepancy_rms = rms(sum_disc, n);
    m.jerk_rms = rms(sum_jerk, n > 0 ? n - 1 : 0);
    m.velocity_error_sustained = static_cast<double>(longest) * cfg.dt;

    bool braking_worse = false;
    if (cfg.scenario_kind == ScenarioKind::BrakeTest) {
        m.stopping_distance = stopping_distance(log);
        double baseline = ideal_stopping_distance(cfg.initial_speed, cfg.vehicle);
        if (reference) {
            if (auto ref_stop = stopping_distance(*reference)) baseline = *ref_stop;
        }
        braking_worse = m.stopping_distance && *m.stopping_distance > cfg.thresholds.stopping_inflation * baseline;
    }

    if (!has_attack(log)) {
        m.attack_success = AttackOutcome::NoAttack;
    } else {
        // The run must hold for the sustain time; a zero sustain still needs
        // one offending tick.
        const bool velocity_hit =
            longest > 0 && m.velocity_error_sustained >= cfg.thresholds.velocity_error_sustain - 1e-9;
        const bool lateral_hit = m.max_lateral_deviation > cfg.thresholds.lateral_deviation;
        m.attack_success =
            velocity_hit || lateral_hit || braking_worse ? AttackOutcome::Effective : AttackOutcome::Ineffective;
    }
    return m;
}

Json to_json(const MetricsReport& m) {
    Json j;
    j["velocity_rmse_vs_setpoint"] = m.velocity_rmse_vs_setpoint;
    j["max_velocity_est_error"] = m.max_velocity_est_error;
    j["max_lateral_deviation"] = m.max_lateral_deviation;
    j["max_heading_error"] = m.max_heading_error;
    j["imu_wheel_discrepancy_rms"] = m.imu_wheel_discrepancy_rms;
    j["jerk_rms"] = m.jerk_rms;
    j["stopping_distance"] = m.stopping_distance ? Json(*m.stopping_distance) : Json(nullptr);
    j["velocity_error_sustained"] = m.velocity_error_sustained;
    j["attack_success"] = to_string(m.attack_success);
    return j;
}

MetricsReport metrics_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("metrics: expected an object");
    MetricsReport m;
    auto number = [&](const char* key, double& out) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_number()) throw ParseError(std::string("metrics.") + key + ": expected a number");
        out = it->get<double>();
    };
    number("velocity_rmse_vs_setpoint", m.velocity_rmse_vs_setpoint);
    number("max_velocity_est_error", m.max_velocity_est_error);
    number("max_lateral_deviation", m.max_lateral_deviation);
    number("max_heading_error", m.max_heading_error);
    number("imu_wheel_discrepancy_rms", m.imu_wheel_discrepancy_rms);
    number("jerk_rms", m.jerk_rms);
    number("velocity_error_sustained", m.velocity_error_sustained);
    auto stop = j.find("stopping_distance");
    if (stop != j.end() && !stop->is_null()) {
        if (!stop->is_number()) throw ParseError("metrics.stopping_distance: expected a number or null");
        m.stopping_distance = stop->get<double>();
    }
    auto verdict = j.find("attack_success");
    if (verdict == j.end() || !verdict->is_string()) throw ParseError("metrics.attack_success: expected a string");
    const std::string v = verdict->get<std::string>();
    if (v == "no_attack") {
        m.attack_success = AttackOutcome::NoAttack;
    } else if (v == "ineffective") {
        m.attack_success = AttackOutcome::Ineffective;
    } else if (v == "effective") {
        m.attack_success = AttackOutcome::Effective;
    } else {
        throw ParseError("metrics.attack_success: unknown verdict \"" + v + "\"");
    }
    return m;
}

Json metrics_delta(const MetricsReport& a, const MetricsReport& b) {
    Json j;
    j["velocity_rmse_vs_setpoint"] = a.velocity_rmse_vs_setpoint - b.velocity_rmse_vs_setpoint;
    j["max_velocity_est_error"] = a.max_velocity_est_error - b.max_velocity_est_error;
    j["max_lateral_deviation"] = a.max_lateral_deviation - b.max_lateral_deviation;
    j["max_heading_error"] = a.max_heading_error - b.max_heading_error;
    j["imu_wheel_discrepancy_rms"] = a.imu_wheel_discrepancy_rms - b.imu_wheel_discrepancy_rms;
    j["jerk_rms"] = a.jerk_rms - b.jerk_rms;
    j["stopping_distance"] = a.stopping_distance && b.stopping_distance
                                 ? Json(*a.stopping_distance - *b.stopping_distance)
                                 : Json(nullptr);
    j["velocity_error_sustained"] = a.velocity_error_sustained - b.velocity_error_sustained;
    return j;
}

}  // namespace memsim
