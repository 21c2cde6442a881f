#include "memsim/scenario.hpp"

#include <cmath>

namespace memsim {

std::uint64_t ScenarioConfig::substeps() const {
    return static_cast<std::uint64_t>(std::llround(1.0 / (sensors.mems.sample_rate * dt)));
}

std::uint64_t ScenarioConfig::last_tick() const {
    return static_cast<std::uint64_t>(std::floor(duration / dt + 1e-9));
}

void validate(const ScenarioConfig& cfg) {
    IssueList issues;
    const bool dt_ok = std::isfinite(cfg.dt) && cfg.dt > 0.0;
    issues.require(dt_ok, "dt", "must be > 0");
    issues.require(std::isfinite(cfg.duration) && cfg.duration > 0.0, "duration", "must be > 0");
    issues.require(std::isfinite(cfg.initial_speed) && cfg.initial_speed >= 0.0, "initial_speed", "must be >= 0");
    if (cfg.scenario_kind == ScenarioKind::BrakeTest) {
        issues.require(cfg.initial_speed > 0.0, "initial_speed", "brake_test needs a moving vehicle");
    }
    issues.require(std::isfinite(cfg.setpoints.v_set) && cfg.setpoints.v_set >= 0.0, "setpoints.v_set",
                   "must be >= 0");
    issues.require(std::isfinite(cfg.setpoints.heading_set), "setpoints.heading_set", "must be finite");

    issues.merge(validate(cfg.vehicle), "vehicle");
    const auto mems_issues = validate(cfg.sensors.mems);
    issues.merge(mems_issues, "sensors.mems");
    issues.merge(validate(cfg.sensors.encoder, cfg.sensors.mems.sample_rate), "sensors.encoder");
    issues.merge(validate(cfg.controller), "controller");

    if (dt_ok && cfg.sensors.mems.sample_rate > 0.0) {
        const double per_tick = 1.0 / (cfg.sensors.mems.sample_rate * cfg.dt);
        issues.require(per_tick >= 1.0 - 1e-9 && std::abs(per_tick - std::round(per_tick)) < 1e-6, "dt",
                       "must divide the sensor sample period into a whole number of steps");
    }
    const double envelope = std::max(cfg.vehicle.max_accel, cfg.vehicle.max_brake_decel);
    issues.require(cfg.controller.speed_pid.output_max <= cfg.vehicle.max_accel + 1e-12 &&
                       cfg.controller.speed_pid.output_min >= -envelope - 1e-12,
                   "controller.speed_pid", "bounds exceed the vehicle acceleration envelope");

    const auto& th = cfg.thresholds;
    issues.require(th.velocity_error_fraction > 0.0, "thresholds.velocity_error_fraction", "must be > 0");
    issues.require(th.velocity_error_sustain >= 0.0, "thresholds.velocity_error_sustain", "must be >= 0");
    issues.require(th.lateral_deviation > 0.0, "thresholds.lateral_deviation", "must be > 0");
    issues.require(th.stopping_inflation >= 1.0, "thresholds.stopping_inflation", "must be >= 1");

    if (cfg.attack) issues.merge(validate(*cfg.attack), "attack");
    issues.throw_if_any();
}

ScenarioConfig without_attack(ScenarioConfig cfg) {
    cfg.attack.reset();
    return cfg;
}

namespace presets {

ScenarioConfig benign_cruise() {
    ScenarioConfig cfg;
    cfg.setpoints.v_set = 13.89;  // 50 km/h
    return cfg;
}

ScenarioConfig resonant_attack() {
    ScenarioConfig cfg = benign_cruise();
    cfg.controller.fusion.fusion_enabled = false;
    AttackConfig attack;
    attack.attacker_type = AttackerType::Internal;
    attack.carrier_freq =
        design_attack_frequency(cfg.sensors.mems.sample_rate, cfg.sensors.mems.f_res_accel, 0.0);
    attack.spl_at_source = 110.0;
    attack.trigger_rate = 0.0;
    attack.start_t = 10.0;
    cfg.attack = attack;
    return cfg;
}

ScenarioConfig off_resonance_attack() {
    ScenarioConfig cfg = resonant_attack();
    cfg.attack->carrier_freq = 0.5 * cfg.sensors.mems.f_res_accel;
    return cfg;
}

ScenarioConfig brake_test() {
    ScenarioConfig cfg;
    cfg.scenario_kind = ScenarioKind::BrakeTest;
    cfg.duration = 10.0;
    cfg.initial_speed = 20.0;
    cfg.setpoints.v_set = 20.0;
    return cfg;
}

ScenarioConfig brake_test_attack() {
    ScenarioConfig cfg = brake_test();
    AttackConfig attack = *resonant_attack().attack;
    attack.start_t = 0.0;
    cfg.attack = attack;
    return cfg;
}

ScenarioConfig sweep_base() {
    ScenarioConfig cfg = benign_cruise();
    cfg.duration = 10.0;
    cfg.sensors.mems.sample_rate = 100.0;
    cfg.sensors.encoder.sample_rate = 50.0;
    cfg.controller.fusion.fusion_enabled = false;
    AttackConfig attack;
    attack.carrier_freq = 5200.0;
    attack.spl_at_source = 100.0;
    attack.start_t = 2.0;
    cfg.attack = attack;
    return cfg;
}

std::optional<ScenarioConfig> by_name(const std::string& name) {
    if (name == "b1") return benign_cruise();
    if (name == "a1") return resonant_attack();
    if (name == "a0") return off_resonance_attack();
    if (name == "b2") return brake_test();
    if (name == "a2") return brake_test_attack();
    if (name == "sweep") return sweep_base();
    return std::nullopt;
}

}  // namespace presets

}  // namespace memsim
