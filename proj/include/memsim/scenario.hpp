#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "memsim/attacker.hpp"
#include "memsim/control.hpp"
#include "memsim/sensors.hpp"
#include "memsim/vehicle.hpp"

namespace memsim {

enum class ScenarioKind { Cruise, BrakeTest };

struct SensorConfig {
    MemsParams mems;
    EncoderParams encoder;

    friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

/// Platform definitions of a successful attack.
struct SuccessThresholds {
    double velocity_error_fraction = 0.1;  // of v_set
    double velocity_error_sustain = 1.0;   // s
    double lateral_deviation = 0.5;        // m
    double stopping_inflation = 1.1;       // x reference stopping distance

    friend bool operator==(const SuccessThresholds&, const SuccessThresholds&) = default;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double dt = 0.001;
    double duration = 30.0;
    ScenarioKind scenario_kind = ScenarioKind::Cruise;
    double initial_speed = 0.0;  // m/s
    Setpoints setpoints;
    VehicleParams vehicle;
    SensorConfig sensors;
    ControllerConfig controller;
    SuccessThresholds thresholds;
    std::optional<AttackConfig> attack;

    /// Control ticks happen every this many plant steps (1/sample_rate / dt).
    std::uint64_t substeps() const;
    /// Index of the last tick; the log holds last_tick() + 1 records.
    std::uint64_t last_tick() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ValidationError listing every violated invariant.
void validate(const ScenarioConfig& cfg);

/// Same config with the attack removed; used to match benign references.
ScenarioConfig without_attack(ScenarioConfig cfg);

namespace presets {

/// Benign 50 km/h cruise.
ScenarioConfig benign_cruise();
/// Internal continuous attack on the accelerometer resonance, DC-aliased,
/// 110 dB from t = 10 s, IMU-only speed estimate.
ScenarioConfig resonant_attack();
/// As resonant_attack but with the carrier at half the resonance.
ScenarioConfig off_resonance_attack();
/// Straight-line ABS stop from 20 m/s.
ScenarioConfig brake_test();
/// brake_test with the resonant attack corrupting the IMU slip reference.
ScenarioConfig brake_test_attack();
/// Short IMU-only cruise sampled at 100 Hz, for carrier sweeps over a
/// 100 Hz grid (every grid point aliases to DC).
ScenarioConfig sweep_base();

/// Looks up a preset by name: b1, a1, a0, b2, a2, sweep.
std::optional<ScenarioConfig> by_name(const std::string& name);

}  // namespace presets

}  // namespace memsim
