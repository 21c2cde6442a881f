#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "memsim/error.hpp"
#include "memsim/sensors.hpp"

namespace memsim {

enum class AttackerType { Internal, External };

/// Acoustic attacker as configured by the operator.
///
/// An internal attacker is a speaker rigidly coupled to the chassis (no
/// distance loss). An external attacker radiates from `distance` metres
/// away and is attenuated by the inverse-distance law (reference 1 m).
///
/// trigger_rate is the burst repetition rate in bursts/s; inside each burst
/// period the carrier is on for the first `duty` fraction. A rate of 0 means
/// a continuous tone.
struct AttackConfig {
    AttackerType attacker_type = AttackerType::Internal;
    double carrier_freq = 5000.0;  // Hz
    double spl_at_source = 100.0;  // dB re 20 uPa
    double distance = 1.0;         // m, external only
    double trigger_rate = 0.0;     // bursts/s
    double duty = 0.5;
    std::optional<double> start_t;  // unset: now (live) or 0 (scenario file)
    double duration = std::numeric_limits<double>::infinity();
    double phase = 1.5707963267948966;  // rad; pi/2 puts a DC alias at full amplitude

    friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

inline constexpr double kMinSpl = 40.0;
inline constexpr double kMaxSpl = 140.0;
inline constexpr double kMinDistance = 0.1;

std::vector<FieldIssue> validate(const AttackConfig& cfg);

/// Peak acoustic pressure at the sensor, Pa. Throws ValidationError on an
/// invalid configuration.
double pressure_amplitude(const AttackConfig& cfg);

/// Instantaneous pressure at the sensor at time t.
double pressure_at(const AttackConfig& cfg, double t);

/// Pressure exposure seen by the IMU for this attack.
AcousticExposure exposure_for(const AttackConfig& cfg);

/// Picks the carrier n*Fs +/- desired_alias (n >= 1) closest to the sensor
/// resonance; ties go to the lower frequency. Throws std::invalid_argument
/// when desired_alias is outside [0, Fs/2].
double design_attack_frequency(double sample_rate, double f_res, double desired_alias);

}  // namespace memsim
