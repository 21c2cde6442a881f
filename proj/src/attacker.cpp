#include "memsim/attacker.hpp"

#include <cmath>
#include <stdexcept>

namespace memsim {

namespace {

constexpr double kReferencePressure = 20e-6;  // Pa

double fractional(double x) { return x - std::floor(x); }

double gated_pressure(const AttackConfig& cfg, double amplitude, double t) {
    const double start = cfg.start_t.value_or(0.0);
    if (t < start || t - start > cfg.duration) return 0.0;
    if (cfg.trigger_rate > 0.0 && fractional((t - start) * cfg.trigger_rate) >= cfg.duty) return 0.0;
    // Reduce to the fractional cycle first; keeps long runs phase-accurate.
    const double cycle = fractional(cfg.carrier_freq * t);
    return amplitude * std::sin(2.0 * kPi * cycle + cfg.phase);
}

}  // namespace

std::vector<FieldIssue> validate(const AttackConfig& c) {
    IssueList issues;
    issues.require(std::isfinite(c.carrier_freq) && c.carrier_freq > 0.0, "carrier_freq", "must be > 0");
    issues.require(c.spl_at_source >= kMinSpl && c.spl_at_source <= kMaxSpl, "spl_at_source",
                   "must be within [40, 140] dB");
    if (c.attacker_type == AttackerType::External) {
        issues.require(std::isfinite(c.distance) && c.distance >= kMinDistance, "distance",
                       "must be >= 0.1 m for an external attacker");
    }
    issues.require(std::isfinite(c.trigger_rate) && c.trigger_rate >= 0.0, "trigger_rate", "must be >= 0");
    issues.require(c.duty > 0.0 && c.duty <= 1.0, "duty", "must be within (0, 1]");
    if (c.start_t) {
        issues.require(std::isfinite(*c.start_t) && *c.start_t >= 0.0, "start_t", "must be >= 0");
    }
    issues.require(!std::isnan(c.duration) && c.duration > 0.0, "duration", "must be > 0");
    issues.require(std::isfinite(c.phase), "phase", "must be finite");
    return issues.issues();
}

double pressure_amplitude(const AttackConfig& cfg) {
    IssueList issues;
    issues.merge(validate(cfg), "");
    issues.throw_if_any();
    const double at_source = kReferencePressure * std::pow(10.0, cfg.spl_at_source / 20.0);
    if (cfg.attacker_type == AttackerType::Internal) return at_source;
    return at_source * (1.0 / std::max(cfg.distance, kMinDistance));
}

double pressure_at(const AttackConfig& cfg, double t) {
    return gated_pressure(cfg, pressure_amplitude(cfg), t);
}

AcousticExposure exposure_for(const AttackConfig& cfg) {
    const double amplitude = pressure_amplitude(cfg);
    return {cfg.carrier_freq, [cfg, amplitude](double t) { return gated_pressure(cfg, amplitude, t); }};
}

double design_attack_frequency(double sample_rate, double f_res, double desired_alias) {
    if (!(sample_rate > 0.0) || !(f_res > 0.0)) throw std::invalid_argument("sample_rate and f_res must be > 0");
    if (!(desired_alias >= 0.0 && desired_alias <= 0.5 * sample_rate)) {
        throw std::invalid_argument("desired alias must lie within [0, Nyquist]");
    }
    const auto n_max = static_cast<long long>(std::ceil(f_res / sample_rate)) + 1;
    double best = 0.0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (long long n = 1; n <= n_max; ++n) {
        const double centre = static_cast<double>(n) * sample_rate;
        for (double candidate : {centre - desired_alias, centre + desired_alias}) {
            if (candidate <= 0.0) continue;
            const double distance = std::abs(candidate - f_res);
            if (distance < best_distance || (distance == best_distance && candidate < best)) {
                best = candidate;
                best_distance = distance;
            }
        }
    }
    return best;
}

}  // namespace memsim
