#include "memsim/sensors.hpp"

#include <cmath>
#include <stdexcept>

namespace memsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

constexpr std::string_view kChannelNames[] = {"imu.accel.x", "imu.accel.y", "imu.accel.z", "imu.gyro.z"};

bool is_integer_ratio(double ratio) {
    return ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) < 1e-9;
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

std::vector<FieldIssue> validate(const MemsParams& p) {
    IssueList issues;
    issues.require(std::isfinite(p.f_res_accel) && p.f_res_accel > 0.0, "f_res_accel", "must be > 0");
    issues.require(std::isfinite(p.f_res_gyro) && p.f_res_gyro > 0.0, "f_res_gyro", "must be > 0");
    issues.require(std::isfinite(p.q_factor) && p.q_factor > 0.5, "q_factor", "must be > 0.5");
    issues.require(std::isfinite(p.sample_rate) && p.sample_rate > 0.0, "sample_rate", "must be > 0");
    issues.require(std::isfinite(p.coupling_accel) && p.coupling_accel >= 0.0, "coupling_accel", "must be >= 0");
    issues.require(std::isfinite(p.coupling_gyro) && p.coupling_gyro >= 0.0, "coupling_gyro", "must be >= 0");
    issues.require(std::isfinite(p.noise_std_accel) && p.noise_std_accel >= 0.0, "noise_std_accel",
                   "must be >= 0");
    issues.require(std::isfinite(p.noise_std_gyro) && p.noise_std_gyro >= 0.0, "noise_std_gyro", "must be >= 0");
    issues.require(std::isfinite(p.drift_rate_accel), "drift_rate_accel", "must be finite");
    issues.require(std::abs(p.axis_coupling.norm() - 1.0) < 1e-9, "axis_coupling", "must be a unit vector");
    return issues.issues();
}

std::vector<FieldIssue> validate(const EncoderParams& p, double imu_sample_rate) {
    IssueList issues;
    issues.require(std::isfinite(p.sample_rate) && p.sample_rate > 0.0, "sample_rate", "must be > 0");
    if (p.sample_rate > 0.0 && imu_sample_rate > 0.0) {
        issues.require(is_integer_ratio(imu_sample_rate / p.sample_rate), "sample_rate",
                       "IMU sample_rate must be an integer multiple of the encoder rate");
    }
    return issues.issues();
}

double resonance_gain(double f, double f_res, double q) {
    const double r = f / f_res;
    const double detune = 1.0 - r * r;
    return 1.0 / std::sqrt(detune * detune + (r / q) * (r / q));
}

double alias_frequency(double f, double sample_rate) {
    return std::abs(f - sample_rate * std::round(f / sample_rate));
}

NoiseStreams::NoiseStreams(std::uint64_t seed) {
    for (std::size_t i = 0; i < 4; ++i) {
        streams_[i].engine.seed(substream_seed(seed, kChannelNames[i]));
    }
}

double NoiseStreams::gaussian(NoiseChannel channel) {
    auto& stream = streams_[static_cast<std::size_t>(channel)];
    return stream.normal(stream.engine);
}

std::uint64_t NoiseStreams::substream_seed(std::uint64_t seed, std::string_view name) {
    return splitmix64(seed ^ splitmix64(fnv1a(name)));
}

ImuSample sample_imu(const TrueKinematics& kin, const AcousticExposure& exposure, const MemsParams& params,
                     std::uint64_t k, NoiseStreams& noise) {
    const double t = static_cast<double>(k) / params.sample_rate;
    const double pressure = exposure.pressure(t);
    if (!std::isfinite(pressure)) throw std::invalid_argument("acoustic pressure is not finite");

    double inject_accel = 0.0;
    double inject_gyro = 0.0;
    if (pressure != 0.0) {
        inject_accel = params.coupling_accel *
                       resonance_gain(exposure.carrier_freq, params.f_res_accel, params.q_factor) * pressure;
        inject_gyro = params.coupling_gyro *
                      resonance_gain(exposure.carrier_freq, params.f_res_gyro, params.q_factor) * pressure;
    }
    const double bias = params.drift_rate_accel * t;
    const Vec3& axis = params.axis_coupling;

    ImuSample sample;
    sample.t = t;
    sample.accel.x = kin.a_long + bias + params.noise_std_accel * noise.gaussian(NoiseChannel::AccelX) +
                     inject_accel * axis.x;
    sample.accel.y = kin.a_lat + bias + params.noise_std_accel * noise.gaussian(NoiseChannel::AccelY) +
                     inject_accel * axis.y;
    sample.accel.z = bias + params.noise_std_accel * noise.gaussian(NoiseChannel::AccelZ) + inject_accel * axis.z;
    sample.gyro_z = kin.yaw_rate + params.noise_std_gyro * noise.gaussian(NoiseChannel::GyroZ) + inject_gyro;
    sample.injected = pressure != 0.0;
    return sample;
}

double integrate_imu_velocity(double prev_v_est, double accel_long, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    return prev_v_est + accel_long * dt;
}

WheelEncoder::WheelEncoder(const EncoderParams& params, double imu_sample_rate, const VehicleParams& vehicle)
    : params_(params),
      sample_period_(1.0 / imu_sample_rate),
      wheel_radius_(vehicle.wheel_radius),
      window_(static_cast<std::size_t>(std::llround(imu_sample_rate / params.sample_rate))) {
    if (window_ == 0) throw std::invalid_argument("encoder window must span at least one IMU sample");
}

double WheelEncoder::omega_quantum() const {
    if (params_.ticks_per_rev == 0) return 0.0;
    return 2.0 * kPi / (params_.ticks_per_rev * static_cast<double>(window_) * sample_period_);
}

WheelEncoder::Counts WheelEncoder::counts_at(double angle_left, double angle_right) const {
    const double quantum = 2.0 * kPi / params_.ticks_per_rev;
    return {std::floor(angle_left / quantum), std::floor(angle_right / quantum)};
}

WheelSample WheelEncoder::sample(const VehicleState& state, std::uint64_t k) {
    WheelSample out;
    out.t = static_cast<double>(k) * sample_period_;
    out.v_ground_truth = wheel_radius_ * 0.5 * (state.omega_wheel_left + state.omega_wheel_right);
    if (params_.ticks_per_rev == 0) {
        out.omega_left = state.omega_wheel_left;
        out.omega_right = state.omega_wheel_right;
        return out;
    }

    if (history_.empty()) {
        // Assume the wheels were turning at their current speed before the
        // first sample, so the window is full from the start.
        for (std::size_t i = window_; i > 0; --i) {
            const double back = static_cast<double>(i) * sample_period_;
            history_.push_back(counts_at(state.wheel_angle_left - state.omega_wheel_left * back,
                                         state.wheel_angle_right - state.omega_wheel_right * back));
        }
    }
    const Counts now = counts_at(state.wheel_angle_left, state.wheel_angle_right);
    const Counts& oldest = history_.front();
    const double quantum = 2.0 * kPi / params_.ticks_per_rev;
    const double window_time = static_cast<double>(window_) * sample_period_;
    out.omega_left = (now.left - oldest.left) * quantum / window_time;
    out.omega_right = (now.right - oldest.right) * quantum / window_time;

    history_.push_back(now);
    history_.pop_front();
    return out;
}

}  // namespace memsim
