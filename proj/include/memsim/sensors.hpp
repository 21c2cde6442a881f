#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "memsim/error.hpp"
#include "memsim/vehicle.hpp"

namespace memsim {

/// Body-frame vector: x longitudinal, y lateral, z vertical.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct MemsParams {
    double f_res_accel = 5200.0;      // Hz
    double f_res_gyro = 8100.0;       // Hz
    double q_factor = 20.0;
    double sample_rate = 1000.0;      // ADC rate, Hz; no anti-alias filter in front
    double coupling_accel = 0.05;     // (m/s^2)/Pa at unit resonance gain
    double coupling_gyro = 0.002;     // (rad/s)/Pa
    double noise_std_accel = 0.02;    // m/s^2
    double noise_std_gyro = 0.001;    // rad/s
    double drift_rate_accel = 0.01;   // (m/s^2)/s, linear bias ramp
    Vec3 axis_coupling{1.0, 0.0, 0.0};

    friend bool operator==(const MemsParams&, const MemsParams&) = default;
};

/// Wheel encoder. Ticks are counted over a sliding window of
/// 1/sample_rate seconds, refreshed every IMU sample.
/// ticks_per_rev == 0 disables quantization (exact pass-through).
struct EncoderParams {
    std::uint32_t ticks_per_rev = 100;
    double sample_rate = 50.0;  // Hz, inverse of the counting window

    friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

std::vector<FieldIssue> validate(const MemsParams& params);
std::vector<FieldIssue> validate(const EncoderParams& params, double imu_sample_rate);

struct ImuSample {
    double t = 0.0;
    Vec3 accel;
    double gyro_z = 0.0;
    bool injected = false;  // diagnostic only, never read by the controller

    friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

struct WheelSample {
    double t = 0.0;
    double omega_left = 0.0;   // quantized, rad/s
    double omega_right = 0.0;
    double v_ground_truth = 0.0;

    /// Vehicle speed implied by the quantized wheel readings.
    double speed(double wheel_radius) const { return wheel_radius * 0.5 * (omega_left + omega_right); }

    friend bool operator==(const WheelSample&, const WheelSample&) = default;
};

struct TrueKinematics {
    double a_long = 0.0;
    double a_lat = 0.0;
    double yaw_rate = 0.0;
};

/// Acoustic pressure reaching the sensor package.
struct AcousticExposure {
    double carrier_freq = 0.0;                  // Hz, selects the resonance gain
    std::function<double(double)> pressure_fn;  // Pa as a function of time; empty = silence

    double pressure(double t) const { return pressure_fn ? pressure_fn(t) : 0.0; }
};

/// Magnitude of a second-order mechanical resonance.
double resonance_gain(double f, double f_res, double q);

/// Apparent frequency of a tone at f after sampling at sample_rate.
double alias_frequency(double f, double sample_rate);

enum class NoiseChannel : std::uint8_t { AccelX, AccelY, AccelZ, GyroZ };

/// Per-channel Gaussian noise. Each channel owns an independent engine seeded
/// from (session seed, channel name), so adding channels never shifts others.
class NoiseStreams {
public:
    explicit NoiseStreams(std::uint64_t seed);

    double gaussian(NoiseChannel channel);

    static std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

private:
    struct Stream {
        std::mt19937_64 engine;
        std::normal_distribution<double> normal{0.0, 1.0};
    };
    Stream streams_[4];
};

/// Samples the IMU at t_k = k / sample_rate. The acoustic term is evaluated at
/// that instant only, so out-of-band carriers fold exactly as the ADC would.
/// Throws std::invalid_argument if the pressure is not finite.
ImuSample sample_imu(const TrueKinematics& kin, const AcousticExposure& exposure, const MemsParams& params,
                     std::uint64_t k, NoiseStreams& noise);

/// Open-loop dead reckoning of longitudinal speed.
double integrate_imu_velocity(double prev_v_est, double accel_long, double dt);

/// Quantizing wheel encoder. Keeps the tick counts of the last window so the
/// reported speed is (whole ticks in window) * quantum / window.
class WheelEncoder {
public:
    WheelEncoder(const EncoderParams& params, double imu_sample_rate, const VehicleParams& vehicle);

    WheelSample sample(const VehicleState& state, std::uint64_t k);

    /// Upper bound on |measured - true| omega at constant wheel speed, rad/s.
    double omega_quantum() const;
    /// The same bound expressed as vehicle speed, m/s.
    double speed_quantum() const { return omega_quantum() * wheel_radius_; }
    std::size_t window_samples() const noexcept { return window_; }

private:
    struct Counts {
        double left;
        double right;
    };
    Counts counts_at(double angle_left, double angle_right) const;

    EncoderParams params_;
    double sample_period_;
    double wheel_radius_;
    std::size_t window_;
    std::deque<Counts> history_;
};

}  // namespace memsim
