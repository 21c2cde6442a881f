#include <doctest.h>

#include <cmath>
#include <random>

#include "memsim/sensors.hpp"

using namespace memsim;

namespace {

MemsParams quiet() {
    MemsParams p;
    p.noise_std_accel = 0.0;
    p.noise_std_gyro = 0.0;
    p.drift_rate_accel = 0.0;
    return p;
}

AcousticExposure tone(double carrier, double freq, double amplitude = 1.0) {
    return {carrier, [=](double t) { return amplitude * std::sin(2.0 * kPi * freq * t); }};
}

}  // namespace

TEST_CASE("resonance_gain closed form") {
    CHECK(resonance_gain(0.0, 5200.0, 20.0) == 1.0);
    CHECK(resonance_gain(5200.0, 5200.0, 20.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(resonance_gain(4.0 * 5200.0, 5200.0, 20.0) == doctest::Approx(0.06666074153074716).epsilon(1e-12));
}

TEST_CASE("resonance_gain falls monotonically above its peak") {
    for (double q : {0.8, 2.0, 20.0}) {
        const double f_res = 5200.0;
        const double peak = f_res * std::sqrt(std::max(0.0, 1.0 - 1.0 / (2.0 * q * q)));
        double previous = resonance_gain(peak + 1.0, f_res, q);
        for (double f = peak + 11.0; f < 8.0 * f_res; f += 10.0) {
            const double g = resonance_gain(f, f_res, q);
            CHECK(g < previous);
            previous = g;
        }
    }
}

TEST_CASE("alias_frequency folds into [0, Fs/2]") {
    CHECK(alias_frequency(2.0, 1000.0) == 2.0);
    CHECK(alias_frequency(1000.0, 1000.0) == 0.0);
    CHECK(alias_frequency(5050.0, 1000.0) == doctest::Approx(50.0));
    for (double f = 0.0; f < 20000.0; f += 77.7) {
        const double a = alias_frequency(f, 1000.0);
        CHECK(a >= 0.0);
        CHECK(a <= 500.0 + 1e-9);
    }
}

TEST_CASE("quiet IMU reproduces true kinematics exactly") {
    NoiseStreams noise(7);
    const MemsParams p = quiet();
    const TrueKinematics kin{1.25, -0.5, 0.125};
    const ImuSample s = sample_imu(kin, AcousticExposure{}, p, 42, noise);
    CHECK(s.t == doctest::Approx(0.042));
    CHECK(s.accel.x == 1.25);
    CHECK(s.accel.y == -0.5);
    CHECK(s.accel.z == 0.0);
    CHECK(s.gyro_z == 0.125);
    CHECK_FALSE(s.injected);

    const ImuSample zero = sample_imu({}, AcousticExposure{}, p, 0, noise);
    CHECK(zero.accel == Vec3{0.0, 0.0, 0.0});
}

TEST_CASE("bias drifts linearly with sample time") {
    NoiseStreams noise(1);
    MemsParams p = quiet();
    p.drift_rate_accel = 0.01;
    const ImuSample s = sample_imu({}, AcousticExposure{}, p, 5000, noise);
    CHECK(s.accel.x == doctest::Approx(0.05));
}

TEST_CASE("on-resonance injection amplitude is coupling * q * pressure") {
    NoiseStreams noise(1);
    MemsParams p = quiet();
    p.f_res_accel = 5000.0;
    p.q_factor = 20.0;
    p.coupling_accel = 0.05;
    const AcousticExposure exposure{5000.0, [](double) { return 1.0; }};
    const ImuSample s = sample_imu({}, exposure, p, 3, noise);
    CHECK(s.accel.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.accel.y == 0.0);
    CHECK(s.injected);
}

TEST_CASE("carriers n*Fs apart produce the same samples") {
    const MemsParams p = quiet();
    for (int n : {1, 3, 5}) {
        NoiseStreams a(1);
        NoiseStreams b(1);
        // Same carrier_freq for the gain so only the waveform differs.
        const AcousticExposure low = tone(5000.0, 2.0);
        const AcousticExposure high = tone(5000.0, 2.0 + n * p.sample_rate);
        for (std::uint64_t k = 0; k < 2000; ++k) {
            const double x_low = sample_imu({}, low, p, k, a).accel.x;
            const double x_high = sample_imu({}, high, p, k, b).accel.x;
            CHECK(std::abs(x_low - x_high) <= 1e-9);
        }
    }
}

TEST_CASE("non-finite pressure is rejected") {
    NoiseStreams noise(1);
    const AcousticExposure bad{5000.0, [](double) { return NAN; }};
    CHECK_THROWS_AS(sample_imu({}, bad, MemsParams{}, 0, noise), std::invalid_argument);
}

TEST_CASE("noise streams are deterministic and independent per channel") {
    NoiseStreams a(99);
    NoiseStreams b(99);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.gaussian(NoiseChannel::AccelX) == b.gaussian(NoiseChannel::AccelX));
        // Draw from another channel on one side only.
        a.gaussian(NoiseChannel::GyroZ);
    }
    CHECK(NoiseStreams::substream_seed(99, "imu.accel.x") != NoiseStreams::substream_seed(99, "imu.accel.y"));
    CHECK(NoiseStreams::substream_seed(99, "imu.accel.x") != NoiseStreams::substream_seed(98, "imu.accel.x"));

    NoiseStreams c(99);
    NoiseStreams d(99);
    const MemsParams p;
    for (std::uint64_t k = 0; k < 50; ++k) {
        CHECK(sample_imu({1.0, 0.0, 0.0}, AcousticExposure{}, p, k, c) ==
              sample_imu({1.0, 0.0, 0.0}, AcousticExposure{}, p, k, d));
    }
}

TEST_CASE("noise has the configured spread") {
    NoiseStreams noise(3);
    MemsParams p = quiet();
    p.noise_std_accel = 0.02;
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double x = sample_imu({}, AcousticExposure{}, p, k, noise).accel.x;
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.001);
    CHECK(std::sqrt(sum_sq / n - mean * mean) == doctest::Approx(0.02).epsilon(0.03));
}

TEST_CASE("integrate_imu_velocity is open-loop dead reckoning") {
    CHECK(integrate_imu_velocity(3.0, 0.0, 0.001) == 3.0);
    double v = 0.0;
    for (int i = 0; i < 100000; ++i) v = integrate_imu_velocity(v, 0.01, 0.001);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    v = 0.0;
    for (int i = 0; i < 2000; ++i) v = integrate_imu_velocity(v, 1.0, 0.001);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(integrate_imu_velocity(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("wheel encoder") {
    VehicleParams vehicle;

    SUBCASE("reads zero at rest") {
        WheelEncoder enc(EncoderParams{100, 50.0}, 1000.0, vehicle);
        const WheelSample s = enc.sample(VehicleState{}, 0);
        CHECK(s.omega_left == 0.0);
        CHECK(s.omega_right == 0.0);
        CHECK(s.v_ground_truth == 0.0);
    }

    SUBCASE("ticks_per_rev 0 passes omega through") {
        WheelEncoder enc(EncoderParams{0, 50.0}, 1000.0, vehicle);
        VehicleState st;
        st.omega_wheel_left = 20.0;
        st.omega_wheel_right = 21.0;
        const WheelSample s = enc.sample(st, 0);
        CHECK(s.omega_left == 20.0);
        CHECK(s.omega_right == 21.0);
        CHECK(s.v_ground_truth == doctest::Approx(0.3 * 20.5));
    }

    SUBCASE("one-interval window: error within one quantum") {
        // 100 ticks/rev counted over 10 ms: quantum 2*pi/(100*0.01) rad/s.
        WheelEncoder enc(EncoderParams{100, 100.0}, 100.0, vehicle);
        CHECK(enc.window_samples() == 1);
        CHECK(enc.omega_quantum() == doctest::Approx(6.283185307179586));
        VehicleState st;
        st.omega_wheel_left = st.omega_wheel_right = 20.0;
        for (std::uint64_t k = 0; k < 200; ++k) {
            st.wheel_angle_left = st.wheel_angle_right = 20.0 * 0.01 * static_cast<double>(k) + 0.013;
            const WheelSample s = enc.sample(st, k);
            CHECK(std::abs(s.omega_left - 20.0) <= enc.omega_quantum() + 1e-12);
        }
    }

    SUBCASE("sliding window error bound at constant speed") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> speed(0.0, 80.0);
        std::uniform_real_distribution<double> phase(0.0, 10.0);
        for (int trial = 0; trial < 20; ++trial) {
            WheelEncoder enc(EncoderParams{100, 50.0}, 1000.0, vehicle);
            CHECK(enc.window_samples() == 20);
            const double omega = speed(rng);
            const double angle0 = phase(rng);
            VehicleState st;
            st.omega_wheel_left = st.omega_wheel_right = omega;
            for (std::uint64_t k = 0; k < 300; ++k) {
                st.wheel_angle_left = st.wheel_angle_right = angle0 + omega * 0.001 * static_cast<double>(k);
                const WheelSample s = enc.sample(st, k);
                CHECK(std::abs(s.omega_left - omega) <= enc.omega_quantum() + 1e-9);
                CHECK(std::abs(s.omega_right - omega) <= enc.omega_quantum() + 1e-9);
            }
        }
        WheelEncoder enc(EncoderParams{100, 50.0}, 1000.0, vehicle);
        CHECK(enc.speed_quantum() == doctest::Approx(0.3 * 2.0 * kPi / (100 * 0.02)));
    }
}

TEST_CASE("sensor parameter validation") {
    CHECK(validate(MemsParams{}).empty());
    MemsParams p;
    p.q_factor = 0.5;
    p.axis_coupling = {1.0, 1.0, 0.0};
    p.noise_std_accel = -1.0;
    const auto issues = validate(p);
    REQUIRE(issues.size() == 3);
    CHECK(issues[0].field == "q_factor");
    CHECK(issues[1].field == "noise_std_accel");
    CHECK(issues[2].field == "axis_coupling");

    CHECK(validate(EncoderParams{100, 50.0}, 1000.0).empty());
    CHECK(validate(EncoderParams{100, 300.0}, 1000.0).size() == 1);
    CHECK(validate(EncoderParams{100, 0.0}, 1000.0).size() == 1);
}
