#include <doctest.h>

#include <cmath>
#include <random>

#include "memsim/control.hpp"
#include "memsim/vehicle.hpp"

using namespace memsim;

namespace {

ImuSample imu(double ax, double gz = 0.0) {
    ImuSample s;
    s.accel.x = ax;
    s.gyro_z = gz;
    return s;
}

WheelSample wheels_at(double v, double radius = 0.3) {
    WheelSample s;
    s.omega_left = s.omega_right = v / radius;
    s.v_ground_truth = v;
    return s;
}

}  // namespace

TEST_CASE("pid examples") {
    const PidGains p_only{2.0, 0.0, 0.0, -5.0, 5.0};
    CHECK(pid_step_error(p_only, {}, 1.5, 0.01).command == 3.0);

    const PidGains i_only{0.0, 1.0, 0.0, -1.0, 1.0};
    PidState held;
    held.integrator = 0.4;
    const PidStep s = pid_step_error(i_only, held, 0.0, 0.01);
    CHECK(s.command == doctest::Approx(0.4));
    CHECK(s.state.integrator == 0.4);

    CHECK(pid_step(p_only, {}, 10.0, 8.5, 0.01).command == 3.0);
}

TEST_CASE("pid integrator does not wind up past the bound") {
    const PidGains gains{0.0, 1.0, 0.0, -1.0, 1.0};
    PidState state;
    double command = 0.0;
    for (int i = 0; i < 50; ++i) {
        const PidStep s = pid_step_error(gains, state, 1.0, 0.1);
        state = s.state;
        command = s.command;
        CHECK(state.integrator <= 1.0 + 1e-12);
    }
    CHECK(command == doctest::Approx(1.0).epsilon(1e-12));
    // Reversing the error unwinds immediately instead of after a long
    // saturated stretch.
    const PidStep back = pid_step_error(gains, state, -1.0, 0.1);
    CHECK(back.command < 1.0);
}

TEST_CASE("pid has no derivative kick on the first call") {
    const PidGains d_only{0.0, 0.0, 1.0, -100.0, 100.0};
    const PidStep first = pid_step_error(d_only, {}, 5.0, 0.001);
    CHECK(first.command == 0.0);
    const PidStep second = pid_step_error(d_only, first.state, 5.001, 0.001);
    CHECK(second.command == doctest::Approx(1.0));
}

TEST_CASE("pid output stays within bounds") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double lo = -0.1 - 3.0 * std::abs(u(rng));
        const double hi = 0.1 + 3.0 * std::abs(u(rng));
        const PidGains g{5.0 * std::abs(u(rng)), 5.0 * std::abs(u(rng)), 0.1 * std::abs(u(rng)), lo, hi};
        PidState state;
        for (int i = 0; i < 500; ++i) {
            const PidStep s = pid_step_error(g, state, 10.0 * u(rng), 0.001);
            CHECK(s.command >= lo);
            CHECK(s.command <= hi);
            state = s.state;
        }
    }
}

TEST_CASE("fuse_velocity") {
    const FusionConfig cfg;
    CHECK(fuse_velocity(10.4, 10.0, cfg) == doctest::Approx(10.008));
    FusionConfig off = cfg;
    off.fusion_enabled = false;
    CHECK(fuse_velocity(10.4, 10.0, off) == 10.4);

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_real_distribution<double> a(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        FusionConfig c;
        c.alpha = a(rng);
        const double x = u(rng);
        const double y = u(rng);
        const double f = fuse_velocity(x, y, c);
        CHECK(f >= std::min(x, y) - 1e-12);
        CHECK(f <= std::max(x, y) + 1e-12);
    }
}

TEST_CASE("detect_slip") {
    FusionConfig cfg;
    cfg.slip_threshold = 0.15;
    SlipState s = detect_slip(10.0, 10.0, cfg);
    CHECK(s.slip_ratio == 0.0);
    CHECK_FALSE(s.slipping);
    s = detect_slip(10.0, 8.0, cfg);
    CHECK(s.slip_ratio == doctest::Approx(0.2));
    CHECK(s.slipping);
    // Standstill uses the 0.1 m/s floor.
    s = detect_slip(0.0, -0.05, cfg);
    CHECK(s.slip_ratio == doctest::Approx(0.5));
    CHECK(std::isfinite(detect_slip(0.0, 0.0, cfg).slip_ratio));
}

TEST_CASE("abs_modulate") {
    const AbsConfig cfg;
    CHECK(abs_modulate(1.0, 1.0, false, 0.01, cfg) == 1.0);
    CHECK(abs_modulate(0.8, 1.0, true, 0.01, cfg) == doctest::Approx(0.76));
    CHECK(abs_modulate(0.5, 1.0, false, 0.01, cfg) == doctest::Approx(0.52));
    CHECK(abs_modulate(0.01, 1.0, true, 0.01, cfg) == 0.0);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lipschitz = std::max(cfg.apply_rate, cfg.release_rate);
    for (int i = 0; i < 2000; ++i) {
        const double p = u(rng);
        const double dt = 0.05 * u(rng);
        const double next = abs_modulate(p, u(rng), u(rng) < 0.5, dt, cfg);
        CHECK(next >= 0.0);
        CHECK(next <= 1.0);
        CHECK(std::abs(next - p) <= lipschitz * dt + 1e-12);
    }
}

TEST_CASE("control_tick heading error wraps") {
    ControllerConfig cfg;
    ControllerState state = ControllerState::starting_at(-3.1, 10.0);
    const Setpoints sp{10.0, 3.1};
    const ControlOutput out =
        control_tick(state, cfg, ControlMode::Cruise, sp, imu(0.0), wheels_at(10.0), 0.001, 0.3);
    CHECK(out.diag.heading_error == doctest::Approx(6.2 - 2.0 * kPi).epsilon(1e-12));
    CHECK(out.diag.heading_error == doctest::Approx(-0.0831853071795862));
    CHECK(out.yaw_rate < 0.0);
}

TEST_CASE("control_tick heading error is always wrapped") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    ControllerConfig cfg;
    for (int i = 0; i < 500; ++i) {
        ControllerState state = ControllerState::starting_at(u(rng), 10.0);
        const ControlOutput out = control_tick(state, cfg, ControlMode::Cruise, {10.0, u(rng)}, imu(0.0, u(rng)),
                                               wheels_at(10.0), 0.001, 0.3);
        CHECK(out.diag.heading_error > -kPi);
        CHECK(out.diag.heading_error <= kPi);
    }
}

TEST_CASE("control_tick at the setpoint commands nothing") {
    ControllerConfig cfg;
    ControllerState state = ControllerState::starting_at(0.0, 13.89);
    for (int i = 0; i < 100; ++i) {
        const ControlOutput out =
            control_tick(state, cfg, ControlMode::Cruise, {13.89, 0.0}, imu(0.0), wheels_at(13.89), 0.001, 0.3);
        CHECK(std::abs(out.a_long) < 1e-9);
        CHECK(std::abs(out.yaw_rate) < 1e-12);
        CHECK(out.brake == 0.0);
    }
}

TEST_CASE("injected DC on the IMU makes the raw-IMU controller decelerate") {
    ControllerConfig cfg;
    cfg.fusion.fusion_enabled = false;
    ControllerState state = ControllerState::starting_at(0.0, 13.89);
    ControlOutput out;
    // True speed held at the setpoint, IMU reads +1 m/s^2 for 5 s.
    for (int i = 0; i < 5000; ++i) {
        out = control_tick(state, cfg, ControlMode::Cruise, {13.89, 0.0}, imu(1.0), wheels_at(13.89), 0.001, 0.3);
    }
    CHECK(out.diag.v_imu > 13.89 + 4.0);
    CHECK(out.a_long < 0.0);
    CHECK(out.a_long == cfg.speed_pid.output_min);

    // The fused controller barely moves for the same input.
    ControllerConfig fused;
    ControllerState fstate = ControllerState::starting_at(0.0, 13.89);
    for (int i = 0; i < 5000; ++i) {
        out = control_tick(fstate, fused, ControlMode::Cruise, {13.89, 0.0}, imu(1.0), wheels_at(13.89), 0.001, 0.3);
    }
    CHECK(std::abs(out.v_est - 13.89) < 0.1);
}

TEST_CASE("control_tick holds the previous command on a missing sample") {
    ControllerConfig cfg;
    ControllerState state = ControllerState::starting_at(0.0, 10.0);
    const ControlOutput first =
        control_tick(state, cfg, ControlMode::Cruise, {12.0, 0.2}, imu(0.0), wheels_at(10.0), 0.001, 0.3);
    const ControllerState before = state;
    const ControlOutput held =
        control_tick(state, cfg, ControlMode::Cruise, {12.0, 0.2}, std::nullopt, wheels_at(10.0), 0.001, 0.3);
    CHECK(held.diag.missing_sample);
    CHECK(held.a_long == first.a_long);
    CHECK(held.yaw_rate == first.yaw_rate);
    CHECK(state.v_est == before.v_est);
    CHECK(state.speed == before.speed);
    CHECK(control_tick(state, cfg, ControlMode::Cruise, {12.0, 0.2}, imu(0.0), std::nullopt, 0.001, 0.3)
              .diag.missing_sample);
}

TEST_CASE("cruise distrusts slipping wheels") {
    ControllerConfig cfg;
    ControllerState state = ControllerState::starting_at(0.0, 10.0);
    const ControlOutput out =
        control_tick(state, cfg, ControlMode::Cruise, {10.0, 0.0}, imu(0.0), wheels_at(5.0), 0.001, 0.3);
    CHECK(out.diag.slipping);
    CHECK(out.v_est == 10.0);
}

TEST_CASE("brake test ABS") {
    ControllerConfig cfg;
    SUBCASE("driver request passes through until the first slip") {
        ControllerState state = ControllerState::starting_at(0.0, 20.0);
        ControlOutput out =
            control_tick(state, cfg, ControlMode::BrakeTest, {0.0, 0.0}, imu(-8.0), wheels_at(19.9), 0.001, 0.3);
        CHECK(out.brake == 1.0);
        CHECK_FALSE(out.diag.abs_engaged);
        out = control_tick(state, cfg, ControlMode::BrakeTest, {0.0, 0.0}, imu(-8.0), wheels_at(10.0), 0.001, 0.3);
        CHECK(out.diag.slipping);
        CHECK(out.diag.abs_engaged);
        CHECK(out.brake == doctest::Approx(1.0 - cfg.abs.release_rate * 0.001));
        out = control_tick(state, cfg, ControlMode::BrakeTest, {0.0, 0.0}, imu(-8.0), wheels_at(19.9), 0.001, 0.3);
        CHECK_FALSE(out.diag.slipping);
        CHECK(out.brake == doctest::Approx(1.0 - cfg.abs.release_rate * 0.001 + cfg.abs.apply_rate * 0.001));
    }
    SUBCASE("below min_speed the request passes through") {
        ControllerState state = ControllerState::starting_at(0.0, 2.0);
        const ControlOutput out =
            control_tick(state, cfg, ControlMode::BrakeTest, {0.0, 0.0}, imu(0.0), wheels_at(0.0), 0.001, 0.3);
        CHECK(out.diag.slipping);
        CHECK(out.brake == 1.0);
        CHECK_FALSE(out.diag.abs_engaged);
    }
    SUBCASE("disabled ABS never modulates") {
        cfg.abs.enabled = false;
        ControllerState state = ControllerState::starting_at(0.0, 20.0);
        for (int i = 0; i < 10; ++i) {
            const ControlOutput out =
                control_tick(state, cfg, ControlMode::BrakeTest, {0.0, 0.0}, imu(-8.0), wheels_at(5.0), 0.001, 0.3);
            CHECK(out.brake == 1.0);
        }
    }
}

TEST_CASE("controller validation") {
    CHECK(validate(ControllerConfig{}).empty());
    ControllerConfig cfg;
    cfg.speed_pid.kp = -1.0;
    cfg.fusion.alpha = 1.5;
    cfg.abs.release_rate = 0.0;
    const auto issues = validate(cfg);
    REQUIRE(issues.size() == 3);
    CHECK(issues[0].field == "speed_pid.kp");
    CHECK(issues[1].field == "fusion.alpha");
    CHECK(issues[2].field == "abs.release_rate");
}
