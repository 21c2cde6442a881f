#include <doctest.h>

#include <cmath>

#include "memsim/metrics.hpp"

using namespace memsim;

namespace {

SessionLog run_all(const ScenarioConfig& cfg) {
    Session s(cfg);
    s.run_to_end();
    return s.log();
}

ScenarioConfig short_attack(double duration) {
    ScenarioConfig cfg = presets::resonant_attack();
    cfg.duration = duration;
    cfg.initial_speed = cfg.setpoints.v_set;
    cfg.attack->start_t = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("a benign log scored against itself") {
    const SessionLog log = run_all(without_attack(short_attack(4.0)));
    const MetricsReport m = compute_metrics(log, &log);
    CHECK(m.max_lateral_deviation == 0.0);
    CHECK(m.max_heading_error == 0.0);
    CHECK(m.velocity_error_sustained == 0.0);
    CHECK(m.attack_success == AttackOutcome::NoAttack);
    CHECK_FALSE(m.stopping_distance);
}

TEST_CASE("synthetic estimate offsets drive the verdict") {
    const SessionLog benign = run_all(without_attack(short_attack(4.0)));
    const double limit = benign.config.thresholds.velocity_error_fraction * benign.config.setpoints.v_set;

    auto offset_log = [&](double offset, double from_t) {
        SessionLog log = benign;
        log.config.attack = *short_attack(4.0).attack;
        for (auto& r : log.records) {
            if (r.t >= from_t) r.control.v_est += offset;
        }
        return log;
    };

    const MetricsReport big = compute_metrics(offset_log(2.0, 1.0), &benign);
    CHECK(big.attack_success == AttackOutcome::Effective);
    CHECK(big.velocity_error_sustained == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(big.max_lateral_deviation == 0.0);

    const MetricsReport small = compute_metrics(offset_log(0.9 * limit, 1.0), &benign);
    CHECK(small.attack_success == AttackOutcome::Ineffective);
    CHECK(small.velocity_error_sustained == 0.0);

    // Large but too brief to count.
    const MetricsReport brief = compute_metrics(offset_log(2.0, 3.5), &benign);
    CHECK(brief.attack_success == AttackOutcome::Ineffective);
    CHECK(brief.velocity_error_sustained == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("lateral offset is measured across the reference path") {
    const SessionLog benign = run_all(without_attack(short_attack(2.0)));
    SessionLog moved = benign;
    moved.config.attack = *short_attack(2.0).attack;
    for (auto& r : moved.records) {
        // Along-track shifts do not count, cross-track ones do.
        r.truth.x += 3.0;
        r.truth.y += 0.75;
    }
    const MetricsReport m = compute_metrics(moved, &benign);
    CHECK(m.max_lateral_deviation == doctest::Approx(0.75).epsilon(0.01));
    CHECK(m.attack_success == AttackOutcome::Effective);
}

TEST_CASE("reference mismatch") {
    const SessionLog a = run_all(without_attack(short_attack(1.0)));
    ScenarioConfig other = without_attack(short_attack(1.0));
    other.seed = 77;
    const SessionLog b = run_all(other);
    CHECK_THROWS_AS(compute_metrics(a, &b), ReferenceMismatch);
    other = without_attack(short_attack(1.0));
    other.setpoints.v_set = 10.0;
    const SessionLog c = run_all(other);
    CHECK_THROWS_AS(check_reference(a, c), ReferenceMismatch);
    CHECK_NOTHROW(check_reference(run_all(short_attack(1.0)), a));
}

TEST_CASE("without a reference the setpoint path is the baseline") {
    ScenarioConfig cfg = without_attack(short_attack(2.0));
    cfg.setpoints.heading_set = 0.5;
    cfg.sensors.mems.noise_std_gyro = 0.0;
    const MetricsReport m = compute_metrics(run_all(cfg));
    CHECK(m.max_lateral_deviation < 1e-9);
    CHECK(m.max_heading_error == 0.0);
    CHECK(m.velocity_rmse_vs_setpoint < 0.2);
}

TEST_CASE("resonant attack is effective and the off-resonance one is not") {
    const ScenarioConfig a1 = short_attack(6.0);
    ScenarioConfig a0 = a1;
    a0.attack->carrier_freq = 0.5 * a0.sensors.mems.f_res_accel;
    const SessionLog benign = run_all(without_attack(a1));
    const MetricsReport hit = compute_metrics(run_all(a1), &benign);
    const MetricsReport miss = compute_metrics(run_all(a0), &benign);
    CHECK(hit.attack_success == AttackOutcome::Effective);
    CHECK(miss.attack_success == AttackOutcome::Ineffective);
    CHECK(miss.max_velocity_est_error < 0.2 * hit.max_velocity_est_error);
}

TEST_CASE("stopping distance") {
    const VehicleParams v;
    CHECK(ideal_stopping_distance(20.0, v) == doctest::Approx(400.0 / (2.0 * 0.9 * 9.81)));
    const SessionLog b2 = run_all(presets::brake_test());
    const MetricsReport m = compute_metrics(b2);
    REQUIRE(m.stopping_distance);
    CHECK(*m.stopping_distance > 20.0);
    CHECK(*m.stopping_distance == doctest::Approx(b2.records.back().truth.x).epsilon(1e-9));
    CHECK(m.attack_success == AttackOutcome::NoAttack);
}

TEST_CASE("benign discrepancy envelope") {
    const ScenarioConfig cfg = presets::benign_cruise();
    // 3 * (0.02 + 0.3 * 2pi / 2)
    CHECK(benign_discrepancy_envelope(cfg) == doctest::Approx(3.0 * (0.02 + 0.3 * kPi)));
}

TEST_CASE("metrics JSON") {
    MetricsReport m;
    m.velocity_rmse_vs_setpoint = 1.5;
    m.stopping_distance = 27.25;
    m.attack_success = AttackOutcome::Effective;
    CHECK(metrics_from_json(to_json(m)) == m);
    m.stopping_distance.reset();
    CHECK(metrics_from_json(to_json(m)) == m);
    CHECK(to_json(m)["stopping_distance"].is_null());
    Json bad = to_json(m);
    bad["attack_success"] = "maybe";
    CHECK_THROWS_AS(metrics_from_json(bad), ParseError);

    MetricsReport other = m;
    other.velocity_rmse_vs_setpoint = 0.5;
    const Json delta = metrics_delta(m, other);
    CHECK(delta["velocity_rmse_vs_setpoint"].get<double>() == 1.0);
    CHECK(delta["stopping_distance"].is_null());
}
