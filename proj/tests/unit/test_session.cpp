#include <doctest.h>

#include <cmath>

#include "memsim/session.hpp"

using namespace memsim;

namespace {

ScenarioConfig short_cruise(double duration = 3.0) {
    ScenarioConfig cfg = presets::benign_cruise();
    cfg.duration = duration;
    cfg.initial_speed = 13.89;
    return cfg;
}

AttackConfig resonant(std::optional<double> start = std::nullopt) {
    AttackConfig a = *presets::resonant_attack().attack;
    a.start_t = start;
    return a;
}

SessionLog run_all(const ScenarioConfig& cfg) {
    Session s(cfg);
    s.run_to_end();
    return s.log();
}

}  // namespace

TEST_CASE("one record per tick on the dt grid") {
    const ScenarioConfig cfg = short_cruise(2.0);
    Session s(cfg);
    CHECK(s.state() == SessionState::Created);
    CHECK(s.total_ticks() == 2001);
    CHECK(s.run_to_end() == 2001);
    CHECK(s.state() == SessionState::Completed);
    const auto& rs = s.log().records;
    REQUIRE(rs.size() == 2001);
    for (std::size_t k = 0; k < rs.size(); ++k) {
        CHECK(rs[k].t == static_cast<double>(k) * cfg.dt);
        CHECK(rs[k].truth.t == rs[k].t);
    }
    CHECK(s.sim_time() == 2.0);
    CHECK_FALSE(s.log().fault_tick);
}

TEST_CASE("same config and seed give identical logs") {
    ScenarioConfig cfg = presets::resonant_attack();
    cfg.duration = 12.0;
    CHECK(run_all(cfg) == run_all(cfg));
    ScenarioConfig other = cfg;
    other.seed = 2;
    CHECK(run_all(cfg).records != run_all(other).records);
}

TEST_CASE("pausing does not change the outcome") {
    const ScenarioConfig cfg = short_cruise();
    Session paused(cfg);
    CHECK(paused.run(1.0) == 1001);
    CHECK(paused.state() == SessionState::Paused);
    CHECK(paused.sim_time() == 1.0);
    CHECK(paused.run(1.0) == 0);
    paused.run(2.2345);
    CHECK(paused.next_tick() == 2235);
    paused.run_to_end();
    CHECK(paused.log() == run_all(cfg));

    // A prefix run is a prefix of the full run.
    Session prefix(cfg);
    prefix.run(0.5);
    const SessionLog full = run_all(cfg);
    REQUIRE(prefix.log().records.size() == 501);
    for (std::size_t k = 0; k < 501; ++k) CHECK(prefix.log().records[k] == full.records[k]);
}

TEST_CASE("run rejects NaN and caps at the duration") {
    Session s(short_cruise(1.0));
    CHECK_THROWS_AS(s.run(NAN), std::invalid_argument);
    CHECK(s.run(100.0) == 1001);
    CHECK(s.state() == SessionState::Completed);
}

TEST_CASE("live attack takes effect on the next tick") {
    const ScenarioConfig cfg = without_attack(short_cruise());
    ScenarioConfig raw = cfg;
    raw.controller.fusion.fusion_enabled = false;
    const SessionLog benign = run_all(raw);

    Session s(raw);
    s.run(2.0);
    const SessionEvent event = s.apply_attack(resonant());
    CHECK(event.tick == 2001);
    CHECK(event.t == 2.0);
    CHECK(event.kind == SessionEventKind::AttackApplied);
    REQUIRE(event.attack.start_t);
    CHECK(*event.attack.start_t == 2.0);
    s.run_to_end();
    const auto& rs = s.log().records;

    CHECK(rs[2000].pressure == 0.0);
    CHECK(rs[2000] == benign.records[2000]);
    CHECK(rs[2001].pressure > 0.0);
    CHECK(rs[2001].imu.injected);
    // The corrupted sample changes the command on tick 2001, and the plant
    // feels it one step later.
    CHECK(rs[2001].control.a_long != benign.records[2001].control.a_long);
    CHECK(rs[2001].truth == benign.records[2001].truth);
    CHECK(rs[2002].truth.v != benign.records[2002].truth.v);
}

TEST_CASE("replacing an attack swaps it on the next tick") {
    Session s(short_cruise());
    s.run(1.0);
    s.apply_attack(resonant());
    s.run(1.5);
    AttackConfig quieter = resonant();
    quieter.spl_at_source = 60.0;
    const SessionEvent& ev = s.apply_attack(quieter);
    CHECK(ev.kind == SessionEventKind::AttackReplaced);
    CHECK(ev.tick == 1501);
    CHECK(s.active_attack() == ev.attack);
    s.run_to_end();
    const auto& rs = s.log().records;
    const double loud = pressure_amplitude(resonant(1.0));
    const double soft = pressure_amplitude(quieter);
    CHECK(std::abs(rs[1500].pressure) == doctest::Approx(loud).epsilon(1e-6));
    CHECK(std::abs(rs[1501].pressure) <= soft);
    CHECK(s.log().events.size() == 2);
}

TEST_CASE("replay reproduces a live session") {
    Session s(short_cruise());
    s.apply_attack(resonant(0.7));  // before any tick
    s.run(1.2);
    s.apply_attack(resonant());
    s.run(2.5);
    AttackConfig off = resonant();
    off.carrier_freq = 2600.0;
    s.apply_attack(off);
    s.run_to_end();
    CHECK(replay(s.config(), s.log().events) == s.log());
    CHECK(s.log().events.front().tick == 0);
}

TEST_CASE("scenario attacks without a start time begin at zero") {
    ScenarioConfig cfg = short_cruise(0.1);
    cfg.attack = resonant();
    Session s(cfg);
    REQUIRE(s.active_attack());
    CHECK(s.active_attack()->start_t == 0.0);
    s.run_to_end();
    CHECK(s.log().records[0].pressure != 0.0);
    CHECK(s.log().events.empty());
}

TEST_CASE("lifecycle errors") {
    Session s(short_cruise(0.2));
    s.run_to_end();
    CHECK_THROWS_AS(s.run(1.0), LifecycleError);
    CHECK_THROWS_AS(s.run_to_end(), LifecycleError);
    CHECK_THROWS_AS(s.apply_attack(resonant()), LifecycleError);

    Session fresh(short_cruise(0.2));
    AttackConfig bad = resonant();
    bad.spl_at_source = 500.0;
    try {
        fresh.apply_attack(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.issues().front().field == "attack.spl_at_source");
    }
    CHECK(fresh.log().events.empty());

    ScenarioConfig invalid = short_cruise();
    invalid.duration = -1.0;
    CHECK_THROWS_AS(Session{invalid}, ValidationError);
}

TEST_CASE("a diverging run is faulted with the tick index") {
    ScenarioConfig cfg = short_cruise(1.0);
    cfg.initial_speed = 1e308;
    Session s(cfg);
    s.run_to_end();
    CHECK(s.state() == SessionState::Faulted);
    REQUIRE(s.log().fault_tick);
    CHECK(s.log().records.size() <= *s.log().fault_tick + 1);
    CHECK_FALSE(s.fault_reason().empty());
    CHECK_THROWS_AS(s.run_to_end(), LifecycleError);
    for (const auto& r : s.log().records) CHECK(std::isfinite(r.truth.v));
}

TEST_CASE("brake test records braking until standstill") {
    ScenarioConfig cfg = presets::brake_test();
    const SessionLog log = run_all(cfg);
    CHECK(log.records.front().control.brake > 0.0);
    CHECK(log.records.back().truth.v == 0.0);
    for (const auto& r : log.records) {
        CHECK(r.truth.v >= 0.0);
        CHECK(r.control.brake >= 0.0);
        CHECK(r.control.brake <= 1.0);
    }
}
