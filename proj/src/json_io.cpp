#include "memsim/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace memsim {

namespace {

class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(where() + "expected an object");
    }

    const Json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const char* key, double& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) fail(key, "expected a number");
            out = v->get<double>();
        }
    }
    void read(const char* key, bool& out) {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) fail(key, "expected true or false");
            out = v->get<bool>();
        }
    }
    void read(const char* key, std::uint64_t& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void read(const char* key, std::uint32_t& out) {
        std::uint64_t wide = out;
        read(key, wide);
        if (wide > 0xffffffffULL) fail(key, "integer out of range");
        out = static_cast<std::uint32_t>(wide);
    }
    std::string read_string(const char* key, std::string fallback) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) fail(key, "expected a string");
            return v->get<std::string>();
        }
        return fallback;
    }
    template <typename Fn>
    void nested(const char* key, Fn&& fn) {
        if (const Json* v = find(key)) {
            ObjectReader child(*v, child_path(key));
            fn(child);
            child.finish();
        }
    }

    [[noreturn]] void fail(const char* key, const std::string& message) const {
        throw ParseError(child_path(key) + ": " + message);
    }

    std::string child_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ParseError(child_path(it.key().c_str()) + ": unknown field");
        }
    }

private:
    std::string where() const { return path_.empty() ? "" : path_ + ": "; }

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Infinity has no JSON literal; the open-ended attack duration is null.
Json finite_or_null(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json to_json(const PidGains& g) {
    Json j;
    j["kp"] = g.kp;
    j["ki"] = g.ki;
    j["kd"] = g.kd;
    j["output_min"] = g.output_min;
    j["output_max"] = g.output_max;
    return j;
}

void read_pid(ObjectReader& r, PidGains& g) {
    r.read("kp", g.kp);
    r.read("ki", g.ki);
    r.read("kd", g.kd);
    r.read("output_min", g.output_min);
    r.read("output_max", g.output_max);
}

void read_attack(ObjectReader& r, AttackConfig& a) {
    const std::string type = r.read_string("attacker_type", to_string(a.attacker_type));
    if (type == "internal") {
        a.attacker_type = AttackerType::Internal;
    } else if (type == "external") {
        a.attacker_type = AttackerType::External;
    } else {
        r.fail("attacker_type", "expected \"internal\" or \"external\"");
    }
    r.read("carrier_freq", a.carrier_freq);
    r.read("spl_at_source", a.spl_at_source);
    r.read("distance", a.distance);
    r.read("trigger_rate", a.trigger_rate);
    r.read("duty", a.duty);
    if (const Json* v = r.find("start_t")) {
        if (v->is_null()) {
            a.start_t.reset();
        } else if (v->is_number()) {
            a.start_t = v->get<double>();
        } else {
            r.fail("start_t", "expected a number or null");
        }
    }
    if (const Json* v = r.find("duration")) {
        if (v->is_null()) {
            a.duration = std::numeric_limits<double>::infinity();
        } else if (v->is_number()) {
            a.duration = v->get<double>();
        } else {
            r.fail("duration", "expected a number or null");
        }
    }
    r.read("phase", a.phase);
}

}  // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

std::string to_string(ScenarioKind kind) { return kind == ScenarioKind::Cruise ? "cruise" : "brake_test"; }

std::string to_string(AttackerType type) { return type == AttackerType::Internal ? "internal" : "external"; }

Json to_json(const AttackConfig& a) {
    Json j;
    j["attacker_type"] = to_string(a.attacker_type);
    j["carrier_freq"] = a.carrier_freq;
    j["spl_at_source"] = a.spl_at_source;
    j["distance"] = a.distance;
    j["trigger_rate"] = a.trigger_rate;
    j["duty"] = a.duty;
    j["start_t"] = a.start_t ? Json(*a.start_t) : Json(nullptr);
    j["duration"] = finite_or_null(a.duration);
    j["phase"] = a.phase;
    return j;
}

Json to_json(const ScenarioConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["dt"] = c.dt;
    j["duration"] = c.duration;
    j["scenario_kind"] = to_string(c.scenario_kind);
    j["initial_speed"] = c.initial_speed;
    j["setpoints"] = {{"v_set", c.setpoints.v_set}, {"heading_set", c.setpoints.heading_set}};

    const auto& v = c.vehicle;
    j["vehicle"] = {{"wheel_radius", v.wheel_radius},
                    {"track_width", v.track_width},
                    {"mass", v.mass},
                    {"max_accel", v.max_accel},
                    {"max_brake_decel", v.max_brake_decel},
                    {"mu_peak", v.mu_peak},
                    {"slip_lock_threshold", v.slip_lock_threshold}};

    const auto& m = c.sensors.mems;
    Json mems;
    mems["f_res_accel"] = m.f_res_accel;
    mems["f_res_gyro"] = m.f_res_gyro;
    mems["q_factor"] = m.q_factor;
    mems["sample_rate"] = m.sample_rate;
    mems["coupling_accel"] = m.coupling_accel;
    mems["coupling_gyro"] = m.coupling_gyro;
    mems["noise_std_accel"] = m.noise_std_accel;
    mems["noise_std_gyro"] = m.noise_std_gyro;
    mems["drift_rate_accel"] = m.drift_rate_accel;
    mems["axis_coupling"] = to_json(m.axis_coupling);
    j["sensors"]["mems"] = mems;
    j["sensors"]["encoder"] = {{"ticks_per_rev", c.sensors.encoder.ticks_per_rev},
                               {"sample_rate", c.sensors.encoder.sample_rate}};

    const auto& ctl = c.controller;
    j["controller"]["speed_pid"] = to_json(ctl.speed_pid);
    j["controller"]["heading_pid"] = to_json(ctl.heading_pid);
    j["controller"]["fusion"] = {{"alpha", ctl.fusion.alpha},
                                 {"slip_threshold", ctl.fusion.slip_threshold},
                                 {"fusion_enabled", ctl.fusion.fusion_enabled}};
    j["controller"]["abs"] = {{"enabled", ctl.abs.enabled},
                              {"apply_rate", ctl.abs.apply_rate},
                              {"release_rate", ctl.abs.release_rate},
                              {"min_speed", ctl.abs.min_speed},
                              {"requested_pressure", ctl.abs.requested_pressure}};

    const auto& th = c.thresholds;
    j["thresholds"] = {{"velocity_error_fraction", th.velocity_error_fraction},
                       {"velocity_error_sustain", th.velocity_error_sustain},
                       {"lateral_deviation", th.lateral_deviation},
                       {"stopping_inflation", th.stopping_inflation}};
    j["attack"] = c.attack ? to_json(*c.attack) : Json(nullptr);
    return j;
}

AttackConfig attack_from_json(const Json& j) {
    AttackConfig a;
    ObjectReader r(j, "");
    read_attack(r, a);
    r.finish();
    return a;
}

ScenarioConfig scenario_from_json(const Json& j) {
    ScenarioConfig c;
    ObjectReader r(j, "");
    r.read("seed", c.seed);
    r.read("dt", c.dt);
    r.read("duration", c.duration);
    const std::string kind = r.read_string("scenario_kind", to_string(c.scenario_kind));
    if (kind == "cruise") {
        c.scenario_kind = ScenarioKind::Cruise;
    } else if (kind == "brake_test") {
        c.scenario_kind = ScenarioKind::BrakeTest;
    } else {
        r.fail("scenario_kind", "expected \"cruise\" or \"brake_test\"");
    }
    r.read("initial_speed", c.initial_speed);
    r.nested("setpoints", [&](ObjectReader& s) {
        s.read("v_set", c.setpoints.v_set);
        s.read("heading_set", c.setpoints.heading_set);
    });
    r.nested("vehicle", [&](ObjectReader& s) {
        auto& v = c.vehicle;
        s.read("wheel_radius", v.wheel_radius);
        s.read("track_width", v.track_width);
        s.read("mass", v.mass);
        s.read("max_accel", v.max_accel);
        s.read("max_brake_decel", v.max_brake_decel);
        s.read("mu_peak", v.mu_peak);
        s.read("slip_lock_threshold", v.slip_lock_threshold);
    });
    r.nested("sensors", [&](ObjectReader& s) {
        s.nested("mems", [&](ObjectReader& m) {
            auto& p = c.sensors.mems;
            m.read("f_res_accel", p.f_res_accel);
            m.read("f_res_gyro", p.f_res_gyro);
            m.read("q_factor", p.q_factor);
            m.read("sample_rate", p.sample_rate);
            m.read("coupling_accel", p.coupling_accel);
            m.read("coupling_gyro", p.coupling_gyro);
            m.read("noise_std_accel", p.noise_std_accel);
            m.read("noise_std_gyro", p.noise_std_gyro);
            m.read("drift_rate_accel", p.drift_rate_accel);
            if (const Json* axis = m.find("axis_coupling")) {
                if (!axis->is_array() || axis->size() != 3 || !(*axis)[0].is_number() || !(*axis)[1].is_number() ||
                    !(*axis)[2].is_number()) {
                    m.fail("axis_coupling", "expected an array of 3 numbers");
                }
                p.axis_coupling = {(*axis)[0].get<double>(), (*axis)[1].get<double>(), (*axis)[2].get<double>()};
            }
        });
        s.nested("encoder", [&](ObjectReader& e) {
            e.read("ticks_per_rev", c.sensors.encoder.ticks_per_rev);
            e.read("sample_rate", c.sensors.encoder.sample_rate);
        });
    });
    r.nested("controller", [&](ObjectReader& s) {
        s.nested("speed_pid", [&](ObjectReader& p) { read_pid(p, c.controller.speed_pid); });
        s.nested("heading_pid", [&](ObjectReader& p) { read_pid(p, c.controller.heading_pid); });
        s.nested("fusion", [&](ObjectReader& f) {
            f.read("alpha", c.controller.fusion.alpha);
            f.read("slip_threshold", c.controller.fusion.slip_threshold);
            f.read("fusion_enabled", c.controller.fusion.fusion_enabled);
        });
        s.nested("abs", [&](ObjectReader& a) {
            a.read("enabled", c.controller.abs.enabled);
            a.read("apply_rate", c.controller.abs.apply_rate);
            a.read("release_rate", c.controller.abs.release_rate);
            a.read("min_speed", c.controller.abs.min_speed);
            a.read("requested_pressure", c.controller.abs.requested_pressure);
        });
    });
    r.nested("thresholds", [&](ObjectReader& t) {
        t.read("velocity_error_fraction", c.thresholds.velocity_error_fraction);
        t.read("velocity_error_sustain", c.thresholds.velocity_error_sustain);
        t.read("lateral_deviation", c.thresholds.lateral_deviation);
        t.read("stopping_inflation", c.thresholds.stopping_inflation);
    });
    if (const Json* a = r.find("attack")) {
        if (!a->is_null()) {
            AttackConfig attack;
            ObjectReader ar(*a, "attack");
            read_attack(ar, attack);
            ar.finish();
            c.attack = attack;
        }
    }
    r.finish();
    return c;
}

std::string config_digest(const ScenarioConfig& cfg) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(cfg).dump()) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace memsim
