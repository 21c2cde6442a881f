#include "memsim/export.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace memsim {

namespace {

struct NumberColumn {
    const char* name;
    double (*get)(const TickRecord&);
    void (*set)(TickRecord&, double);
};

struct FlagColumn {
    const char* name;
    bool (*get)(const TickRecord&);
    void (*set)(TickRecord&, bool);
};

#define MEMSIM_NUM(key, member) \
    NumberColumn { key, [](const TickRecord& r) { return r.member; }, [](TickRecord& r, double v) { r.member = v; } }
#define MEMSIM_FLAG(key, member) \
    FlagColumn { key, [](const TickRecord& r) { return r.member; }, [](TickRecord& r, bool v) { r.member = v; } }

const NumberColumn kNumberColumns[] = {
    MEMSIM_NUM("t", t),
    MEMSIM_NUM("x", truth.x),
    MEMSIM_NUM("y", truth.y),
    MEMSIM_NUM("heading", truth.heading),
    MEMSIM_NUM("v_true", truth.v),
    MEMSIM_NUM("yaw_rate", truth.yaw_rate),
    MEMSIM_NUM("a_long", truth.a_long),
    MEMSIM_NUM("omega_wheel_left", truth.omega_wheel_left),
    MEMSIM_NUM("omega_wheel_right", truth.omega_wheel_right),
    MEMSIM_NUM("wheel_angle_left", truth.wheel_angle_left),
    MEMSIM_NUM("wheel_angle_right", truth.wheel_angle_right),
    MEMSIM_NUM("truth_t", truth.t),
    MEMSIM_NUM("imu_t", imu.t),
    MEMSIM_NUM("ax_imu", imu.accel.x),
    MEMSIM_NUM("ay_imu", imu.accel.y),
    MEMSIM_NUM("az_imu", imu.accel.z),
    MEMSIM_NUM("gyro_z", imu.gyro_z),
    MEMSIM_NUM("wheel_t", wheel.t),
    MEMSIM_NUM("omega_left", wheel.omega_left),
    MEMSIM_NUM("omega_right", wheel.omega_right),
    MEMSIM_NUM("v_wheel_truth", wheel.v_ground_truth),
    MEMSIM_NUM("cmd_a", control.a_long),
    MEMSIM_NUM("cmd_yaw", control.yaw_rate),
    MEMSIM_NUM("brake", control.brake),
    MEMSIM_NUM("v_est", control.v_est),
    MEMSIM_NUM("v_imu", control.diag.v_imu),
    MEMSIM_NUM("v_wheel", control.diag.v_wheel),
    MEMSIM_NUM("heading_est", control.diag.heading_est),
    MEMSIM_NUM("heading_error", control.diag.heading_error),
    MEMSIM_NUM("slip_ratio", control.diag.slip_ratio),
    MEMSIM_NUM("pressure", pressure),
};

const FlagColumn kFlagColumns[] = {
    MEMSIM_FLAG("braking", truth.braking),
    MEMSIM_FLAG("injected", imu.injected),
    MEMSIM_FLAG("slipping", control.diag.slipping),
    MEMSIM_FLAG("abs_engaged", control.diag.abs_engaged),
    MEMSIM_FLAG("missing_sample", control.diag.missing_sample),
};

#undef MEMSIM_NUM
#undef MEMSIM_FLAG

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const Json& member(const Json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + key + ": missing");
    return *it;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw std::runtime_error("double formatting failed");
    return std::string(buf, end);
}

LogFormat parse_log_format(std::string_view name) {
    if (name == "csv") return LogFormat::Csv;
    if (name == "json") return LogFormat::Json;
    throw std::invalid_argument("unknown log format \"" + std::string(name) + "\" (expected csv or json)");
}

std::string export_csv(const SessionLog& log) {
    std::string out(kCsvHeader);
    out += '\n';
    out.reserve(out.size() + log.records.size() * 160);
    for (const TickRecord& r : log.records) {
        const double row[] = {r.t,         r.truth.x,         r.truth.y,          r.truth.heading,
                              r.truth.v,   r.control.v_est,   r.control.diag.v_wheel, r.imu.accel.x,
                              r.imu.gyro_z, r.control.a_long, r.control.yaw_rate, r.control.brake,
                              r.pressure};
        for (std::size_t i = 0; i < std::size(row); ++i) {
            if (i > 0) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

Json log_to_json(const SessionLog& log) {
    Json j;
    j["config"] = to_json(log.config);
    Json events = Json::array();
    for (const SessionEvent& e : log.events) {
        Json ev;
        ev["tick"] = e.tick;
        ev["t"] = e.t;
        ev["kind"] = to_string(e.kind);
        ev["attack"] = to_json(e.attack);
        events.push_back(std::move(ev));
    }
    j["events"] = std::move(events);
    j["fault_tick"] = log.fault_tick ? Json(*log.fault_tick) : Json(nullptr);
    j["record_count"] = log.records.size();

    Json records = Json::object();
    for (const NumberColumn& c : kNumberColumns) {
        Json col = Json::array();
        col.get_ref<Json::array_t&>().reserve(log.records.size());
        for (const TickRecord& r : log.records) col.push_back(number_or_null(c.get(r)));
        records[c.name] = std::move(col);
    }
    for (const FlagColumn& c : kFlagColumns) {
        Json col = Json::array();
        for (const TickRecord& r : log.records) col.push_back(c.get(r));
        records[c.name] = std::move(col);
    }
    j["records"] = std::move(records);
    return j;
}

std::string export_json(const SessionLog& log) { return log_to_json(log).dump(); }

std::string export_log(const SessionLog& log, LogFormat format) {
    return format == LogFormat::Csv ? export_csv(log) : export_json(log);
}

std::string export_log(const SessionLog& log, std::string_view format) {
    return export_log(log, parse_log_format(format));
}

SessionLog log_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("log: expected an object");
    SessionLog log;
    try {
        log.config = scenario_from_json(member(j, "config", "log."));
    } catch (const ParseError& e) {
        throw ParseError(std::string("log.config.") + e.what());
    }

    const Json& events = member(j, "events", "log.");
    if (!events.is_array()) throw ParseError("log.events: expected an array");
    for (const Json& ev : events) {
        if (!ev.is_object()) throw ParseError("log.events: expected objects");
        SessionEvent e;
        const Json& tick = member(ev, "tick", "log.events.");
        const Json& t = member(ev, "t", "log.events.");
        const Json& kind = member(ev, "kind", "log.events.");
        if (!tick.is_number_unsigned() || !t.is_number() || !kind.is_string()) {
            throw ParseError("log.events: wrong field types");
        }
        e.tick = tick.get<std::uint64_t>();
        e.t = t.get<double>();
        const std::string k = kind.get<std::string>();
        if (k == "attack_applied") {
            e.kind = SessionEventKind::AttackApplied;
        } else if (k == "attack_replaced") {
            e.kind = SessionEventKind::AttackReplaced;
        } else {
            throw ParseError("log.events.kind: unknown event \"" + k + "\"");
        }
        e.attack = attack_from_json(member(ev, "attack", "log.events."));
        log.events.push_back(e);
    }

    const Json& fault = member(j, "fault_tick", "log.");
    if (!fault.is_null()) {
        if (!fault.is_number_unsigned()) throw ParseError("log.fault_tick: expected a tick index or null");
        log.fault_tick = fault.get<std::uint64_t>();
    }

    const Json& count_json = member(j, "record_count", "log.");
    if (!count_json.is_number_unsigned()) throw ParseError("log.record_count: expected a count");
    const std::size_t count = count_json.get<std::size_t>();
    const Json& records = member(j, "records", "log.");
    if (!records.is_object()) throw ParseError("log.records: expected an object of columns");
    log.records.resize(count);

    auto column = [&](const char* name) -> const Json& {
        const Json& col = member(records, name, "log.records.");
        if (!col.is_array() || col.size() != count) {
            throw ParseError(std::string("log.records.") + name + ": expected " + std::to_string(count) + " values");
        }
        return col;
    };
    for (const NumberColumn& c : kNumberColumns) {
        const Json& col = column(c.name);
        for (std::size_t i = 0; i < count; ++i) {
            const Json& v = col[i];
            if (v.is_null()) {
                c.set(log.records[i], std::numeric_limits<double>::quiet_NaN());
            } else if (v.is_number()) {
                c.set(log.records[i], v.get<double>());
            } else {
                throw ParseError(std::string("log.records.") + c.name + ": expected numbers");
            }
        }
    }
    for (const FlagColumn& c : kFlagColumns) {
        const Json& col = column(c.name);
        for (std::size_t i = 0; i < count; ++i) {
            if (!col[i].is_boolean()) throw ParseError(std::string("log.records.") + c.name + ": expected booleans");
            c.set(log.records[i], col[i].get<bool>());
        }
    }
    if (records.size() != std::size(kNumberColumns) + std::size(kFlagColumns)) {
        throw ParseError("log.records: unknown columns");
    }
    return log;
}

SessionLog parse_log_json(std::string_view text) { return log_from_json(parse_json(text)); }

}  // namespace memsim
