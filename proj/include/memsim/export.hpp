#pragma once

#include <string>
#include <string_view>

#include "memsim/json_io.hpp"
#include "memsim/session.hpp"

namespace memsim {

enum class LogFormat { Csv, Json };

/// "csv" or "json"; throws std::invalid_argument otherwise.
LogFormat parse_log_format(std::string_view name);

inline constexpr std::string_view kCsvHeader =
    "t,x,y,heading,v_true,v_est,v_wheel,ax_imu,gyro_z,cmd_a,cmd_yaw,brake,pressure";

/// One row per record, shortest round-trip decimal for every double.
std::string export_csv(const SessionLog& log);

/// Config, events and column-wise records. Non-finite values are written as
/// null. parse_log_json(export_json(log)) == log.
std::string export_json(const SessionLog& log);
Json log_to_json(const SessionLog& log);

std::string export_log(const SessionLog& log, LogFormat format);
/// Throws std::invalid_argument for an unknown format name.
std::string export_log(const SessionLog& log, std::string_view format);

/// Throws ParseError on malformed or truncated documents.
SessionLog parse_log_json(std::string_view text);
SessionLog log_from_json(const Json& j);

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

}  // namespace memsim
