#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memsim/metrics.hpp"
#include "memsim/scenario.hpp"

namespace memsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitFaulted = 3;

/// Loads a scenario from a JSON file, or a built-in one as "preset:NAME".
/// Throws ParseError / ValidationError.
ScenarioConfig load_scenario(const std::string& source);
AttackConfig load_attack(const std::string& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

enum class SweepAxis { Freq, Spl, TriggerRate };

SweepAxis parse_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepSpec {
    ScenarioConfig base;      // attack template must be set
    SweepAxis axis = SweepAxis::Freq;
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 2;
    unsigned jobs = 0;        // 0: hardware concurrency
};

struct SweepRow {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double value = 0.0;
    SessionState state = SessionState::Completed;
    MetricsReport metrics;  // against the point's benign reference
};

/// Grid value of point i.
double sweep_value(const SweepSpec& spec, std::size_t index);
/// The config run at point i (seed = base seed + i).
ScenarioConfig sweep_point(const SweepSpec& spec, std::size_t index);

/// Runs every grid point (concurrently) with a benign reference per point.
/// Rows go to `table` in grid order as soon as each is ready. Throws
/// ValidationError when steps < 2 or any point's config is invalid.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::ostream* table);

std::string sweep_header(SweepAxis axis);
std::string sweep_line(const SweepRow& row);

/// Entry point shared by the memsim binary and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace memsim::cli
