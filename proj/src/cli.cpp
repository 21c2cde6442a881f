#include "memsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "memsim/export.hpp"

namespace memsim::cli {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

ScenarioConfig load_scenario(const std::string& source) {
    constexpr std::string_view prefix = "preset:";
    if (source.rfind(prefix, 0) == 0) {
        auto cfg = presets::by_name(source.substr(prefix.size()));
        if (!cfg) throw ParseError("unknown preset \"" + source.substr(prefix.size()) + "\"");
        return *cfg;
    }
    try {
        return scenario_from_json(parse_json(read_file(source)));
    } catch (const ParseError& e) {
        throw ParseError(source + ": " + e.what());
    }
}

AttackConfig load_attack(const std::string& path) {
    try {
        return attack_from_json(parse_json(read_file(path)));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "freq") return SweepAxis::Freq;
    if (name == "spl") return SweepAxis::Spl;
    if (name == "trigger_rate") return SweepAxis::TriggerRate;
    throw ValidationError(std::vector<FieldIssue>{{"axis", "expected freq, spl or trigger_rate"}});
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Freq: return "freq";
        case SweepAxis::Spl: return "spl";
        case SweepAxis::TriggerRate: return "trigger_rate";
    }
    return "unknown";
}

double sweep_value(const SweepSpec& spec, std::size_t index) {
    if (spec.steps < 2) return spec.from;
    if (index + 1 == spec.steps) return spec.to;
    return spec.from + (spec.to - spec.from) * static_cast<double>(index) / static_cast<double>(spec.steps - 1);
}

ScenarioConfig sweep_point(const SweepSpec& spec, std::size_t index) {
    ScenarioConfig cfg = spec.base;
    cfg.seed = spec.base.seed + index;
    const double value = sweep_value(spec, index);
    AttackConfig& attack = *cfg.attack;
    switch (spec.axis) {
        case SweepAxis::Freq: attack.carrier_freq = value; break;
        case SweepAxis::Spl: attack.spl_at_source = value; break;
        case SweepAxis::TriggerRate: attack.trigger_rate = value; break;
    }
    return cfg;
}

std::string sweep_header(SweepAxis axis) {
    return "index,seed," + to_string(axis) +
           ",state,velocity_rmse_vs_setpoint,max_velocity_est_error,max_lateral_deviation,max_heading_error,"
           "imu_wheel_discrepancy_rms,jerk_rms,stopping_distance,velocity_error_sustained,attack_success";
}

std::string sweep_line(const SweepRow& row) {
    const MetricsReport& m = row.metrics;
    std::string line = std::to_string(row.index) + "," + std::to_string(row.seed) + "," + format_double(row.value) +
                       "," + to_string(row.state);
    for (double v : {m.velocity_rmse_vs_setpoint, m.max_velocity_est_error, m.max_lateral_deviation,
                     m.max_heading_error, m.imu_wheel_discrepancy_rms, m.jerk_rms}) {
        line += "," + format_double(v);
    }
    line += "," + (m.stopping_distance ? format_double(*m.stopping_distance) : std::string());
    line += "," + format_double(m.velocity_error_sustained);
    line += "," + to_string(m.attack_success);
    return line;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::ostream* table) {
    IssueList issues;
    issues.require(spec.steps >= 2, "steps", "must be >= 2");
    issues.require(spec.base.attack.has_value(), "attack", "a sweep needs an attack template");
    issues.require(std::isfinite(spec.from) && std::isfinite(spec.to), "range", "must be finite");
    issues.throw_if_any();
    for (std::size_t i = 0; i < spec.steps; ++i) {
        try {
            validate(sweep_point(spec, i));
        } catch (const ValidationError& e) {
            std::vector<FieldIssue> tagged = e.issues();
            for (auto& issue : tagged) issue.message += " (grid point " + std::to_string(i) + ")";
            throw ValidationError(tagged);
        }
    }

    std::vector<std::optional<SweepRow>> rows(spec.steps);
    std::mutex mutex;
    std::condition_variable ready;
    std::size_t next = 0;
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            std::size_t i;
            {
                std::lock_guard lock(mutex);
                if (next >= spec.steps || failure) return;
                i = next++;
            }
            try {
                const ScenarioConfig cfg = sweep_point(spec, i);
                Session attack(cfg);
                attack.run_to_end();
                Session benign(without_attack(cfg));
                benign.run_to_end();
                SweepRow row{i, cfg.seed, sweep_value(spec, i), attack.state(),
                             compute_metrics(attack.log(), &benign.log())};
                std::lock_guard lock(mutex);
                rows[i] = row;
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
            }
            ready.notify_all();
        }
    };

    unsigned jobs = spec.jobs ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, spec.steps));
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(worker);

    if (table) *table << sweep_header(spec.axis) << '\n' << std::flush;
    std::vector<SweepRow> out;
    for (std::size_t i = 0; i < spec.steps; ++i) {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return rows[i].has_value() || failure; });
        if (!rows[i]) break;
        out.push_back(*rows[i]);
        lock.unlock();
        if (table) *table << sweep_line(out.back()) << '\n' << std::flush;
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

namespace {

std::vector<std::string> split_formats(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            parse_log_format(part);
            if (std::find(out.begin(), out.end(), part) == out.end()) out.push_back(part);
        }
    }
    return out;
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto sep = text.find_first_of(":,");
    if (sep == std::string::npos) throw ValidationError(std::vector<FieldIssue>{{"range", "expected FROM:TO"}});
    try {
        std::size_t used = 0;
        const std::string a = text.substr(0, sep);
        const std::string b = text.substr(sep + 1);
        const double from = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        const double to = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        return {from, to};
    } catch (const std::logic_error&) {
        throw ValidationError(std::vector<FieldIssue>{{"range", "expected FROM:TO with numbers, got \"" + text + "\""}});
    }
}

void print_issues(std::ostream& err, const ValidationError& e) {
    err << "error: invalid configuration\n";
    for (const auto& issue : e.issues()) err << "  " << issue.field << ": " << issue.message << '\n';
}

struct RunArgs {
    std::string scenario;
    std::string attack;
    std::string out = ".";
    std::vector<std::string> formats{"csv"};
    std::optional<std::uint64_t> seed;
    std::size_t repeat = 1;
    bool no_attack = false;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg = load_scenario(args.scenario);
    if (!args.attack.empty()) cfg.attack = load_attack(args.attack);
    if (args.seed) cfg.seed = *args.seed;
    if (args.no_attack) cfg.attack.reset();
    const auto formats = split_formats(args.formats);
    if (args.repeat < 1) throw ValidationError(std::vector<FieldIssue>{{"repeat", "must be >= 1"}});
    validate(cfg);

    int code = kExitOk;
    for (std::size_t i = 0; i < args.repeat; ++i) {
        ScenarioConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + i;
        const fs::path dir =
            args.repeat > 1 ? fs::path(args.out) / ("run_" + std::to_string(i + 1)) : fs::path(args.out);
        Session session(run_cfg);
        session.run_to_end();
        const SessionLog& log = session.log();
        for (const auto& f : formats) write_file(dir / ("log." + f), export_log(log, f));
        Json metrics = to_json(compute_metrics(log));
        metrics["state"] = to_string(session.state());
        metrics["seed"] = run_cfg.seed;
        if (log.fault_tick) {
            metrics["fault_tick"] = *log.fault_tick;
            metrics["fault_reason"] = session.fault_reason();
        }
        write_file(dir / "metrics.json", metrics.dump(2) + "\n");
        out << dir.string() << ": " << to_string(session.state()) << ", seed " << run_cfg.seed << ", "
            << log.records.size() << " records, attack_success=" << metrics["attack_success"].get<std::string>()
            << '\n';
        if (session.state() == SessionState::Faulted) {
            err << "session faulted at tick " << *log.fault_tick << ": " << session.fault_reason() << '\n';
            code = kExitFaulted;
        }
    }
    return code;
}

int cmd_compare(const std::string& benign_path, const std::string& attack_path, const std::string& out_path,
                std::ostream& out) {
    const SessionLog benign = parse_log_json(read_file(benign_path));
    const SessionLog attack = parse_log_json(read_file(attack_path));
    const MetricsReport m = compute_metrics(attack, &benign);
    const MetricsReport ref = compute_metrics(benign, &benign);
    Json report;
    report["seed"] = attack.config.seed;
    report["metrics"] = to_json(m);
    report["reference_metrics"] = to_json(ref);
    report["deltas"] = metrics_delta(m, ref);
    report["attack_success"] = to_string(m.attack_success);
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        write_file(out_path, text);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Acoustic MEMS injection vehicle simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    std::uint64_t seed_value = 0;
    auto* run = app.add_subcommand("run", "Run one scenario to completion and write its log and metrics");
    run->add_option("--scenario", run_args.scenario, "Scenario JSON file or preset:NAME")->required();
    run->add_option("--attack", run_args.attack, "Attack JSON file (replaces the scenario's attack)");
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--format", run_args.formats, "Log formats: csv, json (comma separated)");
    auto* run_seed = run->add_option("--seed", seed_value, "Seed override");
    run->add_option("--repeat", run_args.repeat, "Number of runs (seed, seed+1, ...)");
    run->add_flag("--no-attack", run_args.no_attack, "Drop the attack (benign reference run)");

    std::string benign_path;
    std::string attack_log_path;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "Score an attack log against its benign reference");
    compare->add_option("benign", benign_path, "Benign JSON log")->required();
    compare->add_option("attack", attack_log_path, "Attack JSON log")->required();
    compare->add_option("--out", compare_out, "Write the report here instead of stdout");

    std::string sweep_scenario;
    std::string sweep_attack;
    std::string axis_name = "freq";
    std::string range_text;
    std::size_t steps = 0;
    std::string sweep_out;
    unsigned jobs = 0;
    std::uint64_t sweep_seed = 0;
    auto* sweep = app.add_subcommand("sweep", "Run a grid of attacks along one parameter");
    sweep->add_option("--scenario", sweep_scenario, "Scenario JSON file or preset:NAME")->required();
    sweep->add_option("--attack", sweep_attack, "Attack template JSON (default: the scenario's attack)");
    sweep->add_option("--axis", axis_name, "freq, spl or trigger_rate");
    sweep->add_option("--range", range_text, "FROM:TO")->required();
    sweep->add_option("--steps", steps, "Grid points (>= 2)")->required();
    sweep->add_option("--out", sweep_out, "Table file (default stdout)");
    sweep->add_option("--jobs", jobs, "Parallel points (default: all cores)");
    auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "Base seed override");

    double design_rate = 1000.0;
    double design_res = 5200.0;
    double design_alias = 0.0;
    auto* design = app.add_subcommand("design", "Pick a carrier that aliases to a chosen frequency");
    design->add_option("--sample-rate", design_rate, "Sensor sample rate, Hz");
    design->add_option("--f-res", design_res, "Sensor resonance, Hz");
    design->add_option("--alias", design_alias, "Desired apparent frequency, Hz");

    std::string preset_name;
    std::string preset_out;
    auto* preset = app.add_subcommand("preset", "Print a built-in scenario as JSON");
    preset->add_option("name", preset_name, "b1, a1, a0, b2, a2 or sweep")->required();
    preset->add_option("--out", preset_out, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*run) {
            if (*run_seed) run_args.seed = seed_value;
            return cmd_run(run_args, out, err);
        }
        if (*compare) return cmd_compare(benign_path, attack_log_path, compare_out, out);
        if (*sweep) {
            SweepSpec spec;
            spec.base = load_scenario(sweep_scenario);
            if (!sweep_attack.empty()) spec.base.attack = load_attack(sweep_attack);
            if (*sweep_seed_opt) spec.base.seed = sweep_seed;
            spec.axis = parse_axis(axis_name);
            std::tie(spec.from, spec.to) = parse_range(range_text);
            spec.steps = steps;
            spec.jobs = jobs;
            std::vector<SweepRow> rows;
            if (sweep_out.empty()) {
                rows = run_sweep(spec, &out);
            } else {
                if (fs::path(sweep_out).has_parent_path()) fs::create_directories(fs::path(sweep_out).parent_path());
                std::ofstream table(sweep_out, std::ios::binary);
                if (!table) throw std::runtime_error("cannot write " + sweep_out);
                rows = run_sweep(spec, &table);
            }
            const bool faulted = std::any_of(rows.begin(), rows.end(),
                                             [](const SweepRow& r) { return r.state == SessionState::Faulted; });
            return faulted ? kExitFaulted : kExitOk;
        }
        if (*design) {
            out << format_double(design_attack_frequency(design_rate, design_res, design_alias)) << '\n';
            return kExitOk;
        }
        if (*preset) {
            auto cfg = presets::by_name(preset_name);
            if (!cfg) throw ParseError("unknown preset \"" + preset_name + "\"");
            const std::string text = to_json(*cfg).dump(2) + "\n";
            if (preset_out.empty()) {
                out << text;
            } else {
                write_file(preset_out, text);
            }
            return kExitOk;
        }
    } catch (const ValidationError& e) {
        print_issues(err, e);
        return kExitInvalid;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ReferenceMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitInvalid;
}

}  // namespace memsim::cli
