#pragma once

// Run orchestration for the lzsim tool: output files and the run manifest.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lzsim/lzsim.hpp"

namespace lzsim::app {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum Exit { Ok = 0, Usage = 1, Invalid = 2, Runtime = 3 };

inline void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << text;
        if (!f.flush()) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline ordered_json validity_json(const Scenario& sc) {
    ordered_json j;
    try {
        const ValidityReport r = validity_report(sc.system, sc.drive);
        j["verdict"] = r.verdict;
        ordered_json crit = ordered_json::array();
        for (const auto& c : r.criteria)
            crit.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin()}, {"pass", c.pass}});
        j["criteria"] = crit;
        ordered_json tau = ordered_json::array();
        for (const auto& [idx, t] : r.lz_times) tau.push_back({{"crossing", idx}, {"tau_lz", t}});
        j["lz_times"] = tau;
    } catch (const std::exception& e) {
        j["error"] = e.what();
    }
    return j;
}

inline std::string trajectory_csv(const Scenario& sc, const TrajectoryRecord& tr) {
    CsvTable t;
    t.header.push_back("t");
    for (auto& n : diabatic_names(sc.system.arity)) t.header.push_back(n);
    const bool adiabatic = tr.adiabatic.cols() > 0;
    if (adiabatic)
        for (auto& n : adiabatic_names(sc.system.arity)) t.header.push_back(n);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::vector<double> row{tr.times[k]};
        const auto r = static_cast<Eigen::Index>(k);
        for (Eigen::Index j = 0; j < tr.diabatic.cols(); ++j) row.push_back(tr.diabatic(r, j));
        if (adiabatic)
            for (Eigen::Index j = 0; j < tr.adiabatic.cols(); ++j) row.push_back(tr.adiabatic(r, j));
        t.rows.push_back(std::move(row));
    }
    return write_csv(t);
}

inline std::string phases_csv(const CycleDecomposition& d) {
    std::string out = "name,value\n";
    for (const auto& [name, v] : d.phases) out += name + "," + csv_number(v) + "\n";
    return out;
}

struct RunOutcome {
    int exit_code = Ok;
    std::vector<std::string> outputs;
    ordered_json failures = ordered_json::array();
};

// Keeps only the requested value columns (all when the filter is empty).
inline std::vector<std::size_t> selected_columns(const std::vector<std::string>& all,
                                                 const std::vector<std::string>& wanted) {
    std::vector<std::size_t> idx;
    if (wanted.empty()) {
        for (std::size_t k = 0; k < all.size(); ++k) idx.push_back(k);
        return idx;
    }
    for (const auto& w : wanted) {
        std::size_t k = 0;
        while (k < all.size() && all[k] != w) ++k;
        if (k == all.size()) throw ValidationError("columns", "no output column named '" + w + "'");
        idx.push_back(k);
    }
    return idx;
}

inline RunOutcome execute_single(const ScenarioConfig& c, const fs::path& dir) {
    RunOutcome out;
    const Scenario& sc = c.scenario;
    const auto names = sweep_columns(sc, c.engine);
    std::vector<double> values;
    if (c.engine != Engine::AIA) {
        const ScenarioResult ex = evaluate_exact(sc, true);
        write_atomic(dir / "trajectory.csv", trajectory_csv(sc, *ex.trajectory));
        out.outputs.push_back("trajectory.csv");
        values = ex.values;
    }
    if (c.engine != Engine::Exact) {
        const ScenarioResult ai = evaluate_aia(sc);
        if (c.phase_ledger) {
            write_atomic(dir / "phases.csv", phases_csv(ai.aia->decomposition));
            out.outputs.push_back("phases.csv");
        }
        if (c.engine == Engine::AIA) {
            values = ai.values;
        } else {
            double d = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) d = std::max(d, std::abs(values[k] - ai.values[k]));
            values.insert(values.end(), ai.values.begin(), ai.values.end());
            values.push_back(d);
        }
    }
    CsvTable t;
    const auto keep = selected_columns(names, c.columns);
    std::vector<double> row;
    for (auto k : keep) {
        t.header.push_back(names[k]);
        row.push_back(values[k]);
    }
    t.rows.push_back(row);
    write_atomic(dir / "result.csv", write_csv(t));
    out.outputs.push_back("result.csv");
    return out;
}

inline RunOutcome execute_sweep(const ScenarioConfig& c, const fs::path& dir) {
    RunOutcome out;
    const SweepGrid g = run_sweep(c.scenario, c.axes, c.engine);
    const auto keep = selected_columns(g.columns, c.columns);
    CsvTable t;
    for (const auto& a : g.axes) t.header.push_back(a.name);
    for (auto k : keep) t.header.push_back(g.columns[k]);
    for (const auto& p : g.points) {
        std::vector<double> row = p.coords;
        for (auto k : keep) row.push_back(p.ok ? p.values[k] : std::numeric_limits<double>::quiet_NaN());
        t.rows.push_back(std::move(row));
        if (!p.ok) out.failures.push_back({{"coords", p.coords}, {"error", p.error}});
    }
    write_atomic(dir / "sweep.csv", write_csv(t));
    out.outputs.push_back("sweep.csv");
    if (!out.failures.empty()) out.exit_code = Runtime;
    return out;
}

/// Runs a validated config, writing data files and then manifest.json into
/// the output directory.  `command` is "run" or "sweep".
inline RunOutcome execute(const ScenarioConfig& c, const std::string& command) {
    const fs::path dir = c.output;
    fs::create_directories(dir);
    RunOutcome out;
    std::string runtime_error;
    try {
        out = c.axes.empty() ? execute_single(c, dir) : execute_sweep(c, dir);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        runtime_error = e.what();
        out.exit_code = Runtime;
    }

    ordered_json m;
    m["tool"] = "lzsim";
    m["version"] = kVersion;
    m["command"] = command;
    m["created_utc"] = utc_timestamp();
    m["config"] = serialize_config(c);
    m["engine"] = engine_name(c.engine);
    m["integrator"] = {{"scheme", scheme_name(c.scenario.integrator.scheme)},
                       {"tolerance", c.scenario.integrator.tol}};
    m["validity"] = validity_json(c.scenario);
    m["outputs"] = out.outputs;
    m["complete"] = out.exit_code == Ok;
    m["failures"] = out.failures;
    if (!runtime_error.empty()) m["error"] = runtime_error;
    write_atomic(dir / "manifest.json", m.dump(2) + "\n");
    if (!runtime_error.empty()) throw Error(runtime_error);
    return out;
}

/// Config text and command stored in a manifest.
inline std::pair<std::string, std::string> manifest_config(const fs::path& path) {
    const ordered_json m = ordered_json::parse(read_text(path));
    if (!m.contains("config") || !m.contains("command"))
        throw ValidationError("manifest", "missing config or command");
    return {m["config"].get<std::string>(), m["command"].get<std::string>()};
}

}  // namespace lzsim::app
