#pragma once

// Scenario files: UTF-8 `key = value` lines grouped in [system], [drive],
// [run] and [sweep] sections, '#' starting a comment.  Every key is unique
// across sections so command-line flags can override them one to one.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lzsim/error.hpp"
#include "lzsim/sweep.hpp"

namespace lzsim {

struct ScenarioConfig {
    Scenario scenario;
    Engine engine = Engine::Exact;
    std::vector<SweepAxis> axes;
    std::vector<std::string> columns;  // sweep output filter, empty keeps all
    std::string output = "lzsim_out";
    bool phase_ledger = true;

    void validate() const {
        scenario.validate();
        if (axes.size() > 2) throw ValidationError("sweep", "at most two axes");
        for (const auto& a : axes) {
            a.validate();
            Scenario probe = scenario;
            apply_parameter(probe, a.name, a.lo);
        }
        if (output.empty()) throw ValidationError("output", "must not be empty");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> to_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Alternative spellings accepted for a few keys.
inline std::string canonical_key(const std::string& k) {
    static const std::map<std::string, std::string> alias{
        {"Omega", "rabi"},  {"Ω", "rabi"},      {"Δ₀", "Delta0"},
        {"Δ0", "Delta0"}, {"δ", "delta"},  {"ω", "omega"},
        {"initial", "initial_state"}, {"tol", "tolerance"}, {"kind", "drive"},
    };
    const auto it = alias.find(k);
    return it == alias.end() ? k : it->second;
}

inline const std::map<std::string, std::string>& key_sections() {
    static const std::map<std::string, std::string> m{
        {"arity", "system"},        {"rabi", "system"},       {"V0", "system"},
        {"drive", "drive"},         {"v", "drive"},           {"Delta0", "drive"},
        {"delta", "drive"},         {"omega", "drive"},
        {"initial_state", "run"},   {"cycles", "run"},        {"start_phase", "run"},
        {"window", "run"},          {"t_i", "run"},           {"t_f", "run"},
        {"engine", "run"},          {"tolerance", "run"},     {"scheme", "run"},
        {"samples", "run"},         {"output", "run"},        {"phase_ledger", "run"},
        {"axis1", "sweep"},         {"axis2", "sweep"},       {"columns", "sweep"},
    };
    return m;
}

inline SweepAxis parse_axis(const std::string& field, const std::string& text) {
    // name:lo:hi:points
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
    if (parts.size() != 4) throw ValidationError(field, "expected name:lo:hi:points");
    const auto lo = to_number(parts[1]), hi = to_number(parts[2]), n = to_number(parts[3]);
    if (!lo || !hi || !n || *n != std::floor(*n))
        throw ValidationError(field, "expected name:lo:hi:points with numeric bounds");
    return {parts[0], *lo, *hi, static_cast<int>(*n)};
}

inline double need_number(const std::string& key, const std::string& value) {
    const auto v = to_number(value);
    if (!v) throw ValidationError(key, "'" + value + "' is not a finite number");
    return *v;
}

}  // namespace detail

/// Sets one key from its text value.  Unknown keys are a ValidationError.
inline void set_config_key(ScenarioConfig& c, const std::string& raw_key, const std::string& value) {
    using detail::need_number;
    const std::string key = detail::canonical_key(raw_key);
    Scenario& sc = c.scenario;
    if (key == "arity") {
        if (value == "two" || value == "TwoLevel" || value == "2") sc.system.arity = Arity::TwoLevel;
        else if (value == "three" || value == "ThreeLevel" || value == "3") sc.system.arity = Arity::ThreeLevel;
        else throw ValidationError(key, "expected two or three");
    } else if (key == "rabi") {
        sc.system.rabi = need_number(key, value);
    } else if (key == "V0") {
        sc.system.interaction = need_number(key, value);
    } else if (key == "drive") {
        if (value == "linear" || value == "Linear") sc.drive.kind = DriveKind::Linear;
        else if (value == "periodic" || value == "Periodic") sc.drive.kind = DriveKind::Periodic;
        else throw ValidationError(key, "expected linear or periodic");
    } else if (key == "v") {
        sc.drive.rate = need_number(key, value);
    } else if (key == "Delta0") {
        sc.drive.bias = need_number(key, value);
    } else if (key == "delta") {
        sc.drive.amplitude = need_number(key, value);
    } else if (key == "omega") {
        sc.drive.frequency = need_number(key, value);
    } else if (key == "initial_state") {
        const auto s = parse_initial_state(value);
        if (!s) throw ValidationError(key, "unknown initial state '" + value + "'");
        sc.initial = *s;
    } else if (key == "cycles") {
        const double n = need_number(key, value);
        if (n != std::floor(n) || n < 1) throw ValidationError(key, "must be a positive integer");
        sc.cycles = static_cast<int>(n);
    } else if (key == "start_phase") {
        sc.start_phase = need_number(key, value);
    } else if (key == "window") {
        if (value != "standard") throw ValidationError(key, "only 'standard' is accepted; use t_i and t_f");
        sc.t_i.reset();
        sc.t_f.reset();
    } else if (key == "t_i") {
        sc.t_i = need_number(key, value);
    } else if (key == "t_f") {
        sc.t_f = need_number(key, value);
    } else if (key == "engine") {
        if (value == "exact") c.engine = Engine::Exact;
        else if (value == "aia") c.engine = Engine::AIA;
        else if (value == "both") c.engine = Engine::Both;
        else throw ValidationError(key, "expected exact, aia or both");
    } else if (key == "tolerance") {
        sc.integrator.tol = need_number(key, value);
    } else if (key == "scheme") {
        if (value == "dop853") sc.integrator.scheme = Scheme::DormandPrince853;
        else if (value == "dopri5") sc.integrator.scheme = Scheme::DormandPrince54;
        else throw ValidationError(key, "expected dop853 or dopri5");
    } else if (key == "samples") {
        const double n = need_number(key, value);
        if (n != std::floor(n)) throw ValidationError(key, "must be an integer");
        sc.samples = static_cast<int>(n);
    } else if (key == "output") {
        c.output = value;
    } else if (key == "phase_ledger") {
        if (value == "true" || value == "1") c.phase_ledger = true;
        else if (value == "false" || value == "0") c.phase_ledger = false;
        else throw ValidationError(key, "expected true or false");
    } else if (key == "axis1" || key == "axis2") {
        const std::size_t slot = key == "axis1" ? 0 : 1;
        if (c.axes.size() < slot) throw ValidationError(key, "axis2 needs axis1");
        SweepAxis a = detail::parse_axis(key, value);
        if (c.axes.size() == slot) c.axes.push_back(a);
        else c.axes[slot] = a;
    } else if (key == "columns") {
        c.columns.clear();
        std::stringstream ss(value);
        for (std::string p; std::getline(ss, p, ',');)
            if (!detail::trim(p).empty()) c.columns.push_back(detail::trim(p));
    } else {
        throw ValidationError(raw_key, "unknown key");
    }
}

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parses and validates a scenario file.  Syntax problems raise ParseError
/// with the offending line; bad values raise ValidationError naming the key.
/// Overrides are applied after the file, before validation.
inline ScenarioConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {}) {
    ScenarioConfig c;
    std::string section;
    std::istringstream in(text);
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "system" && section != "drive" && section != "run" && section != "sweep")
                throw ParseError(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");
        const auto& sections = detail::key_sections();
        const auto it = sections.find(detail::canonical_key(key));
        if (it == sections.end()) throw ParseError(line_no, "unknown key '" + key + "'");
        if (!section.empty() && it->second != section)
            throw ParseError(line_no, "key '" + key + "' belongs in [" + it->second + "]");
        set_config_key(c, key, value);
    }
    for (const auto& [k, v] : overrides) set_config_key(c, k, v);
    c.validate();
    return c;
}

/// Canonical text of a config: every key, fixed order, shortest exact numbers.
inline std::string serialize_config(const ScenarioConfig& c) {
    using detail::format_number;
    const Scenario& sc = c.scenario;
    std::ostringstream o;
    o << "[system]\n";
    o << "arity = " << (sc.system.arity == Arity::TwoLevel ? "two" : "three") << "\n";
    o << "rabi = " << format_number(sc.system.rabi) << "\n";
    o << "V0 = " << format_number(sc.system.interaction) << "\n";
    o << "\n[drive]\n";
    o << "drive = " << (sc.drive.kind == DriveKind::Linear ? "linear" : "periodic") << "\n";
    o << "v = " << format_number(sc.drive.rate) << "\n";
    o << "Delta0 = " << format_number(sc.drive.bias) << "\n";
    o << "delta = " << format_number(sc.drive.amplitude) << "\n";
    o << "omega = " << format_number(sc.drive.frequency) << "\n";
    o << "\n[run]\n";
    o << "initial_state = " << initial_state_name(sc.initial) << "\n";
    o << "cycles = " << sc.cycles << "\n";
    o << "start_phase = " << format_number(sc.start_phase) << "\n";
    if (sc.t_i) {
        o << "t_i = " << format_number(*sc.t_i) << "\n";
        o << "t_f = " << format_number(*sc.t_f) << "\n";
    } else {
        o << "window = standard\n";
    }
    o << "engine = " << engine_name(c.engine) << "\n";
    o << "tolerance = " << format_number(sc.integrator.tol) << "\n";
    o << "scheme = " << scheme_name(sc.integrator.scheme) << "\n";
    o << "samples = " << sc.samples << "\n";
    o << "output = " << c.output << "\n";
    o << "phase_ledger = " << (c.phase_ledger ? "true" : "false") << "\n";
    if (!c.axes.empty() || !c.columns.empty()) {
        o << "\n[sweep]\n";
        for (std::size_t k = 0; k < c.axes.size(); ++k) {
            const auto& a = c.axes[k];
            o << "axis" << k + 1 << " = " << a.name << ":" << format_number(a.lo) << ":"
              << format_number(a.hi) << ":" << a.points << "\n";
        }
        if (!c.columns.empty()) {
            o << "columns = ";
            for (std::size_t k = 0; k < c.columns.size(); ++k) o << (k ? "," : "") << c.columns[k];
            o << "\n";
        }
    }
    return o.str();
}

inline std::string normalize_config(const std::string& text) { return serialize_config(parse_config(text)); }

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, s] : detail::key_sections()) keys.push_back(k);
    return keys;
}

}  // namespace lzsim
