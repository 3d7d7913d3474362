#pragma once

// Scenarios (system + drive + initial state + horizon), their evaluation by
// exact propagation or by the impulse approximation, and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lzsim/aia.hpp"
#include "lzsim/error.hpp"
#include "lzsim/hamiltonian.hpp"
#include "lzsim/propagator.hpp"

namespace lzsim {

enum class InitialState {
    gg, s, rr,
    adiabatic1, adiabatic2, adiabatic3,
    g, r,
    adiabatic_minus, adiabatic_plus
};

inline const char* initial_state_name(InitialState i) {
    switch (i) {
        case InitialState::gg: return "gg";
        case InitialState::s: return "s";
        case InitialState::rr: return "rr";
        case InitialState::adiabatic1: return "adiabatic1";
        case InitialState::adiabatic2: return "adiabatic2";
        case InitialState::adiabatic3: return "adiabatic3";
        case InitialState::g: return "g";
        case InitialState::r: return "r";
        case InitialState::adiabatic_minus: return "adiabatic_minus";
        case InitialState::adiabatic_plus: return "adiabatic_plus";
    }
    return "";
}

inline std::optional<InitialState> parse_initial_state(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(InitialState::adiabatic_plus); ++k) {
        const auto v = static_cast<InitialState>(k);
        if (s == initial_state_name(v)) return v;
    }
    return std::nullopt;
}

inline bool initial_state_fits(InitialState i, Arity a) {
    const bool two = i == InitialState::g || i == InitialState::r ||
                     i == InitialState::adiabatic_minus || i == InitialState::adiabatic_plus;
    return two == (a == Arity::TwoLevel);
}

enum class Engine { Exact, AIA, Both };

inline const char* engine_name(Engine e) {
    switch (e) {
        case Engine::Exact: return "exact";
        case Engine::AIA: return "aia";
        case Engine::Both: return "both";
    }
    return "";
}

struct Scenario {
    SystemSpec system;
    DriveProtocol drive;
    InitialState initial = InitialState::gg;
    std::optional<double> t_i, t_f;  // linear; standard window when absent
    int cycles = 10;                 // periodic
    double start_phase = 0.0;        // periodic start time is start_phase / omega
    int samples = 0;                 // 0: 2000 for linear, 200 per cycle for periodic
    IntegratorOptions integrator;

    void validate() const {
        system.validate();
        drive.validate();
        if (!initial_state_fits(initial, system.arity))
            throw ValidationError("initial_state", std::string(initial_state_name(initial)) +
                                                       " does not fit the system arity");
        if (drive.kind == DriveKind::Periodic) {
            if (cycles < 1) throw ValidationError("cycles", "must be >= 1");
            if (t_i || t_f) throw ValidationError("window", "periodic drives take cycles, not a window");
        } else {
            if (t_i.has_value() != t_f.has_value())
                throw ValidationError("window", "give both t_i and t_f or neither");
            if (!t_i && !(drive.rate > 0.0))
                throw ValidationError("v", "the default window needs v > 0");
        }
        if (samples < 0 || samples == 1) throw ValidationError("samples", "must be 0 or >= 2");
        if (!(integrator.tol >= 1e-14 && integrator.tol <= 1e-3))
            throw ValidationError("tolerance", "must lie in [1e-14, 1e-3]");
    }

    double t0() const { return drive.kind == DriveKind::Periodic ? start_phase / drive.frequency : 0.0; }

    SweepWindow window() const {
        if (drive.kind == DriveKind::Periodic) {
            const int n = samples > 0 ? samples : 200 * cycles + 1;
            return {t0(), t0() + cycles * drive.period(), n};
        }
        const int n = samples > 0 ? samples : 2000;
        if (t_i) return {*t_i, *t_f, n};
        return standard_window(system, drive, n);
    }
};

/// Diabatic amplitudes of the requested initial state at time t.
inline CVector initial_amplitudes(const Scenario& sc, double t) {
    const SystemSpec& s = sc.system;
    switch (sc.initial) {
        case InitialState::gg:
        case InitialState::g: return diabatic_state(s, 0).amplitudes;
        case InitialState::s:
        case InitialState::r: return diabatic_state(s, 1).amplitudes;
        case InitialState::rr: return diabatic_state(s, 2).amplitudes;
        case InitialState::adiabatic1:
        case InitialState::adiabatic_minus: return adiabatic_state(s, sc.drive, 0, t).amplitudes;
        case InitialState::adiabatic2:
        case InitialState::adiabatic_plus: return adiabatic_state(s, sc.drive, 1, t).amplitudes;
        case InitialState::adiabatic3: return adiabatic_state(s, sc.drive, 2, t).amplitudes;
    }
    throw ValidationError("initial_state", "unknown");
}

inline std::vector<std::string> diabatic_names(Arity a) {
    if (a == Arity::TwoLevel) return {"P_g", "P_r"};
    return {"P_gg", "P_s", "P_rr"};
}

inline std::vector<std::string> adiabatic_names(Arity a) {
    if (a == Arity::TwoLevel) return {"P_minus", "P_plus"};
    return {"P_1", "P_2", "P_3"};
}

/// Output channels of one scenario evaluation: final diabatic and adiabatic
/// populations, then time averages of the adiabatic ones for periodic drives.
inline std::vector<std::string> channel_names(const Scenario& sc) {
    auto names = diabatic_names(sc.system.arity);
    for (auto& n : adiabatic_names(sc.system.arity)) names.push_back(n);
    if (sc.drive.kind == DriveKind::Periodic)
        for (auto& n : adiabatic_names(sc.system.arity)) names.push_back("Pbar" + n.substr(1));
    return names;
}

struct ScenarioResult {
    std::vector<double> values;  // in channel_names order
    std::optional<TrajectoryRecord> trajectory;
    std::optional<AiaResult> aia;
};

inline ScenarioResult evaluate_exact(const Scenario& sc, bool keep_trajectory = false) {
    sc.validate();
    const SweepWindow w = sc.window();
    const StateVector psi0{initial_amplitudes(sc, w.t_i), w.t_i};
    TrajectoryRecord tr = integrate(sc.system, sc.drive, psi0, w, sc.integrator);
    ScenarioResult r;
    const Eigen::Index last = static_cast<Eigen::Index>(tr.times.size()) - 1;
    for (Eigen::Index j = 0; j < tr.diabatic.cols(); ++j) r.values.push_back(tr.diabatic(last, j));
    for (Eigen::Index j = 0; j < tr.adiabatic.cols(); ++j) r.values.push_back(tr.adiabatic(last, j));
    if (sc.drive.kind == DriveKind::Periodic) {
        const Eigen::VectorXd avg = time_average(tr, tr.adiabatic);
        for (Eigen::Index j = 0; j < avg.size(); ++j) r.values.push_back(avg(j));
    }
    if (keep_trajectory) r.trajectory = std::move(tr);
    return r;
}

inline ScenarioResult evaluate_aia(const Scenario& sc, const AiaOptions& opt = {}) {
    sc.validate();
    const SweepWindow w = sc.window();
    const double t_begin = w.t_i;
    const CVector a0 = to_adiabatic(sc.system, sc.drive, initial_amplitudes(sc, t_begin), t_begin);
    AiaResult res = sc.drive.kind == DriveKind::Linear
                        ? compose_linear(sc.system, sc.drive, a0, w, opt)
                        : compose_periodic(sc.system, sc.drive, a0, sc.cycles, sc.t0(), opt);
    const EigenFrame fin = eigenframe_at(sc.system, sc.drive, res.t_end);
    const CVector diab = fin.eigvecs * res.final_amplitudes;
    ScenarioResult r;
    for (Eigen::Index j = 0; j < diab.size(); ++j) r.values.push_back(std::norm(diab(j)));
    for (Eigen::Index j = 0; j < res.final_populations.size(); ++j)
        r.values.push_back(res.final_populations(j));
    if (sc.drive.kind == DriveKind::Periodic)
        for (Eigen::Index j = 0; j < res.time_average.size(); ++j) r.values.push_back(res.time_average(j));
    r.aia = std::move(res);
    return r;
}

/// Parameters a sweep axis may vary.
inline void apply_parameter(Scenario& sc, const std::string& name, double value) {
    if (name == "v") sc.drive.rate = value;
    else if (name == "V0") sc.system.interaction = value;
    else if (name == "omega") sc.drive.frequency = value;
    else if (name == "delta") sc.drive.amplitude = value;
    else if (name == "Delta0") sc.drive.bias = value;
    else if (name == "rabi") sc.system.rabi = value;
    else throw ValidationError("axis", "unknown sweep parameter '" + name + "'");
}

struct SweepAxis {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    int points = 2;

    void validate() const {
        if (points < 1) throw ValidationError("sweep." + name, "needs at least one point");
        if (!std::isfinite(lo) || !std::isfinite(hi) || (points > 1 && !(hi > lo)))
            throw ValidationError("sweep." + name, "needs finite lo < hi");
    }

    double value(int k) const {
        if (points == 1) return lo;
        if (k == points - 1) return hi;
        return lo + (hi - lo) * static_cast<double>(k) / (points - 1);
    }

    std::vector<double> values() const {
        std::vector<double> v(points);
        for (int k = 0; k < points; ++k) v[k] = value(k);
        return v;
    }
};

struct SweepPoint {
    std::vector<double> coords;
    std::vector<double> values;  // channels, see SweepGrid::columns
    bool ok = false;
    std::string error;
};

/// Rectangular grid; points are stored row-major with the first axis slowest.
struct SweepGrid {
    std::vector<SweepAxis> axes;
    std::vector<std::string> columns;  // value columns after the axes
    std::vector<SweepPoint> points;
    Engine engine = Engine::Exact;

    bool complete() const {
        return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.ok; });
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < columns.size(); ++k)
            if (columns[k] == name) return k;
        throw ValidationError("column", "no column named '" + name + "'");
    }

    /// Values of one column along the grid (NaN at failed points).
    std::vector<double> series(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(points.size());
        for (const auto& p : points)
            out.push_back(p.ok ? p.values[c] : std::numeric_limits<double>::quiet_NaN());
        return out;
    }
};

inline std::vector<std::string> sweep_columns(const Scenario& sc, Engine engine) {
    const auto base = channel_names(sc);
    if (engine != Engine::Both) return base;
    std::vector<std::string> cols = base;
    for (const auto& n : base) cols.push_back("aia_" + n);
    cols.push_back("dP_max");
    return cols;
}

/// Evaluates one scenario with the chosen engine, in sweep_columns order.
inline std::vector<double> evaluate_point(const Scenario& sc, Engine engine, const AiaOptions& opt = {}) {
    if (engine == Engine::Exact) return evaluate_exact(sc).values;
    if (engine == Engine::AIA) return evaluate_aia(sc, opt).values;
    auto ex = evaluate_exact(sc).values;
    const auto ai = evaluate_aia(sc, opt).values;
    double d = 0.0;
    for (std::size_t k = 0; k < ex.size(); ++k) d = std::max(d, std::abs(ex[k] - ai[k]));
    ex.insert(ex.end(), ai.begin(), ai.end());
    ex.push_back(d);
    return ex;
}

/// Worker count: LZ_SIM_THREADS when set, otherwise the hardware concurrency.
inline unsigned sweep_threads() {
    if (const char* env = std::getenv("LZ_SIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates every grid point; a failing point is recorded and the sweep goes on.
inline SweepGrid run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes, Engine engine,
                           unsigned threads = 0, const AiaOptions& opt = {}) {
    if (axes.empty() || axes.size() > 2) throw ValidationError("sweep", "needs one or two axes");
    for (const auto& a : axes) a.validate();
    SweepGrid g;
    g.axes = axes;
    g.engine = engine;
    g.columns = sweep_columns(base, engine);
    std::size_t total = 1;
    for (const auto& a : axes) total *= static_cast<std::size_t>(a.points);
    g.points.resize(total);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rem = k;
        std::vector<double> coords(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            coords[a] = axes[a].value(static_cast<int>(rem % axes[a].points));
            rem /= axes[a].points;
        }
        g.points[k].coords = std::move(coords);
    }

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            SweepPoint& p = g.points[k];
            try {
                Scenario sc = base;
                for (std::size_t a = 0; a < axes.size(); ++a) apply_parameter(sc, axes[a].name, p.coords[a]);
                p.values = evaluate_point(sc, engine, opt);
                p.ok = true;
            } catch (const std::exception& e) {
                p.ok = false;
                p.error = e.what();
            }
        }
    };
    const unsigned n = std::min<std::size_t>(threads ? threads : sweep_threads(), total);
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return g;
}

}  // namespace lzsim
