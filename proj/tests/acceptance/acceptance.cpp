// Acceptance runs. `lzsim_acceptance N` runs criterion N, no argument runs all.
// Each criterion prints one line: "[N] PASS|FAIL name: details".

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "lzsim/lzsim.hpp"
#include "../oracles.hpp"

using namespace lzsim;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

double unitarity_error(const CMatrix& m) {
    return (m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

Scenario linear3(double v, double v0, InitialState init, double rabi = 1.0) {
    Scenario sc;
    sc.system = SystemSpec::three_level(rabi, v0);
    sc.drive = DriveProtocol::linear(v);
    sc.initial = init;
    sc.samples = 2;
    sc.integrator.tol = 1e-12;
    return sc;
}

Scenario blockade(double delta, InitialState init) {
    Scenario sc;
    sc.system = SystemSpec::three_level(1.0, 40.0);
    sc.drive = DriveProtocol::periodic(-15.0, delta, 1.0);
    sc.initial = init;
    sc.cycles = 100;
    return sc;
}

Scenario single_atom_cycle(double omega) {
    Scenario sc;
    sc.system = SystemSpec::two_level();
    sc.drive = DriveProtocol::periodic(5.0, 20.0, omega);
    sc.initial = InitialState::adiabatic_minus;
    sc.cycles = 1;
    sc.start_phase = std::numbers::pi / 2.0;
    sc.integrator.tol = 1e-12;
    return sc;
}

// Dips of one sweep column, located to within the grid step.
std::vector<DetectedFeature> dips(const SweepGrid& g, const std::string& column, double prominence = 0.02) {
    DetectOptions o;
    o.prominence = prominence;
    return detect_resonances(g.axes[0].values(), g.series(column), o);
}

std::string locations(const std::vector<DetectedFeature>& f) {
    std::string s;
    for (const auto& x : f) s += (s.empty() ? "" : " ") + fmt(x.location);
    return "{" + s + "}";
}

bool has_feature_near(const std::vector<DetectedFeature>& f, double w, double tol) {
    for (const auto& x : f)
        if (std::abs(x.location - w) <= tol) return true;
    return false;
}

// ---------------------------------------------------------------------------

Verdict unitarity() {
    Verdict v;
    double drift = 0.0, factor_err = 0.0;
    std::size_t runs = 0, factors = 0;
    auto exact = [&](const Scenario& sc) {
        const SweepWindow w = sc.window();
        const TrajectoryRecord tr =
            integrate(sc.system, sc.drive, {initial_amplitudes(sc, w.t_i), w.t_i}, w, sc.integrator);
        drift = std::max(drift, tr.max_norm_drift);
        ++runs;
    };
    auto aia = [&](const Scenario& sc) {
        const ScenarioResult r = evaluate_aia(sc);
        for (const auto& f : r.aia->decomposition.factors) {
            factor_err = std::max(factor_err, unitarity_error(f.entries));
            ++factors;
        }
    };
    for (double w : {0.3, 0.9, 1.7, 3.0}) {
        exact(single_atom_cycle(w));
        aia(single_atom_cycle(w));
    }
    for (double w : {2.5, 7.5, 15.0}) {
        Scenario sc = blockade(25.0, InitialState::adiabatic1);
        sc.drive.frequency = w;
        sc.integrator.tol = 1e-12;
        exact(sc);
        aia(sc);
    }
    for (double vv : {0.5, 2.0, 10.0})
        for (double v0 : {0.1, 2.0, 20.0})
            for (auto init : {InitialState::adiabatic1, InitialState::adiabatic2, InitialState::adiabatic3}) {
                const Scenario sc = linear3(vv, v0, init);
                exact(sc);
                aia(sc);
            }
    v.detail << runs << " exact runs, max norm drift " << fmt(drift) << "; " << factors
             << " AIA factors, max |M^H M - 1| " << fmt(factor_err);
    v.require(drift <= 1e-9, "norm drift <= 1e-9");
    v.require(factor_err <= 1e-12, "transfer matrices unitary to 1e-12");
    return v;
}

Verdict eigen_oracle() {
    Verdict v;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> det(-100.0, 100.0), v0(0.0, 100.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const SystemSpec s = SystemSpec::three_level(1.0, v0(rng));
        const double d = det(rng);
        const auto e = three_level_energies(s, d);
        const auto ref = oracle::symmetric_roots(hamiltonian_matrix(s, d).real());
        for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(e[j] - ref[j]));
    }
    v.detail << "1000 draws, max |E - root| " << fmt(worst);
    v.require(worst <= 1e-9, "agreement to 1e-9 Omega");
    return v;
}

Verdict gap_structure() {
    Verdict v;
    const double sat = gap_report(SystemSpec::three_level(1.0, 100.0)).at_zero;
    double sym = 0.0;
    for (int k = 0; k < 50; ++k) {
        const GapReport g = gap_report(SystemSpec::three_level(1.0, 0.1 + 99.9 * k / 49.0));
        sym = std::max(sym, std::abs(g.at_zero - g.at_full));
    }
    // Least-squares slope of log dE_V0/2 against log V0 on [20, 100].
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 41;
    for (int k = 0; k < n; ++k) {
        const double x = std::log(20.0 + 80.0 * k / (n - 1));
        const double y = std::log(gap_report(SystemSpec::three_level(1.0, std::exp(x))).at_half);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    v.detail << "dE_0(V0=100) " << fmt(sat) << ", max |dE_0 - dE_V0| " << fmt(sym) << ", log-log slope "
             << fmt(slope);
    v.require(std::abs(sat - std::numbers::sqrt2) <= 1e-3, "dE_0 saturates at sqrt 2");
    v.require(sym <= 1e-9, "dE_0 = dE_V0");
    v.require(std::abs(slope + 1.0) <= 0.05, "slope -1");
    return v;
}

Verdict single_atom_aia() {
    Verdict v;
    double worst = 0.0, at = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double w = 0.3 + 2.7 * k / 99.0;
        const Scenario sc = single_atom_cycle(w);
        const double d = std::abs(evaluate_exact(sc).values[3] - evaluate_aia(sc).values[3]);
        if (d > worst) {
            worst = d;
            at = w;
        }
    }
    v.detail << "max |P+ exact - P+ AIA| " << fmt(worst) << " at omega " << fmt(at);
    v.require(worst <= 0.05, "deviation <= 0.05");
    return v;
}

Verdict resonance_positions() {
    Verdict v;
    const SweepGrid g = run_sweep(blockade(25.0, InitialState::adiabatic1), {{"omega", 2.2, 16.0, 1381}},
                                  Engine::Both);
    v.require(g.complete(), "every sweep point evaluated");
    const auto ex = dips(g, "Pbar_1"), ai = dips(g, "aia_Pbar_1");
    v.detail << "exact dips " << locations(ex) << ", AIA dips " << locations(ai);
    for (double w : {15.0, 7.5, 5.0, 3.75, 3.0, 2.5}) {
        v.require(has_feature_near(ex, w, 0.1), "exact dip at " + fmt(w));
        v.require(has_feature_near(ai, w, 0.1), "AIA dip at " + fmt(w));
    }
    return v;
}

Verdict narrow_resonances() {
    Verdict v;
    const SweepGrid g = run_sweep(blockade(25.0, InitialState::adiabatic2), {{"omega", 10.0, 20.0, 2001}},
                                  Engine::Both);
    v.require(g.complete(), "every sweep point evaluated");
    const auto ex = dips(g, "Pbar_2"), ai = dips(g, "aia_Pbar_2");
    v.detail << "exact dips " << locations(ex) << ", AIA dips " << locations(ai);
    for (double w : {55.0 / 3.0, 13.75, 11.0}) {
        v.require(has_feature_near(ex, w, 0.15), "exact dip at " + fmt(w));
        v.require(!has_feature_near(ai, w, 0.15), "no AIA dip at " + fmt(w));
    }
    return v;
}

Verdict full_coverage() {
    Verdict v;
    const double lo = 2.0, hi = 20.0, tol = 0.1;
    const ResonanceCatalog cat = resonance_catalog(-15.0, 40.0, lo, hi);
    // A feature counts for a family only when no other family has an entry within tol of it.
    auto attribute = [&](double x) -> std::optional<ResonanceFamily> {
        std::set<ResonanceFamily> near;
        for (const auto& e : cat.entries)
            if (std::abs(e.omega - x) <= tol) near.insert(e.family);
        if (near.size() == 1) return *near.begin();
        return std::nullopt;
    };
    std::set<ResonanceFamily> seen[2];
    double worst = 0.0;
    const InitialState inits[] = {InitialState::adiabatic1, InitialState::adiabatic2, InitialState::adiabatic3};
    for (int i = 0; i < 3; ++i) {
        const SweepGrid g = run_sweep(blockade(65.0, inits[i]), {{"omega", lo, hi, 361}}, Engine::Both);
        v.require(g.complete(), "every sweep point evaluated");
        for (const char* ch : {"Pbar_1", "Pbar_2", "Pbar_3"}) {
            worst = std::max(worst, max_abs_diff(g.series(ch), g.series(std::string("aia_") + ch)));
            for (int e = 0; e < 2; ++e)
                for (bool want_dips : {true, false}) {
                    DetectOptions o;
                    o.dips = want_dips;
                    o.match_tolerance = tol;
                    const std::string col = e ? std::string("aia_") + ch : std::string(ch);
                    for (const auto& f : detect_resonances(g.axes[0].values(), g.series(col), o))
                        if (auto fam = attribute(f.location)) seen[e].insert(*fam);
                }
        }
    }
    v.detail << "max |Pbar exact - Pbar AIA| " << fmt(worst) << ", families seen exact " << seen[0].size()
             << "/3, AIA " << seen[1].size() << "/3";
    v.require(worst <= 0.1, "deviation <= 0.1");
    v.require(seen[0].size() == 3, "all families in the exact sweep");
    v.require(seen[1].size() == 3, "all families in the AIA sweep");
    return v;
}

Verdict small_v0_forms() {
    Verdict v;
    double worst_v = 0.0, worst_v0 = 0.0;
    // The formulas are t -> +-infinity limits; the standard window starts too
    // close to the crossing for fast sweeps, so run Delta over [-1000, 1000].
    auto check = [](double vv, double v0) {
        Scenario sc = linear3(vv, v0, InitialState::gg);
        sc.t_i = -1000.0 / vv;
        sc.t_f = 1000.0 / vv;
        const auto got = evaluate_exact(sc).values;
        const auto want = interacting_correction_final(vv, 1.0, v0, Diabatic::gg);
        double d = 0.0;
        for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(got[j] - want[j]));
        return d;
    };
    for (int k = 0; k < 19; ++k) worst_v = std::max(worst_v, check(1.0 + 0.5 * k, 0.1));
    for (int k = 0; k < 25; ++k) worst_v0 = std::max(worst_v0, check(2.0, 0.02 + 0.02 * k));
    v.detail << "max |exact - formula| vs v " << fmt(worst_v) << ", vs V0 " << fmt(worst_v0);
    v.require(worst_v <= 0.02, "v scan within 0.02");
    v.require(worst_v0 <= 0.02, "V0 scan within 0.02");
    return v;
}

Verdict beats() {
    Verdict v;
    for (auto init : {InitialState::gg, InitialState::s, InitialState::rr}) {
        Scenario sc = linear3(5.0, 2.0, init);
        sc.t_i = -2.0;
        sc.t_f = 40.0;
        sc.samples = 20000;
        sc.integrator.tol = 1e-10;
        const ScenarioResult r = evaluate_exact(sc, true);
        std::vector<double> ps(r.trajectory->times.size());
        for (std::size_t k = 0; k < ps.size(); ++k) ps[k] = r.trajectory->diabatic(k, 1);
        BeatOptions o;
        o.t_begin = 4.0;
        try {
            const BeatReport b = beat_analysis(r.trajectory->times, ps, o);
            v.detail << initial_state_name(init) << " envelope " << fmt(b.envelope_frequency) << " ";
            v.require(std::abs(b.envelope_frequency - 1.0) <= 0.1, std::string("V0/2 for ") + initial_state_name(init));
        } catch (const NoBeat& e) {
            v.require(false, std::string("beat for ") + initial_state_name(init) + ": " + e.what());
        }
    }
    return v;
}

Verdict k_cycle_algebra() {
    Verdict v;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, excess = -1.0;
    const SystemSpec s = SystemSpec::two_level();
    auto draw = [&] {
        const double delta = 2.0 + 28.0 * u(rng);
        const double bias = (2.0 * u(rng) - 1.0) * 0.9 * delta;
        return DriveProtocol::periodic(bias, delta, 0.2 + 3.0 * u(rng));
    };
    CVector minus = CVector::Zero(2);
    minus(0) = 1.0;
    for (int n = 0; n < 50; ++n) {
        const DriveProtocol p = draw();
        const int k = 1 + static_cast<int>(u(rng) * 10.0);
        const double t0 = u(rng) * p.period();
        const TwoLevelCycle c = closed_form_two_level(s, p, k, t0);
        const AiaResult a = compose_periodic(s, p, minus, k, t0);
        worst = std::max(worst, std::abs(c.p_k - a.final_populations(1)));
    }
    for (int n = 0; n < 2000; ++n) {
        const TwoLevelCycle c = closed_form_two_level(s, draw(), 10, 0.0);
        excess = std::max(excess, c.p_k - c.p_k_max);
    }
    v.detail << "max |closed form - matrix power| " << fmt(worst) << ", max P+^10 - sin^2(10 alpha) "
             << fmt(excess);
    v.require(worst <= 1e-10, "closed form equals composition");
    v.require(excess <= 1e-9, "k = 10 bound");
    return v;
}

Verdict scaling() {
    Verdict v;
    double worst = 0.0;
    for (auto [vv, v0] : {std::pair{1.0, 2.0}, {2.0, 10.0}, {5.0, 0.5}, {0.5, 4.0}})
        for (auto init : {InitialState::gg, InitialState::s, InitialState::rr, InitialState::adiabatic2}) {
            const auto base = evaluate_exact(linear3(vv, v0, init)).values;
            for (double c : {0.5, 2.0, 5.0})
                worst = std::max(worst, max_abs_diff(base, evaluate_exact(linear3(c * c * vv, c * v0, init, c)).values));
        }
    v.detail << "max population change " << fmt(worst);
    v.require(worst <= 1e-6, "invariant to 1e-6");
    return v;
}

Verdict pattern_symmetry() {
    Verdict v;
    double worst = 0.0, worst_standard = 0.0, worst_std = 0.0;
    const SweepAxis va{"v", 0.5, 20.0, 20}, v0a{"V0", 0.1, 20.0, 20};
    // Delta -> V0 - Delta with |gg> <-> |rr> maps H onto itself, so the swap is
    // a time reversal about Delta = V0/2 and is exact on a window centred there.
    auto centred = [](double vv, double v0, InitialState init) {
        Scenario sc = linear3(vv, v0, init);
        sc.t_i = (0.5 * v0 - 50.0) / vv;
        sc.t_f = (0.5 * v0 + 50.0) / vv;
        return sc;
    };
    for (double vv : va.values()) {
        std::vector<double> pgg;
        for (double v0 : v0a.values()) {
            const double p3 = evaluate_exact(centred(vv, v0, InitialState::adiabatic1)).values[5];
            const double p1 = evaluate_exact(centred(vv, v0, InitialState::adiabatic3)).values[3];
            worst = std::max(worst, std::abs(p3 - p1));
            worst_standard = std::max(worst_standard, std::abs(evaluate_exact(linear3(vv, v0, InitialState::adiabatic1)).values[5] -
                                                               evaluate_exact(linear3(vv, v0, InitialState::adiabatic3)).values[3]));
            pgg.push_back(evaluate_exact(linear3(vv, v0, InitialState::gg)).values[0]);
        }
        double m = 0.0, q = 0.0;
        for (double x : pgg) m += x;
        m /= pgg.size();
        for (double x : pgg) q += (x - m) * (x - m);
        worst_std = std::max(worst_std, std::sqrt(q / pgg.size()));
    }
    v.detail << "max |P3(|1>) - P1(|3>)| " << fmt(worst) << " (standard window " << fmt(worst_standard) << "), max std of P_gg over V0 " << fmt(worst_std);
    v.require(worst <= 1e-3, "pattern symmetry within 1e-3");
    v.require(worst_std <= 0.01, "P_gg independent of V0");
    return v;
}

Verdict stokes_ablation() {
    Verdict v;
    AiaOptions zero;
    zero.zero_stokes = true;
    double worst = 0.0;
    std::string where;
    auto probe = [&](double vv, double v0) {
        for (auto init : {InitialState::adiabatic1, InitialState::adiabatic2, InitialState::adiabatic3}) {
            const Scenario sc = linear3(vv, v0, init);
            const double d = max_abs_diff(evaluate_aia(sc).values, evaluate_aia(sc, zero).values);
            if (d > worst) {
                worst = d;
                where = "v " + fmt(vv) + ", V0 " + fmt(v0) + ", " + initial_state_name(init);
            }
        }
    };
    for (int k = 0; k < 40; ++k) probe(2.0, 0.5 + 19.5 * k / 39.0);
    for (int k = 0; k < 40; ++k) probe(0.5 + 19.5 * k / 39.0, 2.0);
    v.detail << "max population change " << fmt(worst) << " at " << where;
    v.require(worst <= 1e-6, "Stokes phases irrelevant to 1e-6");
    return v;
}

const std::map<int, std::pair<std::string, std::function<Verdict()>>>& criteria() {
    static const std::map<int, std::pair<std::string, std::function<Verdict()>>> c{
        {1, {"unitarity", unitarity}},
        {2, {"eigen oracle", eigen_oracle}},
        {3, {"gap structure", gap_structure}},
        {4, {"single-atom single-cycle AIA", single_atom_aia}},
        {5, {"resonance positions", resonance_positions}},
        {6, {"narrow resonances", narrow_resonances}},
        {7, {"full-coverage AIA regime", full_coverage}},
        {8, {"small-V0 closed forms", small_v0_forms}},
        {9, {"beats", beats}},
        {10, {"k-cycle algebra", k_cycle_algebra}},
        {11, {"scaling invariance", scaling}},
        {12, {"pattern symmetry", pattern_symmetry}},
        {13, {"Stokes-phase ablation", stokes_ablation}},
    };
    return c;
}

bool run(int id) {
    const auto& [name, fn] = criteria().at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = fn();
    } catch (const std::exception& e) {
        v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%d] %s %s: %s (%.1fs)\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str(), secs);
    std::fflush(stdout);
    return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        const int id = std::atoi(argv[1]);
        if (!criteria().count(id)) {
            std::fprintf(stderr, "usage: %s [1-13]\n", argv[0]);
            return 2;
        }
        return run(id) ? 0 : 1;
    }
    int failed = 0;
    for (const auto& [id, c] : criteria()) failed += !run(id);
    return failed ? 1 : 0;
}
