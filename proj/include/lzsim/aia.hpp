#pragma once

// Adiabatic impulse approximation: the evolution is cut into adiabatic
// segments, which only accumulate dynamical phases, and point-like
// Landau-Zener impulses at the avoided crossings.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include "lzsim/error.hpp"
#include "lzsim/hamiltonian.hpp"
#include "lzsim/propagator.hpp"
#include "lzsim/special.hpp"

namespace lzsim {

/// Linearized crossing: coupling gap, sweep rate |dDelta/dt| and the ratio of
/// the diabatic slopes to the single-excitation slope (2 for |gg> <-> |rr>).
struct LZParams {
    double gap = 1.0;
    double rate = 1.0;
    double slope_factor = 1.0;

    void validate() const {
        if (!(gap > 0.0)) throw ValidationError("gap", "must be > 0");
        if (!(rate > 0.0)) throw ValidationError("rate", "must be > 0");
        if (!(slope_factor > 0.0)) throw ValidationError("slope_factor", "must be > 0");
    }

    /// Adiabaticity parameter gap^2 / (4 slope_factor rate).
    double gamma() const { return gap * gap / (4.0 * slope_factor * rate); }
};

inline double lz_probability(const LZParams& p) {
    return std::exp(-2.0 * std::numbers::pi * p.gamma());
}

inline double stokes_phase(const LZParams& p) { return stokes_phase(p.gamma()); }

enum class FactorKind { Impulse, Adiabatic };

struct TransferMatrix {
    CMatrix entries;
    FactorKind kind = FactorKind::Adiabatic;
    int crossing = 0;  // impulses only
    bool transposed = false;
    double t_begin = 0.0;  // equal to t_end for impulses
    double t_end = 0.0;
    Eigen::VectorXd zeta;  // segment phases, ascending levels
    double probability = 0.0;
    double stokes = 0.0;
};

/// Ordered factors of one composed evolution (first applied first) and
/// named phases collected along the way.
struct CycleDecomposition {
    std::vector<TransferMatrix> factors;
    CMatrix product;
    std::vector<std::pair<std::string, double>> phases;

    double phase(const std::string& name) const {
        for (const auto& [k, v] : phases)
            if (k == name) return v;
        return std::numeric_limits<double>::quiet_NaN();
    }
};

/// Ascending level pair (lower, upper) mixed at avoided crossing `index`.
inline std::pair<int, int> crossing_pair(const SystemSpec& s, int index) {
    if (s.arity == Arity::TwoLevel) return {0, 1};
    return index == 2 ? std::pair{1, 2} : std::pair{0, 1};
}

/// Landau-Zener impulse in the ascending adiabatic basis.  On the (upper,
/// lower) pair it reads [[c e^{-i phi}, -sqrt P], [sqrt P, c e^{i phi}]] with
/// c = sqrt(1 - P); other levels pass through.  A falling passage uses the transpose.
inline CMatrix impulse_matrix(const SystemSpec& s, int crossing, double probability, double stokes,
                              bool transposed = false) {
    const auto [lo, up] = crossing_pair(s, crossing);
    const double c = std::sqrt(std::max(0.0, 1.0 - probability));
    const double sp = std::sqrt(probability);
    CMatrix m = CMatrix::Identity(s.dim(), s.dim());
    m(up, up) = c * std::polar(1.0, -stokes);
    m(lo, lo) = c * std::polar(1.0, stokes);
    m(up, lo) = transposed ? sp : -sp;
    m(lo, up) = transposed ? -sp : sp;
    return m;
}

inline CMatrix impulse_matrix(const SystemSpec& s, int crossing, const LZParams& p,
                              bool transposed = false) {
    p.validate();
    return impulse_matrix(s, crossing, lz_probability(p), stokes_phase(p), transposed);
}

/// Gap and slope factor of crossing `index`.
inline LZParams crossing_params(const SystemSpec& s, int index, double rate) {
    if (s.arity == Arity::TwoLevel || s.interaction == 0.0) return {s.rabi, rate, 1.0};
    const GapReport g = gap_report(s);
    if (index == 2) return {g.at_half, rate, 2.0};
    return {index == 1 ? g.at_zero : g.at_full, rate, 1.0};
}

namespace detail {

constexpr double kPhaseRelTol = 1e-10;

template <class F>
double integrate_smooth(F&& f, double a, double b) {
    if (b == a) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, kPhaseRelTol,
                                                                          &err);
}

inline void require_no_crossing(const SystemSpec& s, const DriveProtocol& p, double t1, double t2) {
    if (t2 <= t1) return;
    const double margin = 1e-12 * std::max({1.0, std::abs(t1), std::abs(t2)});
    if (p.kind == DriveKind::Linear) {
        for (const auto& e : linear_crossing_times(p, s, t1 + margin, t2 - margin))
            throw CrossingInsideSegment("crossing " + std::to_string(e.index) + " at t = " +
                                        std::to_string(e.time) + " inside adiabatic segment");
        return;
    }
    const double cycles = (t2 - t1) / p.period();
    for (const auto& e : crossing_times(p, s, cycles, t1))
        if (e.time > t1 + margin && e.time < t2 - margin)
            throw CrossingInsideSegment("crossing " + std::to_string(e.index) + " at t = " +
                                        std::to_string(e.time) + " inside adiabatic segment");
}

}  // namespace detail

/// zeta_j = integral of E_j over [t1, t2] for each ascending level.
inline Eigen::VectorXd accumulated_phases(const SystemSpec& s, const DriveProtocol& p, double t1,
                                          double t2) {
    const int n = s.dim();
    Eigen::VectorXd z(n);
    for (int j = 0; j < n; ++j)
        z(j) = detail::integrate_smooth(
            [&](double t) { return adiabatic_energies(s, p.detuning(t))[j]; }, t1, t2);
    return z;
}

/// diag(exp(-i zeta_j)) over a segment free of crossings.
inline TransferMatrix adiabatic_matrix(const SystemSpec& s, const DriveProtocol& p, double t1,
                                       double t2) {
    if (t2 < t1) throw ValidationError("segment", "needs t1 <= t2");
    detail::require_no_crossing(s, p, t1, t2);
    TransferMatrix m;
    m.kind = FactorKind::Adiabatic;
    m.t_begin = t1;
    m.t_end = t2;
    m.zeta = accumulated_phases(s, p, t1, t2);
    m.entries = CMatrix::Zero(s.dim(), s.dim());
    for (int j = 0; j < s.dim(); ++j) m.entries(j, j) = std::polar(1.0, -m.zeta(j));
    return m;
}

struct AiaOptions {
    bool zero_stokes = false;  // drop every Stokes phase (ablation study)
};

struct AiaResult {
    CVector initial;           // adiabatic amplitudes at t_begin
    CVector final_amplitudes;  // adiabatic amplitudes at t_end
    Eigen::VectorXd final_populations;
    Eigen::VectorXd time_average;  // periodic runs only
    CycleDecomposition decomposition;  // one cycle for periodic runs
    CMatrix evolution;                 // full propagator over the run
    double t_begin = 0.0;
    double t_end = 0.0;
};

namespace detail {

inline TransferMatrix make_impulse(const SystemSpec& s, const CrossingEvent& e,
                                   const AiaOptions& opt) {
    const LZParams lz = crossing_params(s, e.index, e.rate);
    TransferMatrix m;
    m.kind = FactorKind::Impulse;
    m.crossing = e.index;
    m.transposed = !e.rising;
    m.t_begin = m.t_end = e.time;
    m.probability = lz_probability(lz);
    m.stokes = opt.zero_stokes ? 0.0 : stokes_phase(lz);
    m.entries = impulse_matrix(s, e.index, m.probability, m.stokes, m.transposed);
    return m;
}

// Builds U_last G_n ... G_1 U_1 on [t_begin, t_end] from time-sorted events.
inline CycleDecomposition build_schedule(const SystemSpec& s, const DriveProtocol& p,
                                         const std::vector<CrossingEvent>& events, double t_begin,
                                         double t_end, const AiaOptions& opt) {
    CycleDecomposition d;
    double t = t_begin;
    int seg = 1;
    auto add_segment = [&](double t2) {
        TransferMatrix u = adiabatic_matrix(s, p, t, t2);
        for (int j = 0; j < s.dim(); ++j)
            d.phases.emplace_back("zeta" + std::to_string(j + 1) + "_seg" + std::to_string(seg), u.zeta(j));
        d.factors.push_back(std::move(u));
        ++seg;
        t = t2;
    };
    int imp = 1;
    for (const auto& e : events) {
        add_segment(e.time);
        TransferMatrix g = make_impulse(s, e, opt);
        d.phases.emplace_back("stokes_imp" + std::to_string(imp) + "_x" + std::to_string(e.index),
                              g.stokes);
        d.factors.push_back(std::move(g));
        ++imp;
    }
    add_segment(t_end);
    d.product = CMatrix::Identity(s.dim(), s.dim());
    for (const auto& f : d.factors) {
        if (f.kind == FactorKind::Adiabatic)
            d.product = f.entries.diagonal().asDiagonal() * d.product;
        else
            d.product = f.entries * d.product;
    }
    return d;
}

}  // namespace detail

/// Adiabatic amplitudes of a diabatic state vector at time t.
inline CVector to_adiabatic(const SystemSpec& s, const DriveProtocol& p, const CVector& diabatic,
                            double t) {
    return eigenframe_at(s, p, t).eigvecs.adjoint() * diabatic;
}

/// Product U4 G3 U3 G2 U2 G1 U1 over the window (fewer factors when some
/// crossings fall outside it).  psi0 is given in the ascending adiabatic basis at w.t_i.
inline AiaResult compose_linear(const SystemSpec& s, const DriveProtocol& p, const CVector& psi0,
                                const SweepWindow& w, const AiaOptions& opt = {}) {
    s.validate();
    p.validate();
    w.validate();
    if (p.kind != DriveKind::Linear) throw ValidationError("drive", "compose_linear needs a linear drive");
    if (psi0.size() != s.dim()) throw ValidationError("initial_state", "dimension mismatch");
    const auto events = linear_crossing_times(p, s, w.t_i, w.t_f);
    AiaResult r;
    r.t_begin = w.t_i;
    r.t_end = w.t_f;
    r.initial = psi0;
    r.decomposition = detail::build_schedule(s, p, events, w.t_i, w.t_f, opt);
    r.evolution = r.decomposition.product;
    r.final_amplitudes = r.evolution * psi0;
    r.final_populations = r.final_amplitudes.cwiseAbs2();
    return r;
}

/// Two-level single-cycle phases.  With A, B, C the half integrals of
/// sqrt(Delta^2 + Omega^2) over the three adiabatic segments of a cycle
/// and phi the Stokes phase:
///   eta0 = A + B + C + 2 phi,  eta1 = A + C - B,
///   eta2 = A - B - C,          eta3 = A + B - C + 2 phi,
/// so that g11 = (1-P) e^{-i eta0} + P e^{-i eta1} and
/// g21 = sign (e^{-i eta3} - e^{-i eta2}) e^{i phi} sqrt(P (1-P)).
struct TwoLevelCycle {
    double probability = 0.0;
    double stokes = 0.0;
    double stuckelberg = 0.0;  // phi_s = B + phi
    double global_phase = 0.0; // phi_G = (1/2) integral of Delta over the cycle
    std::array<double, 4> eta{};
    Complex g11;
    Complex g21;
    double alpha = 0.0;        // cos(alpha) = Re(g11)
    double p_one = 0.0;        // |g21|^2
    double p_k = 0.0;          // after k cycles
    double p_k_max = 0.0;      // sin^2(k alpha)
    double p_bar = 0.0;        // long-time average
    int cycles = 1;
};

/// Closed-form single-atom k-cycle result for a window starting at t0.
inline TwoLevelCycle closed_form_two_level(const SystemSpec& s, const DriveProtocol& p, int k,
                                           double t0 = 0.0, const AiaOptions& opt = {}) {
    if (s.arity != Arity::TwoLevel) throw ValidationError("arity", "closed form is two-level only");
    if (p.kind != DriveKind::Periodic) throw ValidationError("drive", "closed form needs a periodic drive");
    if (k < 1) throw ValidationError("cycles", "must be >= 1");
    const auto ev = crossing_times(p, s, 1.0, t0);
    if (ev.size() != 2) throw NoCrossing("two crossings per cycle are needed (|Delta0| < delta)");
    const double t1 = ev[0].time, t2 = ev[1].time, tf = t0 + p.period();
    auto half = [&](double a, double b) {
        return 0.5 * detail::integrate_smooth(
                         [&](double t) { return std::hypot(p.detuning(t), s.rabi); }, a, b);
    };
    const double A = half(t0, t1), B = half(t1, t2), C = half(t2, tf);
    const LZParams lz = crossing_params(s, 1, ev[0].rate);

    TwoLevelCycle c;
    c.cycles = k;
    c.probability = lz_probability(lz);
    c.stokes = opt.zero_stokes ? 0.0 : stokes_phase(lz);
    const double P = c.probability, phi = c.stokes;
    c.stuckelberg = B + phi;
    c.global_phase = 0.5 * p.detuning_integral(t0, tf);
    c.eta = {A + B + C + 2.0 * phi, A + C - B, A - B - C, A + B - C + 2.0 * phi};
    const Complex i{0.0, 1.0};
    c.g11 = (1.0 - P) * std::exp(-i * c.eta[0]) + P * std::exp(-i * c.eta[1]);
    const double sign = ev[0].rising ? -1.0 : 1.0;
    c.g21 = sign * (std::exp(-i * c.eta[3]) - std::exp(-i * c.eta[2])) * std::exp(i * phi) *
            std::sqrt(P * (1.0 - P));
    const double re = c.g11.real();
    if (std::abs(re) > 1.0 + 1e-9)
        throw Error("|Re g11| exceeds 1: the single-cycle matrix is not unitary");
    c.alpha = std::acos(std::clamp(re, -1.0, 1.0));
    const double amp = 4.0 * (1.0 - P) * P * std::sin(c.stuckelberg) * std::sin(c.stuckelberg);
    c.p_one = amp;
    const double sa = std::sin(c.alpha), ska = std::sin(k * c.alpha);
    // sin(k alpha) / sin(alpha) -> k at alpha = 0 and (-1)^(k+1) k at alpha = pi.
    double ratio2;
    if (std::abs(sa) < 1e-12)
        ratio2 = static_cast<double>(k) * k;
    else
        ratio2 = (ska * ska) / (sa * sa);
    c.p_k = amp * ratio2;
    c.p_k_max = ska * ska;
    const double im = c.g11.imag();
    const double den = std::sqrt(amp * amp + im * im);
    c.p_bar = den > 0.0 ? 0.5 * amp / den : 0.0;
    return c;
}

/// k cycles of the periodic drive starting at t0, with psi0 in the ascending
/// adiabatic basis at t0.  Rising passages use G, falling ones G^T.
inline AiaResult compose_periodic(const SystemSpec& s, const DriveProtocol& p, const CVector& psi0,
                                  int cycles, double t0 = 0.0, const AiaOptions& opt = {}) {
    s.validate();
    p.validate();
    if (p.kind != DriveKind::Periodic) throw ValidationError("drive", "compose_periodic needs a periodic drive");
    if (cycles < 1) throw ValidationError("cycles", "must be >= 1");
    if (psi0.size() != s.dim()) throw ValidationError("initial_state", "dimension mismatch");
    const double T = p.period();
    const auto events = crossing_times(p, s, 1.0, t0);
    if (events.empty()) throw NoCrossing("no avoided crossing is reachable by the drive");

    AiaResult r;
    r.t_begin = t0;
    r.t_end = t0 + cycles * T;
    r.initial = psi0;
    r.decomposition = detail::build_schedule(s, p, events, t0, t0 + T, opt);
    auto& d = r.decomposition;

    // Named cycle phases.
    const double phi_g = 0.5 * p.detuning_integral(t0, t0 + T);
    d.phases.emplace_back("phi_G", phi_g);
    if (s.arity == Arity::TwoLevel && events.size() == 2) {
        const Complex g11 = d.product(1, 1) * std::polar(1.0, -phi_g);
        d.phases.emplace_back("alpha", std::acos(std::clamp(g11.real(), -1.0, 1.0)));
        const auto cf = closed_form_two_level(s, p, 1, t0, opt);
        d.phases.emplace_back("phi_s", cf.stuckelberg);
        for (int j = 0; j < 4; ++j) d.phases.emplace_back("eta" + std::to_string(j), cf.eta[j]);
    }

    // Populations are frozen between impulses, so the time average is a
    // duration-weighted sum over segments.
    const int n = s.dim();
    CVector psi = psi0;
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < cycles; ++k) {
        for (const auto& f : d.factors) {
            if (f.kind == FactorKind::Adiabatic) {
                avg += (f.t_end - f.t_begin) * psi.cwiseAbs2();
                psi = f.entries.diagonal().cwiseProduct(psi);
            } else {
                psi = f.entries * psi;
            }
        }
    }
    r.time_average = avg / (cycles * T);
    r.final_amplitudes = psi;
    r.final_populations = psi.cwiseAbs2();
    CMatrix full = CMatrix::Identity(n, n);
    for (int k = 0; k < cycles; ++k) full = d.product * full;
    r.evolution = full;
    return r;
}

struct ValidityCriterion {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;   // criterion holds when lhs > rhs
    bool pass = false;
    double margin() const { return lhs - rhs; }
};

struct ValidityReport {
    std::vector<std::pair<int, double>> lz_times;        // crossing index -> tau_LZ
    std::vector<std::pair<std::string, double>> durations;  // adiabatic segment lengths
    std::vector<ValidityCriterion> criteria;
    bool verdict = true;
};

namespace detail {

inline void add_criterion(ValidityReport& r, std::string name, double lhs, double rhs) {
    const bool pass = lhs > rhs;
    r.criteria.push_back({std::move(name), lhs, rhs, pass});
    r.verdict = r.verdict && pass;
}

// Upper estimate of the transition time, (1 / sqrt(rate)) max(1, gamma).
inline double lz_time(const LZParams& lz) {
    return std::max(1.0, lz.gamma()) / std::sqrt(lz.rate);
}

}  // namespace detail

/// Advisory check of the conditions under which the impulse picture holds.
/// Periodic drives: every crossing's tau_LZ must be shorter than both
/// neighbouring adiabatic segments; the single-atom case adds
/// delta - |Delta0| > Omega and delta omega > Omega^2.  Linear three-level
/// sweeps: tau_LZ < V0 / 2v plus the printed rate/interaction inequalities.
inline ValidityReport validity_report(const SystemSpec& s, const DriveProtocol& p) {
    ValidityReport r;
    const double om = s.rabi;
    if (p.kind == DriveKind::Linear) {
        if (s.arity == Arity::TwoLevel) return r;
        const double v = std::abs(p.rate), v0 = s.interaction;
        if (!(v > 0.0)) {
            detail::add_criterion(r, "v > 0", v, 0.0);
            return r;
        }
        for (int i = 1; i <= 3; ++i)
            r.lz_times.emplace_back(i, detail::lz_time(crossing_params(s, i, v)));
        const double ta = v0 / (2.0 * v);
        r.durations.emplace_back("T_a", ta);
        const double tau = 0.5 / std::sqrt(v) * std::max(1.0, om * om / (2.0 * v));
        detail::add_criterion(r, "T_a > tau_LZ", ta, tau);
        if (v > 0.5 * om * om)
            detail::add_criterion(r, "V0^2 > v", v0 * v0, v);
        else
            detail::add_criterion(r, "16 V0^2 / Omega^4 > v", 16.0 * v0 * v0 / (om * om * om * om), v);
        return r;
    }

    if (s.arity == Arity::TwoLevel) {
        detail::add_criterion(r, "delta - |Delta0| > Omega", p.amplitude - std::abs(p.bias), om);
        detail::add_criterion(r, "delta omega > Omega^2", p.amplitude * p.frequency, om * om);
    }
    const auto ev = crossing_times(p, s, 1.0, 0.0);
    if (ev.empty()) {
        detail::add_criterion(r, "reachable crossings", 0.0, 0.0);
        return r;
    }
    const double T = p.period();
    const std::size_t n = ev.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& e = ev[k];
        const LZParams lz = crossing_params(s, e.index, e.rate);
        const double tau = detail::lz_time(lz);
        const double before = k == 0 ? ev[0].time - ev[n - 1].time + T : e.time - ev[k - 1].time;
        const double after = k + 1 == n ? ev[0].time + T - e.time : ev[k + 1].time - e.time;
        const double bound = std::min(before, after);
        r.lz_times.emplace_back(e.index, tau);
        r.durations.emplace_back("T_a" + std::to_string(k + 1), after);
        if (n == 1) continue;
        detail::add_criterion(r, "T_a > tau_LZ at crossing " + std::to_string(e.index) +
                                     (e.rising ? " (rising)" : " (falling)"),
                              bound, tau);
    }
    return r;
}

}  // namespace lzsim
