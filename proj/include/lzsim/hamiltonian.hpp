#pragma once

// Time-dependent Hamiltonians for a single driven two-level atom and for a
// pair of interacting Rydberg atoms restricted to the symmetric subspace
// {|gg>, |s>, |rr>}.  Energies are in units of the Rabi frequency when
// rabi = 1, times in units of its inverse, and hbar = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lzsim/error.hpp"

namespace lzsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

enum class Arity { TwoLevel, ThreeLevel };

struct SystemSpec {
    Arity arity = Arity::TwoLevel;
    double rabi = 1.0;         // Omega
    double interaction = 0.0;  // V0, only meaningful for ThreeLevel

    static SystemSpec two_level(double rabi = 1.0) { return {Arity::TwoLevel, rabi, 0.0}; }
    static SystemSpec three_level(double rabi, double interaction) {
        return {Arity::ThreeLevel, rabi, interaction};
    }

    int dim() const noexcept { return arity == Arity::TwoLevel ? 2 : 3; }

    void validate() const {
        if (!(rabi >= 0.0) || !std::isfinite(rabi))
            throw ValidationError("rabi", "must be a finite value >= 0");
        if (!(interaction >= 0.0) || !std::isfinite(interaction))
            throw ValidationError("V0", "must be a finite value >= 0");
    }
};

enum class DriveKind { Linear, Periodic };

/// Detuning schedule: Linear is rate*t, Periodic is bias + amplitude*sin(frequency*t).
struct DriveProtocol {
    DriveKind kind = DriveKind::Linear;
    double rate = 0.0;       // v
    double bias = 0.0;       // Delta0
    double amplitude = 0.0;  // delta
    double frequency = 1.0;  // omega

    static DriveProtocol linear(double rate) { return {DriveKind::Linear, rate, 0.0, 0.0, 1.0}; }
    static DriveProtocol periodic(double bias, double amplitude, double frequency) {
        return {DriveKind::Periodic, 0.0, bias, amplitude, frequency};
    }

    double detuning(double t) const noexcept {
        return kind == DriveKind::Linear ? rate * t : bias + amplitude * std::sin(frequency * t);
    }

    double detuning_rate(double t) const noexcept {
        return kind == DriveKind::Linear ? rate : amplitude * frequency * std::cos(frequency * t);
    }

    /// Integral of the detuning over [t1, t2].
    double detuning_integral(double t1, double t2) const noexcept {
        if (kind == DriveKind::Linear) return 0.5 * rate * (t2 * t2 - t1 * t1);
        return bias * (t2 - t1) -
               amplitude / frequency * (std::cos(frequency * t2) - std::cos(frequency * t1));
    }

    double period() const noexcept { return 2.0 * std::numbers::pi / frequency; }

    void validate() const {
        if (kind == DriveKind::Linear) {
            if (!std::isfinite(rate)) throw ValidationError("v", "must be finite");
            return;
        }
        if (!std::isfinite(bias)) throw ValidationError("Delta0", "must be finite");
        if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
            throw ValidationError("delta", "must be a finite value >= 0");
        if (!(frequency > 0.0) || !std::isfinite(frequency))
            throw ValidationError("omega", "must be a finite value > 0");
    }
};

inline double detuning(const DriveProtocol& p, double t) noexcept { return p.detuning(t); }

/// H in the diabatic basis {|g>,|r>} or {|gg>,|s>,|rr>}.
inline CMatrix hamiltonian_matrix(const SystemSpec& s, double detuning) {
    const int n = s.dim();
    CMatrix h = CMatrix::Zero(n, n);
    if (s.arity == Arity::TwoLevel) {
        h(0, 1) = h(1, 0) = 0.5 * s.rabi;
        h(1, 1) = -detuning;
        return h;
    }
    const double c = s.rabi / std::numbers::sqrt2;
    h(0, 1) = h(1, 0) = c;
    h(1, 2) = h(2, 1) = c;
    h(1, 1) = -detuning;
    h(2, 2) = -2.0 * detuning + s.interaction;
    return h;
}

/// Instantaneous adiabatic frame.  Energies ascend; column j of eigvecs is the
/// j-th adiabatic state in the diabatic basis.  Gauge: the component on the
/// most excited diabatic state (|r> or |rr>) is real and positive, which is
/// smooth in the detuning because that component never vanishes for rabi > 0.
struct EigenFrame {
    double t = 0.0;
    double detuning = 0.0;
    RVector energies;
    CMatrix eigvecs;
};

namespace detail {

inline void require_coupling(const SystemSpec& s) {
    if (!(s.rabi > 0.0))
        throw ValidationError("rabi", "adiabatic frame needs rabi > 0");
}

constexpr double kDegeneracyTolerance = 1e-12;

}  // namespace detail

/// Closed-form two-level energies E- <= E+ and adiabatic states.
inline EigenFrame eigensystem_two_level(const SystemSpec& s, double detuning) {
    detail::require_coupling(s);
    const double omega = s.rabi;
    const double omega_bar = std::hypot(detuning, omega);
    // beta_plus * beta_minus = 1; evaluate the larger one directly.
    double beta_plus, beta_minus;
    if (detuning >= 0.0) {
        beta_plus = (omega_bar + detuning) / omega;
        beta_minus = 1.0 / beta_plus;
    } else {
        beta_minus = (omega_bar - detuning) / omega;
        beta_plus = 1.0 / beta_minus;
    }
    EigenFrame f;
    f.detuning = detuning;
    f.energies.resize(2);
    f.energies(0) = -0.5 * omega * beta_plus;  // E- = -(Omega/2) beta+
    f.energies(1) = 0.5 * omega * beta_minus;  // E+ = +(Omega/2) beta-
    const double norm = std::sqrt(omega / (2.0 * omega_bar));
    f.eigvecs.resize(2, 2);
    f.eigvecs(0, 0) = -norm * std::sqrt(beta_minus);
    f.eigvecs(1, 0) = norm * std::sqrt(beta_plus);
    f.eigvecs(0, 1) = norm * std::sqrt(beta_plus);
    f.eigvecs(1, 1) = norm * std::sqrt(beta_minus);
    return f;
}

/// Three-level energies in ascending order from the trigonometric cubic root formula.
inline std::array<double, 3> three_level_energies(const SystemSpec& s, double detuning) {
    const double v0 = s.interaction;
    const double d = detuning;
    const double om2 = s.rabi * s.rabi;
    const double d0 = v0 * v0 - 3.0 * v0 * d + 3.0 * d * d + 3.0 * om2;
    const double d1 = 2.0 * v0 * v0 * v0 - 9.0 * v0 * v0 * d + 9.0 * v0 * d * d - 4.5 * v0 * om2;
    const double shift = (v0 - 3.0 * d) / 3.0;
    if (d0 <= 0.0) return {shift, shift, shift};
    const double root = std::sqrt(d0);
    const double ratio = std::clamp(d1 / (2.0 * d0 * root), -1.0, 1.0);
    const double theta = std::acos(ratio) / 3.0;
    constexpr double third = 2.0 * std::numbers::pi / 3.0;
    const double amp = 2.0 * root / 3.0;
    return {shift + amp * std::cos(theta - 2.0 * third),  // lowest
            shift + amp * std::cos(theta - third),
            shift + amp * std::cos(theta)};
}

namespace detail {

// Eigenvector of the tridiagonal three-level H for eigenvalue e, in the rr > 0 gauge.
// Rows of (H - e): r1 = (-e, c, 0), r2 = (c, -D - e, c), r3 = (0, c, w - e).
inline Eigen::Vector3d three_level_vector(double c, double d, double w, double e) {
    // r1 x r3 reproduces the textbook component formula scaled by -c*e;
    // r1 x r2 never vanishes (its first entry is c^2) and covers e ~ 0.
    const Eigen::Vector3d v13(c * (w - e), e * (w - e), -c * e);
    const Eigen::Vector3d v12(c * c, c * e, e * (d + e) - c * c);
    Eigen::Vector3d v = v13.norm() >= v12.norm() ? v13 : v12;
    v.normalize();
    if (v(2) < 0.0) v = -v;
    return v;
}

}  // namespace detail

inline EigenFrame eigensystem_three_level(const SystemSpec& s, double detuning) {
    detail::require_coupling(s);
    const auto e = three_level_energies(s, detuning);
    const double tol = detail::kDegeneracyTolerance * s.rabi;
    if (e[1] - e[0] < tol || e[2] - e[1] < tol)
        throw DegenerateSpectrum("three-level spectrum degenerate at detuning " +
                                 std::to_string(detuning));
    const double c = s.rabi / std::numbers::sqrt2;
    const double w = s.interaction - 2.0 * detuning;
    EigenFrame f;
    f.detuning = detuning;
    f.energies.resize(3);
    f.eigvecs.resize(3, 3);
    for (int j = 0; j < 3; ++j) {
        f.energies(j) = e[j];
        f.eigvecs.col(j) = detail::three_level_vector(c, detuning, w, e[j]).cast<Complex>();
    }
    return f;
}

inline EigenFrame eigensystem(const SystemSpec& s, double detuning) {
    return s.arity == Arity::TwoLevel ? eigensystem_two_level(s, detuning)
                                      : eigensystem_three_level(s, detuning);
}

inline EigenFrame eigenframe_at(const SystemSpec& s, const DriveProtocol& p, double t) {
    EigenFrame f = eigensystem(s, p.detuning(t));
    f.t = t;
    return f;
}

/// Adiabatic energies in ascending order without eigenvectors.
inline std::array<double, 3> adiabatic_energies(const SystemSpec& s, double detuning) {
    if (s.arity == Arity::ThreeLevel) return three_level_energies(s, detuning);
    const double omega_bar = std::hypot(detuning, s.rabi);
    return {-0.5 * (omega_bar + detuning), 0.5 * (omega_bar - detuning), 0.0};
}

/// Maps ascending index -> adiabatic label (1-based) using the asymptotic
/// diabatic limits: for negative detuning |1>~|gg>, |2>~|s>, |3>~|rr>, for
/// positive detuning |1>~|rr>, |2>~|s>, |3>~|gg>.  Two-level labels are
/// 1 = phi_minus, 2 = phi_plus.  Since the levels never cross this is the
/// identity; a frame far from the asymptotic region also maps to identity.
inline std::vector<int> label_map(const SystemSpec& s, const EigenFrame& f) {
    const int n = s.dim();
    std::vector<int> labels(n);
    for (int j = 0; j < n; ++j) labels[j] = j + 1;
    if (s.arity == Arity::TwoLevel) return labels;

    std::vector<int> dominant(n);
    for (int j = 0; j < n; ++j) {
        Eigen::Index k;
        f.eigvecs.col(j).cwiseAbs().maxCoeff(&k);
        dominant[j] = static_cast<int>(k);
    }
    // Diabatic index -> label in each asymptotic regime.
    const std::array<int, 3> left{1, 2, 3};
    const std::array<int, 3> right{3, 2, 1};
    const auto& table = f.detuning < 0.0 ? left : right;
    std::vector<int> mapped(n);
    for (int j = 0; j < n; ++j) mapped[j] = table[dominant[j]];
    std::vector<int> sorted = mapped;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == labels) return mapped;
    return labels;
}

struct GapReport {
    double at_zero = 0.0;  // Delta E_0   (levels 1,2 at Delta = 0)
    double at_half = 0.0;  // Delta E_V0/2 (levels 2,3 at Delta = V0/2)
    double at_full = 0.0;  // Delta E_V0  (levels 1,2 at Delta = V0)
    std::array<double, 3> crossing_detunings{};
};

inline GapReport gap_report(const SystemSpec& s) {
    if (s.arity != Arity::ThreeLevel)
        throw ValidationError("arity", "gap report needs the three-level system");
    const double v0 = s.interaction;
    GapReport g;
    g.crossing_detunings = {0.0, 0.5 * v0, v0};
    auto e0 = three_level_energies(s, 0.0);
    auto eh = three_level_energies(s, 0.5 * v0);
    auto ef = three_level_energies(s, v0);
    g.at_zero = e0[1] - e0[0];
    g.at_half = eh[2] - eh[1];
    g.at_full = ef[1] - ef[0];
    return g;
}

/// One avoided crossing of the detuning with a target value.
struct CrossingEvent {
    double time = 0.0;
    int index = 1;      // 1: Delta = 0, 2: Delta = V0/2, 3: Delta = V0
    long branch = 0;    // m of tau_m; even = detuning rising, odd = falling
    bool rising = true;
    double rate = 0.0;  // |dDelta/dt| at the crossing
};

/// Detuning values of the avoided crossings, tagged with their index.  With
/// V0 = 0 all three coincide and a single crossing (index 1) remains.
inline std::vector<std::pair<int, double>> crossing_targets(const SystemSpec& s) {
    if (s.arity == Arity::TwoLevel || s.interaction == 0.0) return {{1, 0.0}};
    return {{1, 0.0}, {2, 0.5 * s.interaction}, {3, s.interaction}};
}

/// Sweep rate through crossing `target` for the periodic drive.
inline double periodic_crossing_rate(const DriveProtocol& p, double target) {
    const double x = p.amplitude * p.amplitude - (p.bias - target) * (p.bias - target);
    return p.frequency * std::sqrt(std::max(x, 0.0));
}

inline bool crossing_reachable(const DriveProtocol& p, double target) {
    return std::abs(target - p.bias) < p.amplitude;
}

/// All crossings of a periodic drive in [t_begin, t_begin + cycles * period),
/// ascending in time.  Unreachable crossings are simply absent.
inline std::vector<CrossingEvent> crossing_times(const DriveProtocol& p, const SystemSpec& s,
                                                 double cycles, double t_begin = 0.0) {
    if (p.kind != DriveKind::Periodic)
        throw ValidationError("drive", "crossing_times needs a periodic drive");
    const double two_pi = 2.0 * std::numbers::pi;
    const double t_end = t_begin + cycles * p.period();
    std::vector<CrossingEvent> out;
    for (auto [index, target] : crossing_targets(s)) {
        if (!crossing_reachable(p, target)) continue;
        const double phase = std::asin((target - p.bias) / p.amplitude);
        const double rate = periodic_crossing_rate(p, target);
        const long n_first = static_cast<long>(std::floor(p.frequency * t_begin / two_pi)) - 1;
        for (long n = n_first;; ++n) {
            const double up = (two_pi * n + phase) / p.frequency;
            const double down = (two_pi * n + std::numbers::pi - phase) / p.frequency;
            if (up >= t_end && down >= t_end) break;
            if (up >= t_begin && up < t_end) out.push_back({up, index, 2 * n, true, rate});
            if (down >= t_begin && down < t_end) out.push_back({down, index, 2 * n + 1, false, rate});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CrossingEvent& a, const CrossingEvent& b) { return a.time < b.time; });
    return out;
}

/// Crossings of a linear sweep inside [t_i, t_f].
inline std::vector<CrossingEvent> linear_crossing_times(const DriveProtocol& p, const SystemSpec& s,
                                                        double t_i, double t_f) {
    std::vector<CrossingEvent> out;
    if (p.rate == 0.0) return out;
    for (auto [index, target] : crossing_targets(s)) {
        const double t = target / p.rate;
        if (t > t_i && t < t_f) out.push_back({t, index, 0, p.rate > 0.0, std::abs(p.rate)});
    }
    std::sort(out.begin(), out.end(),
              [](const CrossingEvent& a, const CrossingEvent& b) { return a.time < b.time; });
    return out;
}

}  // namespace lzsim
