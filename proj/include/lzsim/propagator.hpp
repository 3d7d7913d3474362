#pragma once

// Exact propagation of i d/dt psi = H(t) psi and projection of the sampled
// trajectory on the diabatic and adiabatic bases.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lzsim/error.hpp"
#include "lzsim/hamiltonian.hpp"
#include "lzsim/integrator.hpp"

namespace lzsim {

struct StateVector {
    CVector amplitudes;  // diabatic basis
    double t = 0.0;
};

/// Sampling window [t_i, t_f] with `samples` uniformly spaced points including both ends.
struct SweepWindow {
    double t_i = 0.0;
    double t_f = 1.0;
    int samples = 2000;

    void validate() const {
        if (!(t_i < t_f) || !std::isfinite(t_i) || !std::isfinite(t_f))
            throw ValidationError("window", "needs finite t_i < t_f");
        if (samples < 2) throw ValidationError("samples", "must be >= 2");
    }

    double sample_time(int k) const {
        if (k == samples - 1) return t_f;
        return t_i + (t_f - t_i) * static_cast<double>(k) / (samples - 1);
    }
};

struct TrajectoryRecord {
    std::vector<double> times;
    CMatrix states;             // row k = amplitudes at times[k]
    Eigen::MatrixXd diabatic;   // |amplitude|^2 per diabatic state
    Eigen::MatrixXd adiabatic;  // populations of ascending adiabatic states; empty if rabi = 0
    StateVector final_state;
    double max_norm_drift = 0.0;  // max_k | ||psi(t_k)||^2 - 1 |
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

/// Window whose detuning runs from -10 rabi to 30 rabi + 10 v / rabi.
inline SweepWindow standard_window(const SystemSpec& s, const DriveProtocol& p, int samples = 2000) {
    if (p.kind != DriveKind::Linear || !(p.rate > 0.0))
        throw ValidationError("v", "standard window needs a linear sweep with v > 0");
    const double om = s.rabi > 0.0 ? s.rabi : 1.0;
    const double d_i = -10.0 * om;
    const double d_f = 30.0 * om + 10.0 * p.rate / om;
    return {d_i / p.rate, d_f / p.rate, samples};
}

/// k full drive periods starting at t0.
inline SweepWindow cycle_window(const DriveProtocol& p, double cycles, double t0 = 0.0,
                                int samples_per_cycle = 200) {
    if (p.kind != DriveKind::Periodic) throw ValidationError("drive", "needs a periodic drive");
    if (!(cycles > 0.0)) throw ValidationError("cycles", "must be > 0");
    const int n = std::max(2, static_cast<int>(std::ceil(cycles * samples_per_cycle)) + 1);
    return {t0, t0 + cycles * p.period(), n};
}

/// Diabatic basis state by index (0: g or gg, 1: r or s, 2: rr).
inline StateVector diabatic_state(const SystemSpec& s, int index, double t = 0.0) {
    if (index < 0 || index >= s.dim()) throw ValidationError("initial_state", "index out of range");
    CVector a = CVector::Zero(s.dim());
    a(index) = 1.0;
    return {a, t};
}

/// Adiabatic state with ascending index j (0-based) at time t.
inline StateVector adiabatic_state(const SystemSpec& s, const DriveProtocol& p, int j, double t) {
    if (j < 0 || j >= s.dim()) throw ValidationError("initial_state", "index out of range");
    const EigenFrame f = eigenframe_at(s, p, t);
    return {f.eigvecs.col(j), t};
}

namespace detail {

// Schroedinger right-hand side with H shifted by its trace / dim, which keeps
// the amplitudes from spinning at the mean diagonal energy.
template <std::size_t N>
struct ShiftedSchrodinger {
    double rabi;
    double interaction;
    DriveProtocol drive;

    void operator()(double t, const Amplitudes<N>& y, Amplitudes<N>& dy) const {
        const double d = drive.detuning(t);
        constexpr std::complex<double> mi{0.0, -1.0};
        if constexpr (N == 2) {
            const double c = 0.5 * rabi;
            const double h = 0.5 * d;
            dy[0] = mi * (h * y[0] + c * y[1]);
            dy[1] = mi * (c * y[0] - h * y[1]);
        } else {
            const double c = rabi / std::numbers::sqrt2;
            const double third = interaction / 3.0;
            dy[0] = mi * ((d - third) * y[0] + c * y[1]);
            dy[1] = mi * (c * (y[0] + y[2]) - third * y[1]);
            dy[2] = mi * (c * y[1] + (2.0 * third - d) * y[2]);
        }
    }
};

// Phase removed by the trace shift, integral of tr H / dim over [t0, t].
inline double removed_phase(const SystemSpec& s, const DriveProtocol& p, double t0, double t) {
    if (s.arity == Arity::TwoLevel) return -0.5 * p.detuning_integral(t0, t);
    return s.interaction / 3.0 * (t - t0) - p.detuning_integral(t0, t);
}

template <std::size_t N>
TrajectoryRecord integrate_fixed(const SystemSpec& s, const DriveProtocol& p,
                                 const StateVector& psi0, const SweepWindow& w,
                                 const IntegratorOptions& opt) {
    ShiftedSchrodinger<N> rhs{s.rabi, s.interaction, p};
    AdaptiveStepper<N, ShiftedSchrodinger<N>> stepper(rhs, opt);

    TrajectoryRecord rec;
    rec.times.resize(w.samples);
    rec.states.resize(w.samples, N);
    Amplitudes<N> y;
    for (std::size_t j = 0; j < N; ++j) y[j] = psi0.amplitudes(static_cast<Eigen::Index>(j));

    double t = psi0.t;
    for (int k = 0; k < w.samples; ++k) {
        const double tk = w.sample_time(k);
        stepper.advance(t, y, tk);
        const std::complex<double> phase = std::polar(1.0, -removed_phase(s, p, psi0.t, tk));
        double norm2 = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            rec.states(k, static_cast<Eigen::Index>(j)) = phase * y[j];
            norm2 += std::norm(y[j]);
        }
        rec.max_norm_drift = std::max(rec.max_norm_drift, std::abs(norm2 - 1.0));
        rec.times[k] = tk;
    }
    rec.final_state = {rec.states.row(w.samples - 1).transpose(), w.t_f};
    rec.steps = stepper.accepted_steps();
    rec.rejected = stepper.rejected_steps();
    return rec;
}

}  // namespace detail

/// Fills the adiabatic populations of `traj` from the instantaneous eigenframes.
inline TrajectoryRecord project_adiabatic(const SystemSpec& s, const DriveProtocol& p,
                                          TrajectoryRecord traj) {
    const Eigen::Index n = static_cast<Eigen::Index>(traj.times.size());
    traj.adiabatic.resize(n, s.dim());
    for (Eigen::Index k = 0; k < n; ++k) {
        const EigenFrame f = eigenframe_at(s, p, traj.times[k]);
        const CVector c = f.eigvecs.adjoint() * traj.states.row(k).transpose();
        traj.adiabatic.row(k) = c.cwiseAbs2().transpose();
    }
    return traj;
}

/// Integrates from psi0 (which must sit at w.t_i) and samples on the window grid.
/// The adiabatic projection is filled whenever rabi > 0.
inline TrajectoryRecord integrate(const SystemSpec& s, const DriveProtocol& p,
                                  const StateVector& psi0, const SweepWindow& w,
                                  const IntegratorOptions& opt = {}) {
    s.validate();
    p.validate();
    w.validate();
    if (psi0.amplitudes.size() != s.dim())
        throw ValidationError("initial_state", "dimension does not match the system");
    if (std::abs(psi0.amplitudes.squaredNorm() - 1.0) > 1e-12)
        throw ValidationError("initial_state", "must be normalized");
    if (!(opt.tol >= 1e-14 && opt.tol <= 1e-3))
        throw ValidationError("tolerance", "must lie in [1e-14, 1e-3]");
    StateVector start = psi0;
    start.t = w.t_i;

    TrajectoryRecord rec = s.arity == Arity::TwoLevel
                               ? detail::integrate_fixed<2>(s, p, start, w, opt)
                               : detail::integrate_fixed<3>(s, p, start, w, opt);
    rec.diabatic = rec.states.cwiseAbs2();
    if (s.rabi > 0.0) rec = project_adiabatic(s, p, std::move(rec));
    return rec;
}

/// Final state only, without storing samples in between.
inline StateVector propagate(const SystemSpec& s, const DriveProtocol& p, const StateVector& psi0,
                             double t_f, const IntegratorOptions& opt = {}) {
    return integrate(s, p, psi0, {psi0.t, t_f, 2}, opt).final_state;
}

/// Trapezoidal time average of each column of `channels` over [t_a, t_b],
/// with linear interpolation at ends that fall between samples.
inline Eigen::VectorXd time_average(const std::vector<double>& times,
                                    const Eigen::MatrixXd& channels, double t_a, double t_b) {
    const std::size_t n = times.size();
    if (n < 2 || static_cast<std::size_t>(channels.rows()) != n)
        throw ValidationError("trajectory", "needs at least two samples");
    if (!(t_a < t_b) || t_a < times.front() - 1e-12 || t_b > times.back() + 1e-12)
        throw ValidationError("window", "average window must lie inside the trajectory");

    auto value_at = [&](double t) -> Eigen::VectorXd {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        std::size_t hi = std::clamp<std::size_t>(it - times.begin(), 1, n - 1);
        const std::size_t lo = hi - 1;
        const double u = (t - times[lo]) / (times[hi] - times[lo]);
        return ((1.0 - u) * channels.row(lo) + u * channels.row(hi)).transpose();
    };

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(channels.cols());
    double prev_t = t_a;
    Eigen::VectorXd prev_v = value_at(t_a);
    for (std::size_t k = 0; k < n; ++k) {
        if (times[k] <= t_a) continue;
        if (times[k] >= t_b) break;
        const Eigen::VectorXd v = channels.row(k).transpose();
        acc += 0.5 * (times[k] - prev_t) * (prev_v + v);
        prev_t = times[k];
        prev_v = v;
    }
    const Eigen::VectorXd end_v = value_at(t_b);
    acc += 0.5 * (t_b - prev_t) * (prev_v + end_v);
    return acc / (t_b - t_a);
}

inline Eigen::VectorXd time_average(const TrajectoryRecord& traj, const Eigen::MatrixXd& channels) {
    return time_average(traj.times, channels, traj.times.front(), traj.times.back());
}

}  // namespace lzsim
