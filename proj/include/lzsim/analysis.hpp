#pragma once

// Derived quantities: small-interaction closed forms, resonance catalogs and
// detection, beat extraction and the multi-slit reference curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "lzsim/aia.hpp"
#include "lzsim/error.hpp"

namespace lzsim {

enum class Diabatic { gg = 0, s = 1, rr = 2 };

/// Two-atom populations (P_gg, P_s, P_rr).
using TriplePopulation = std::array<double, 3>;

/// Single-atom P_LZ = exp(-pi Omega^2 / 2v).
inline double single_atom_lz(double v, double rabi) {
    if (!(v > 0.0)) throw ValidationError("v", "must be > 0");
    return std::exp(-std::numbers::pi * rabi * rabi / (2.0 * v));
}

inline double q_lz(double v, double rabi, double v0) {
    return single_atom_lz(v, rabi) *
           std::exp(-std::numbers::pi * rabi * rabi * v0 / (4.0 * std::pow(v, 1.5)));
}

inline double r_lz(double v, double rabi, double v0) {
    return single_atom_lz(v, rabi) *
           std::exp(-std::numbers::pi * rabi * rabi * v0 / (std::pow(2.0, 2.5) * std::pow(v, 1.5)));
}

/// Final populations of two independent atoms swept through resonance.
inline TriplePopulation noninteracting_final(double v, double rabi, Diabatic initial) {
    const double p = single_atom_lz(v, rabi);
    const double mix = 2.0 * p * (1.0 - p);
    switch (initial) {
        case Diabatic::gg: return {p * p, mix, (1.0 - p) * (1.0 - p)};
        case Diabatic::rr: return {(1.0 - p) * (1.0 - p), mix, p * p};
        case Diabatic::s: break;
    }
    return {mix, 1.0 - 2.0 * mix, mix};
}

/// Small-V0 corrections.  The channel that the printed formulas leave open is
/// fixed by normalization, e.g. P_rr = 1 - P_gg - P_s = (1 - Q)^2 for |gg>.
inline TriplePopulation interacting_correction_final(double v, double rabi, double v0,
                                                     Diabatic initial) {
    const double p = single_atom_lz(v, rabi);
    const double q = q_lz(v, rabi, v0);
    const double r = r_lz(v, rabi, v0);
    switch (initial) {
        case Diabatic::gg: {
            const double s = 1.0 - p * p - (1.0 - q) * (1.0 - q);
            return {p * p, s, 1.0 - p * p - s};
        }
        case Diabatic::rr: {
            const double s = 1.0 - p * p - (1.0 - r) * (1.0 - r);
            return {1.0 - p * p - s, s, p * p};
        }
        case Diabatic::s: break;
    }
    const double rr = 1.0 - p * p - (1.0 - r) * (1.0 - r);
    const double gg = 1.0 - p * p - (1.0 - q) * (1.0 - q);
    return {gg, 1.0 - rr - gg, rr};
}

/// The |gg>-initial P_rr exactly as it is usually quoted, 1 - Q^2.  Kept for
/// comparison only; it does not close the sum with the other two channels.
inline double printed_rr_for_gg(double v, double rabi, double v0) {
    const double q = q_lz(v, rabi, v0);
    return 1.0 - q * q;
}

// ---------------------------------------------------------------------------
// Resonances

enum class ResonanceFamily {
    Bias,                     // n omega = |Delta0|,        |gg> <-> |s>
    BiasMinusInteraction,     // n omega = |Delta0 - V0|,   |s>  <-> |rr>
    TwiceBiasMinusInteraction // n omega = |2 Delta0 - V0|, |gg> <-> |rr>
};

inline const char* family_name(ResonanceFamily f) {
    switch (f) {
        case ResonanceFamily::Bias: return "n*omega=|Delta0|";
        case ResonanceFamily::BiasMinusInteraction: return "n*omega=|Delta0-V0|";
        case ResonanceFamily::TwiceBiasMinusInteraction: return "n*omega=|2Delta0-V0|";
    }
    return "";
}

inline const char* family_transition(ResonanceFamily f) {
    switch (f) {
        case ResonanceFamily::Bias: return "gg<->s";
        case ResonanceFamily::BiasMinusInteraction: return "s<->rr";
        case ResonanceFamily::TwiceBiasMinusInteraction: return "gg<->rr";
    }
    return "";
}

struct ResonanceEntry {
    ResonanceFamily family;
    int n = 1;
    double omega = 0.0;
};

struct ResonanceCatalog {
    std::vector<ResonanceEntry> entries;  // omega descending

    std::vector<ResonanceEntry> of(ResonanceFamily f) const {
        std::vector<ResonanceEntry> out;
        for (const auto& e : entries)
            if (e.family == f) out.push_back(e);
        return out;
    }
};

inline double family_scale(ResonanceFamily f, double bias, double v0) {
    switch (f) {
        case ResonanceFamily::Bias: return std::abs(bias);
        case ResonanceFamily::BiasMinusInteraction: return std::abs(bias - v0);
        case ResonanceFamily::TwiceBiasMinusInteraction: return std::abs(2.0 * bias - v0);
    }
    return 0.0;
}

/// All resonances n omega = |scale| (n >= 1) with omega in [omega_lo, omega_hi].
inline ResonanceCatalog resonance_catalog(double bias, double v0, double omega_lo, double omega_hi,
                                          std::vector<ResonanceFamily> families = {
                                              ResonanceFamily::Bias,
                                              ResonanceFamily::BiasMinusInteraction,
                                              ResonanceFamily::TwiceBiasMinusInteraction}) {
    if (!(omega_lo > 0.0) || !(omega_hi >= omega_lo))
        throw ValidationError("omega_range", "needs 0 < lo <= hi");
    ResonanceCatalog c;
    for (auto f : families) {
        const double scale = family_scale(f, bias, v0);
        if (scale == 0.0) continue;
        const int n_lo = std::max(1, static_cast<int>(std::ceil(scale / omega_hi - 1e-12)));
        const int n_hi = static_cast<int>(std::floor(scale / omega_lo + 1e-12));
        for (int n = n_lo; n <= n_hi; ++n) c.entries.push_back({f, n, scale / n});
    }
    std::stable_sort(c.entries.begin(), c.entries.end(),
                     [](const ResonanceEntry& a, const ResonanceEntry& b) { return a.omega > b.omega; });
    return c;
}

struct DetectOptions {
    int smoothing_width = 5;      // quadratic Savitzky-Golay window, 1 disables
    double prominence = 0.02;     // population units
    bool dips = true;             // false: look for peaks
    double match_tolerance = 0.1; // grid spacing must not exceed this
    std::size_t min_points = 50;
};

struct DetectedFeature {
    double location = 0.0;
    double value = 0.0;
    double prominence = 0.0;
    double width = 0.0;  // full width at half prominence
};

namespace detail {

inline std::vector<double> savitzky_golay5(const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<double> out = y;
    for (std::size_t i = 2; i + 2 < n; ++i)
        out[i] = (-3.0 * y[i - 2] + 12.0 * y[i - 1] + 17.0 * y[i] + 12.0 * y[i + 1] - 3.0 * y[i + 2]) / 35.0;
    return out;
}

}  // namespace detail

/// Local extrema of a sampled curve whose topographic prominence reaches the
/// threshold.  Positions are refined by a parabola through the three
/// smoothed samples around each extremum.
inline std::vector<DetectedFeature> detect_resonances(const std::vector<double>& x,
                                                      const std::vector<double>& y,
                                                      const DetectOptions& opt = {}) {
    const std::size_t n = x.size();
    if (y.size() != n) throw ValidationError("sweep", "axis and channel lengths differ");
    if (n < opt.min_points)
        throw InsufficientResolution("resonance detection needs at least " +
                                     std::to_string(opt.min_points) + " points");
    double max_step = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x[i] > x[i - 1])) throw ValidationError("sweep", "axis must increase");
        max_step = std::max(max_step, x[i] - x[i - 1]);
    }
    if (max_step > opt.match_tolerance)
        throw InsufficientResolution("grid step " + std::to_string(max_step) +
                                     " exceeds the matching tolerance");

    std::vector<double> s = opt.smoothing_width >= 5 ? detail::savitzky_golay5(y) : y;
    if (!opt.dips)
        for (auto& v : s) v = -v;

    std::vector<DetectedFeature> out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(s[i] < s[i - 1] && s[i] <= s[i + 1])) continue;
        // Highest ground between this dip and the next lower point (or the edge) on each side.
        double left = s[i], right = s[i];
        for (std::size_t j = i; j-- > 0;) {
            if (s[j] < s[i]) break;
            left = std::max(left, s[j]);
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (s[j] < s[i]) break;
            right = std::max(right, s[j]);
        }
        const double prom = std::min(left, right) - s[i];
        if (prom < opt.prominence) continue;

        DetectedFeature f;
        const double denom = s[i - 1] - 2.0 * s[i] + s[i + 1];
        double shift = denom > 0.0 ? 0.5 * (s[i - 1] - s[i + 1]) / denom : 0.0;
        shift = std::clamp(shift, -0.5, 0.5);
        const double h = shift >= 0.0 ? x[i + 1] - x[i] : x[i] - x[i - 1];
        f.location = x[i] + shift * h;
        f.value = opt.dips ? s[i] : -s[i];
        f.prominence = prom;

        const double level = s[i] + 0.5 * prom;
        double xl = x.front(), xr = x.back();
        for (std::size_t j = i; j-- > 0;)
            if (s[j] >= level) {
                xl = x[j] + (level - s[j]) / (s[j + 1] - s[j]) * (x[j + 1] - x[j]);
                break;
            }
        for (std::size_t j = i + 1; j < n; ++j)
            if (s[j] >= level) {
                xr = x[j - 1] + (level - s[j - 1]) / (s[j] - s[j - 1]) * (x[j] - x[j - 1]);
                break;
            }
        f.width = xr - xl;
        out.push_back(f);
    }
    return out;
}

/// Catalog entries that have a detected feature within `tol`.
inline std::vector<ResonanceEntry> matched_entries(const ResonanceCatalog& catalog,
                                                   const std::vector<DetectedFeature>& found,
                                                   double tol) {
    std::vector<ResonanceEntry> out;
    for (const auto& e : catalog.entries)
        for (const auto& f : found)
            if (std::abs(f.location - e.omega) <= tol) {
                out.push_back(e);
                break;
            }
    return out;
}

// ---------------------------------------------------------------------------
// Beats

struct BeatOptions {
    double t_begin = -std::numeric_limits<double>::infinity();
    double t_end = std::numeric_limits<double>::infinity();
    double min_depth = 0.1;
};

struct BeatReport {
    bool present = false;
    double envelope_frequency = 0.0;  // b for a signal sin(a t) sin(b t)
    double modulation_depth = 0.0;
    double carrier_slope = 0.0;       // d(omega_carrier)/dt fitted over the window
    double carrier_intercept = 0.0;
    std::string carrier_trend;
};

namespace detail {

inline std::vector<std::complex<double>> analytic_signal(const std::vector<double>& x) {
    const std::size_t n = x.size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(x.begin(), x.end()), spec, out;
    fft.fwd(spec, in);
    for (std::size_t k = 1; k < n; ++k) {
        if (2 * k < n) spec[k] *= 2.0;
        else if (2 * k > n) spec[k] = 0.0;
    }
    fft.inv(out, spec);
    return out;
}

// Angular frequency of the strongest non-DC line, refined by a parabola in log power.
inline double dominant_frequency(const std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(x.begin(), x.end()), spec;
    fft.fwd(spec, in);
    std::size_t best = 1;
    for (std::size_t k = 1; k <= n / 2; ++k)
        if (std::norm(spec[k]) > std::norm(spec[best])) best = k;
    double shift = 0.0;
    if (best > 1 && best < n / 2) {
        const double a = std::log(std::norm(spec[best - 1]) + 1e-300);
        const double b = std::log(std::norm(spec[best]) + 1e-300);
        const double c = std::log(std::norm(spec[best + 1]) + 1e-300);
        const double den = a - 2.0 * b + c;
        if (den < 0.0) shift = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
    }
    return 2.0 * std::numbers::pi * (best + shift) / (n * dt);
}

inline double quantile(std::vector<double> v, double q) {
    const std::size_t k = static_cast<std::size_t>(q * (v.size() - 1));
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

}  // namespace detail

/// Envelope of a beating channel from the magnitude of its analytic signal.
/// The envelope |sin(b t)| repeats at angular frequency 2b, so half of its
/// dominant line is reported.
inline BeatReport beat_analysis(const std::vector<double>& times, const std::vector<double>& channel,
                                const BeatOptions& opt = {}) {
    if (times.size() != channel.size() || times.size() < 16)
        throw ValidationError("trajectory", "beat analysis needs at least 16 samples");
    std::vector<double> t, y;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= opt.t_begin && times[k] <= opt.t_end) {
            t.push_back(times[k]);
            y.push_back(channel[k]);
        }
    const std::size_t n = t.size();
    if (n < 16) throw ValidationError("window", "too few samples in the beat window");

    // Uniform resampling by linear interpolation.
    const double dt = (t.back() - t.front()) / (n - 1);
    std::vector<double> u(n);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = t.front() + k * dt;
        while (j + 2 < n && t[j + 1] < tk) ++j;
        const double w = std::clamp((tk - t[j]) / (t[j + 1] - t[j]), 0.0, 1.0);
        u[k] = (1.0 - w) * y[j] + w * y[j + 1];
    }
    double mean = 0.0;
    for (double v : u) mean += v;
    mean /= n;
    for (double& v : u) v -= mean;

    const auto z = detail::analytic_signal(u);
    std::vector<double> env(n), phase(n);
    for (std::size_t k = 0; k < n; ++k) {
        env[k] = std::abs(z[k]);
        phase[k] = std::arg(z[k]);
    }
    // Trim the ends where the transform wraps around.
    const std::size_t cut = n / 10;
    std::vector<double> core(env.begin() + cut, env.end() - cut);
    BeatReport r;
    const double hi = detail::quantile(core, 0.95), lo = detail::quantile(core, 0.05);
    r.modulation_depth = hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
    if (r.modulation_depth < opt.min_depth)
        throw NoBeat("envelope modulation depth " + std::to_string(r.modulation_depth) +
                     " is below " + std::to_string(opt.min_depth));

    // Fringes after a crossing fade roughly as a power of t; divide out a fitted
    // power law (an exponential if the window starts at t <= 0) so the slow
    // trend does not swamp the beat line.
    const double t_core = t.front() + cut * dt;
    const bool power = t_core > 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < core.size(); ++k) {
        const double tk = t_core + k * dt;
        const double x = power ? std::log(tk) : tk;
        const double yk = std::log(std::max(core[k], 1e-300));
        sx += x;
        sy += yk;
        sxx += x * x;
        sxy += x * yk;
    }
    const double cn = static_cast<double>(core.size());
    const double slope = (cn * sxy - sx * sy) / (cn * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / cn;
    double env_mean = 0.0;
    for (std::size_t k = 0; k < core.size(); ++k) {
        const double tk = t_core + k * dt;
        core[k] /= std::exp(icpt + slope * (power ? std::log(tk) : tk));
        env_mean += core[k];
    }
    env_mean /= cn;
    for (double& v : core) v -= env_mean;
    r.envelope_frequency = 0.5 * detail::dominant_frequency(core, dt);
    r.present = r.envelope_frequency > 0.0;

    // Carrier: least-squares line through the unwrapped phase derivative.
    std::vector<double> ph(phase.begin() + cut, phase.end() - cut);
    for (std::size_t k = 1; k < ph.size(); ++k) {
        double d = ph[k] - ph[k - 1];
        d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
        ph[k] = ph[k - 1] + d;
    }
    double st = 0, sf = 0, stt = 0, stf = 0;
    const std::size_t m = ph.size() - 1;
    for (std::size_t k = 0; k < m; ++k) {
        const double tk = t.front() + (cut + k + 0.5) * dt;
        const double fk = (ph[k + 1] - ph[k]) / dt;
        st += tk;
        sf += fk;
        stt += tk * tk;
        stf += tk * fk;
    }
    const double den = m * stt - st * st;
    if (den != 0.0) {
        r.carrier_slope = (m * stf - st * sf) / den;
        r.carrier_intercept = (sf - r.carrier_slope * st) / m;
    }
    r.carrier_trend = "omega_carrier(t) ~ " + std::to_string(r.carrier_intercept) + " + " +
                      std::to_string(r.carrier_slope) + " t";
    return r;
}

// ---------------------------------------------------------------------------
// Multi-slit comparison

/// I / I0 = sin^2(k phi / 2) / sin^2(phi / 2), equal to k^2 at phi = 2 n pi.
inline std::vector<double> multislit_reference(int k, const std::vector<double>& phi) {
    if (k < 2) throw ValidationError("k", "needs at least two slits");
    std::vector<double> out;
    out.reserve(phi.size());
    for (double p : phi) {
        const double s = std::sin(0.5 * p);
        if (std::abs(s) < 1e-8) {
            out.push_back(static_cast<double>(k) * k);
            continue;
        }
        const double num = std::sin(0.5 * k * p);
        out.push_back(num * num / (s * s));
    }
    return out;
}

/// Values of phi/2 in (0, pi) at which the k-slit intensity vanishes.
inline std::vector<double> multislit_minima(int k) {
    std::vector<double> out;
    for (int m = 1; m < k; ++m) out.push_back(m * std::numbers::pi / k);
    return out;
}

/// alpha in [0, pi] where sin^2(k alpha) reaches its maxima, (2n+1) pi / 2k.
inline std::vector<double> interferometer_maxima(int k) {
    std::vector<double> out;
    for (int n = 0; (2 * n + 1) < 2 * k; ++n) out.push_back((2 * n + 1) * std::numbers::pi / (2.0 * k));
    return out;
}

/// alpha in [0, pi] where sin^2(k alpha) vanishes, n pi / k.  alpha = 0 is one of them.
inline std::vector<double> interferometer_minima(int k) {
    std::vector<double> out;
    for (int n = 0; n <= k; ++n) out.push_back(n * std::numbers::pi / k);
    return out;
}

}  // namespace lzsim
