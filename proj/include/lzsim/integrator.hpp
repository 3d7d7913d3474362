#pragma once

// Embedded explicit Runge-Kutta steppers on fixed-size complex state arrays,
// with PI step-size control.  Two independent schemes are provided so
// results can be cross-checked: Dormand-Prince 8(5,3) and Dormand-Prince 5(4).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "lzsim/detail/dop853_tableau.hpp"
#include "lzsim/error.hpp"

namespace lzsim {

enum class Scheme { DormandPrince853, DormandPrince54 };

inline const char* scheme_name(Scheme s) {
    return s == Scheme::DormandPrince853 ? "dop853" : "dopri5";
}

template <std::size_t N>
using Amplitudes = std::array<std::complex<double>, N>;

namespace detail {

struct Dopri5 {
    static constexpr int kStages = 6;
    static constexpr int kOrder = 5;
    static constexpr int kEstimatorOrder = 4;
    static constexpr double c[kStages] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0};
    static constexpr double a[kStages][kStages] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    };
    static constexpr double b[kStages] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192,
                                          -2187.0 / 6784, 11.0 / 84};
    // b - bhat, the last entry multiplies f(t + h, y_new).
    static constexpr double e[kStages + 1] = {-71.0 / 57600, 0,  71.0 / 16695, -71.0 / 1920,
                                              17253.0 / 339200, -22.0 / 525, 1.0 / 40};

    template <std::size_t N>
    static double error_norm(const Amplitudes<N>* k, double h, const std::array<double, N>& scale) {
        double sum = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            std::complex<double> err{0.0, 0.0};
            for (int i = 0; i <= kStages; ++i) err += e[i] * k[i][j];
            sum += std::norm(h * err / scale[j]);
        }
        return std::sqrt(sum / N);
    }
};

struct Dop853 {
    static constexpr int kStages = dop853::kStages;
    static constexpr int kOrder = 8;
    static constexpr int kEstimatorOrder = 7;
    static constexpr const double (&c)[kStages] = dop853::c;
    static constexpr const double (&a)[kStages][kStages] = dop853::a;
    static constexpr const double (&b)[kStages] = dop853::b;

    // Blend of the fifth- and third-order estimators used by DOP853.
    template <std::size_t N>
    static double error_norm(const Amplitudes<N>* k, double h, const std::array<double, N>& scale) {
        double n5 = 0.0, n3 = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            std::complex<double> e5{0.0, 0.0}, e3{0.0, 0.0};
            for (int i = 0; i < kStages; ++i) {
                e5 += dop853::e5[i] * k[i][j];
                e3 += (dop853::b[i] - dop853::bhat3_offset[i]) * k[i][j];
            }
            n5 += std::norm(e5 / scale[j]);
            n3 += std::norm(e3 / scale[j]);
        }
        if (n5 == 0.0 && n3 == 0.0) return 0.0;
        return std::abs(h) * n5 / std::sqrt((n5 + 0.01 * n3) * N);
    }
};

// One explicit step.  k[0] holds f(t, y) on entry; on exit k[kStages] holds
// f(t + h, y_new) so it can be reused as the next k[0].
template <class Tab, std::size_t N, class F>
void rk_step(F& f, double t, const Amplitudes<N>& y, double h, Amplitudes<N>* k,
             Amplitudes<N>& y_new) {
    Amplitudes<N> stage;
    for (int s = 1; s < Tab::kStages; ++s) {
        for (std::size_t j = 0; j < N; ++j) {
            std::complex<double> acc{0.0, 0.0};
            for (int i = 0; i < s; ++i) acc += Tab::a[s][i] * k[i][j];
            stage[j] = y[j] + h * acc;
        }
        f(t + Tab::c[s] * h, stage, k[s]);
    }
    for (std::size_t j = 0; j < N; ++j) {
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < Tab::kStages; ++i) acc += Tab::b[i] * k[i][j];
        y_new[j] = y[j] + h * acc;
    }
    f(t + h, y_new, k[Tab::kStages]);
}

}  // namespace detail

struct IntegratorOptions {
    double tol = 1e-10;  // absolute and relative local error per step
    Scheme scheme = Scheme::DormandPrince853;
    std::size_t max_steps = 500'000'000;
};

/// Adaptive integrator for y' = f(t, y) with f(t, y, dy) writing dy.
template <std::size_t N, class F>
class AdaptiveStepper {
public:
    AdaptiveStepper(F f, IntegratorOptions opt) : f_(std::move(f)), opt_(opt) {}

    /// Advances (t, y) to exactly t_end.
    void advance(double& t, Amplitudes<N>& y, double t_end) {
        if (opt_.scheme == Scheme::DormandPrince853)
            advance_impl<detail::Dop853>(t, y, t_end);
        else
            advance_impl<detail::Dopri5>(t, y, t_end);
    }

    /// One step of fixed size without error control.
    void step_fixed(double& t, Amplitudes<N>& y, double h) {
        Amplitudes<N> y_new;
        f_(t, y, k_[0]);
        if (opt_.scheme == Scheme::DormandPrince853)
            detail::rk_step<detail::Dop853, N>(f_, t, y, h, k_, y_new);
        else
            detail::rk_step<detail::Dopri5, N>(f_, t, y, h, k_, y_new);
        y = y_new;
        t += h;
        fsal_valid_ = false;
        ++accepted_;
    }

    std::size_t accepted_steps() const noexcept { return accepted_; }
    std::size_t rejected_steps() const noexcept { return rejected_; }

private:
    template <class Tab>
    double initial_step(double t, const Amplitudes<N>& y) {
        // Scale by the local rate of change, |y'| / |y|.
        double ny = 0.0, nf = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            ny += std::norm(y[j]);
            nf += std::norm(k_[0][j]);
        }
        (void)t;
        const double rate = ny > 0.0 ? std::sqrt(nf / ny) : std::sqrt(nf);
        const double h = 0.5 * std::pow(opt_.tol, 1.0 / (Tab::kEstimatorOrder + 1));
        return rate > 0.0 ? h / rate : 1e-3;
    }

    template <class Tab>
    void advance_impl(double& t, Amplitudes<N>& y, double t_end) {
        if (t_end <= t) return;
        if (!fsal_valid_) {
            f_(t, y, k_[0]);
            fsal_valid_ = true;
        }
        if (h_ <= 0.0) h_ = initial_step<Tab>(t, y);

        constexpr double kSafety = 0.9;
        constexpr double kBeta = 0.04;  // PI memory term
        const double expo = 1.0 / (Tab::kEstimatorOrder + 1) - 0.75 * kBeta;
        constexpr double kMinFactor = 0.2, kMaxFactor = 6.0;

        Amplitudes<N> y_new;
        std::array<double, N> scale;
        bool last_rejected = false;
        while (t < t_end) {
            if (accepted_ + rejected_ >= opt_.max_steps)
                throw StepFailure("step budget exhausted at t = " + std::to_string(t));
            double h = h_;
            bool clipped = false;
            if (t + h >= t_end || t + 1.01 * h >= t_end) {
                h = t_end - t;
                clipped = true;
            }
            if (h < 1e-13 * std::max(1.0, std::abs(t)))
                throw StepFailure("step size underflow at t = " + std::to_string(t));

            detail::rk_step<Tab, N>(f_, t, y, h, k_, y_new);
            for (std::size_t j = 0; j < N; ++j)
                scale[j] = opt_.tol + opt_.tol * std::max(std::abs(y[j]), std::abs(y_new[j]));
            const double err = Tab::error_norm(k_, h, scale);

            const double fac11 = err > 0.0 ? std::pow(err, expo) : 0.0;
            if (err <= 1.0) {
                double fac = fac11 / std::pow(facold_, kBeta);
                fac = std::clamp(fac / kSafety, 1.0 / kMaxFactor, 1.0 / kMinFactor);
                double h_next = h / fac;
                if (last_rejected) h_next = std::min(h_next, h);
                facold_ = std::max(err, 1e-4);
                t = clipped ? t_end : t + h;
                y = y_new;
                k_[0] = k_[Tab::kStages];
                ++accepted_;
                last_rejected = false;
                // A step shortened to land on t_end says nothing about the natural step size.
                h_ = clipped ? std::max(h_, h_next) : h_next;
            } else {
                h_ = h / std::min(1.0 / kMinFactor, fac11 / kSafety);
                ++rejected_;
                last_rejected = true;
            }
        }
    }

    F f_;
    IntegratorOptions opt_;
    Amplitudes<N> k_[detail::Dop853::kStages + 1]{};
    bool fsal_valid_ = false;
    double h_ = 0.0;
    double facold_ = 1e-4;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

}  // namespace lzsim
