#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace lzsim {

namespace detail {

// B_2k / (2k (2k - 1)) for k = 1..10.
inline constexpr std::array<double, 10> kStirlingCoefficients{
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

}  // namespace detail

/// log Gamma(z) for Re z > 0 on the branch continuous from the positive real
/// axis (the imaginary part is not wrapped into (-pi, pi]).
inline std::complex<double> log_gamma(std::complex<double> z) {
    using C = std::complex<double>;
    C shift_sum{0.0, 0.0};
    constexpr double kMinModulus = 15.0;
    while (std::abs(z) < kMinModulus) {
        shift_sum += std::log(z);
        z += 1.0;
    }
    const C inv = 1.0 / z;
    const C inv2 = inv * inv;
    C series{0.0, 0.0};
    C power = inv;
    for (double coeff : detail::kStirlingCoefficients) {
        series += coeff * power;
        power *= inv2;
    }
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return (z - 0.5) * std::log(z) - z + half_log_two_pi + series - shift_sum;
}

/// arg Gamma(1 - i gamma) on the continuous branch.
inline double arg_gamma_one_minus_i(double gamma) {
    return std::imag(log_gamma({1.0, -gamma}));
}

/// Stokes phase gamma (ln gamma - 1) + arg Gamma(1 - i gamma) + pi/4 of a
/// Landau-Zener crossing with adiabaticity parameter gamma >= 0.  It falls from
/// pi/4 at gamma = 0 to zero like 1/(12 gamma).
inline double stokes_phase(double gamma) {
    if (gamma <= 0.0) return 0.25 * std::numbers::pi;
    constexpr double kAsymptoticThreshold = 8.0;
    if (gamma >= kAsymptoticThreshold) {
        // Stirling's series for log Gamma(1 - i gamma) with the leading terms cancelled.
        const double inv = 1.0 / gamma;
        const double inv2 = inv * inv;
        double power = inv, sum = 0.0, sign = 1.0;
        for (double coeff : detail::kStirlingCoefficients) {
            sum += sign * coeff * power;
            power *= inv2;
            sign = -sign;
        }
        return sum;
    }
    return gamma * (std::log(gamma) - 1.0) + arg_gamma_one_minus_i(gamma) +
           0.25 * std::numbers::pi;
}

}  // namespace lzsim
