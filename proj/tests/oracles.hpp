#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <complex>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace oracle {

// Number of eigenvalues of a real symmetric tridiagonal matrix below x: sign
// changes in the Sturm sequence of its leading principal minors.
inline int sturm_count(const Eigen::MatrixXd& a, double x) {
    int count = 0;
    double q = 1.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double off = i ? a(i, i - 1) : 0.0;
        q = a(i, i) - x - (i ? off * off / q : 0.0);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

// Ascending eigenvalues of a 3x3 symmetric tridiagonal matrix by bisection on
// the characteristic polynomial's Sturm sequence, started from the Gershgorin bounds.
inline std::array<double, 3> symmetric_roots(const Eigen::MatrixXd& a) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 3; ++i) {
        double r = 0.0;
        for (int j = 0; j < 3; ++j)
            if (j != i) r += std::abs(a(i, j));
        lo = std::min(lo, a(i, i) - r);
        hi = std::max(hi, a(i, i) + r);
    }
    std::array<double, 3> roots{};
    for (int k = 0; k < 3; ++k) {
        double l = lo, r = hi;
        for (int it = 0; it < 300 && r - l > 0.0; ++it) {
            const double m = 0.5 * (l + r);
            if (m == l || m == r) break;
            if (sturm_count(a, m) > k) r = m;
            else l = m;
        }
        roots[k] = 0.5 * (l + r);
    }
    return roots;
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

// Exponential midpoint propagation psi <- exp(-i H(t + dt/2) dt) psi, each
// exponential taken through a Hermitian eigendecomposition.  Second order in dt.
inline Eigen::VectorXcd midpoint_exponential(const std::function<Eigen::MatrixXcd(double)>& h,
                                             Eigen::VectorXcd psi, double t0, double t1, long steps) {
    const double dt = (t1 - t0) / steps;
    for (long k = 0; k < steps; ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h(t0 + (k + 0.5) * dt));
        Eigen::VectorXcd phase(psi.size());
        for (Eigen::Index j = 0; j < psi.size(); ++j)
            phase(j) = std::exp(std::complex<double>(0.0, -es.eigenvalues()(j) * dt));
        psi = es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * psi);
    }
    return psi;
}

// Populations from two midpoint runs combined by Richardson extrapolation.
inline Eigen::VectorXd richardson_populations(const std::function<Eigen::MatrixXcd(double)>& h,
                                              const Eigen::VectorXcd& psi0, double t0, double t1,
                                              long steps) {
    const Eigen::VectorXd coarse = midpoint_exponential(h, psi0, t0, t1, steps).cwiseAbs2();
    const Eigen::VectorXd fine = midpoint_exponential(h, psi0, t0, t1, 2 * steps).cwiseAbs2();
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace oracle
