#include <gtest/gtest.h>

#include <random>

#include "lzsim/aia.hpp"
#include "lzsim/analysis.hpp"
#include "oracles.hpp"

using namespace lzsim;

namespace {

double unitarity_defect(const CMatrix& m) {
    return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

double phase_of(const CycleDecomposition& d, const std::string& name) {
    for (const auto& [n, v] : d.phases)
        if (n == name) return v;
    ADD_FAILURE() << "missing phase " << name;
    return 0.0;
}

}  // namespace

TEST(Aia, SingleAtomProbabilityIsTheLandauZenerFormula) {
    for (double v : {0.3, 1.0, 7.0}) {
        const LZParams lz = crossing_params(SystemSpec::two_level(1.0), 1, v);
        EXPECT_NEAR(lz_probability(lz), single_atom_lz(v, 1.0), 1e-15);
    }
    const LZParams two{0.5, 3.0, 2.0};
    EXPECT_NEAR(two.gamma(), 0.25 / 24.0, 1e-16);
    EXPECT_THROW(LZParams({0.0, 1.0, 1.0}).validate(), ValidationError);
}

TEST(Aia, ImpulseMatricesAreUnitary) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SystemSpec pair = SystemSpec::three_level(1.0, 30.0);
    for (int k = 0; k < 100; ++k) {
        const double P = u(rng), phi = u(rng) * std::numbers::pi / 4;
        for (int crossing : {1, 2, 3})
            for (bool tr : {false, true}) {
                const CMatrix m = impulse_matrix(pair, crossing, P, phi, tr);
                EXPECT_LT(unitarity_defect(m), 1e-12);
                const auto [lo, up] = crossing_pair(pair, crossing);
                EXPECT_NEAR(std::norm(m(up, lo)), P, 1e-14);
                const int spectator = 3 - lo - up;
                EXPECT_EQ(m(spectator, spectator), Complex(1.0, 0.0));
            }
        EXPECT_LT(unitarity_defect(impulse_matrix(SystemSpec::two_level(), 1, P, phi)), 1e-12);
    }
}

TEST(Aia, SegmentPhasesMatchSimpsonQuadrature) {
    const SystemSpec s = SystemSpec::three_level(1.0, 40.0);
    const DriveProtocol p = DriveProtocol::periodic(-15.0, 25.0, 5.0);
    const auto ev = crossing_times(p, s, 1.0, 0.0);
    ASSERT_GE(ev.size(), 2u);
    const double t1 = ev[0].time, t2 = ev[1].time;
    const Eigen::VectorXd z = accumulated_phases(s, p, t1, t2);
    for (int j = 0; j < 3; ++j) {
        const double ref = oracle::simpson([&](double t) { return three_level_energies(s, p.detuning(t))[j]; }, t1, t2);
        EXPECT_NEAR(z(j), ref, 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

TEST(Aia, SegmentsMustNotContainCrossings) {
    const SystemSpec s = SystemSpec::two_level();
    const DriveProtocol p = DriveProtocol::linear(1.0);
    EXPECT_THROW(adiabatic_matrix(s, p, -1.0, 1.0), CrossingInsideSegment);
    EXPECT_NO_THROW(adiabatic_matrix(s, p, 0.0, 1.0));
}

TEST(Aia, SingleCrossingMatchesExactPropagation) {
    const SystemSpec s = SystemSpec::two_level(1.0);
    for (double v : {0.5, 2.0, 8.0}) {
        const DriveProtocol p = DriveProtocol::linear(v);
        const SweepWindow w{-400.0 / v, 400.0 / v, 2};
        CVector lower(2);
        lower << 1.0, 0.0;
        const auto aia = compose_linear(s, p, lower, w);
        const auto exact = integrate(s, p, adiabatic_state(s, p, 0, w.t_i), w);
        EXPECT_NEAR(aia.final_populations(1), single_atom_lz(v, 1.0), 1e-12);
        EXPECT_NEAR(exact.adiabatic(1, 1), aia.final_populations(1), 2e-3) << "v=" << v;
        EXPECT_LT(unitarity_defect(aia.evolution), 1e-12);
    }
}

TEST(Aia, ThreeCrossingSweepTracksExactPopulations) {
    const SystemSpec s = SystemSpec::three_level(1.0, 10.0);
    const DriveProtocol p = DriveProtocol::linear(1.0);
    const SweepWindow w = standard_window(s, p);
    for (int j = 0; j < 3; ++j) {
        const StateVector psi0 = adiabatic_state(s, p, j, w.t_i);
        const auto exact = integrate(s, p, psi0, w);
        const auto aia = compose_linear(s, p, to_adiabatic(s, p, psi0.amplitudes, w.t_i), w);
        ASSERT_EQ(aia.decomposition.factors.size(), 7u);
        for (int m = 0; m < 3; ++m)
            EXPECT_NEAR(exact.adiabatic(exact.adiabatic.rows() - 1, m), aia.final_populations(m), 0.05);
    }
}

TEST(Aia, ClosedFormEqualsMatrixPower) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> bias(-8.0, 8.0), amp(10.0, 30.0), freq(0.3, 3.0);
    std::uniform_int_distribution<int> cycles(1, 12);
    const SystemSpec s = SystemSpec::two_level(1.0);
    for (int draw = 0; draw < 20; ++draw) {
        const DriveProtocol p = DriveProtocol::periodic(bias(rng), amp(rng), freq(rng));
        const int k = cycles(rng);
        const auto cf = closed_form_two_level(s, p, k);
        CVector minus(2);
        minus << 1.0, 0.0;
        const auto r = compose_periodic(s, p, minus, k);
        EXPECT_NEAR(cf.p_k, r.final_populations(1), 1e-10);
        EXPECT_NEAR(cf.p_one, std::norm(r.decomposition.product(1, 0)), 1e-10);
        EXPECT_LE(cf.p_k, cf.p_k_max + 1e-9);
        EXPECT_NEAR(phase_of(r.decomposition, "phi_s"), cf.stuckelberg, 1e-14);
    }
}

TEST(Aia, PeriodicCompositionNeedsACrossing) {
    const SystemSpec s = SystemSpec::two_level();
    CVector psi(2);
    psi << 1.0, 0.0;
    EXPECT_THROW(compose_periodic(s, DriveProtocol::periodic(10.0, 5.0, 1.0), psi, 3), NoCrossing);
    EXPECT_THROW(closed_form_two_level(s, DriveProtocol::periodic(10.0, 5.0, 1.0), 3), NoCrossing);
}

TEST(Aia, PeriodicPhaseLedgerIsComplete) {
    const SystemSpec s = SystemSpec::three_level(1.0, 40.0);
    const DriveProtocol p = DriveProtocol::periodic(-15.0, 25.0, 5.0);
    CVector psi = CVector::Zero(3);
    psi(0) = 1.0;
    const auto r = compose_periodic(s, p, psi, 4);
    // Delta spans [-40, 10] and only reaches the crossing at 0: two impulses, three segments.
    EXPECT_EQ(r.decomposition.factors.size(), 5u);
    int impulses = 0;
    for (const auto& f : r.decomposition.factors) {
        EXPECT_LT(unitarity_defect(f.entries), 1e-12);
        impulses += f.kind == FactorKind::Impulse;
    }
    EXPECT_EQ(impulses, 2);
    EXPECT_LT(unitarity_defect(r.evolution), 1e-12);
    EXPECT_NEAR(r.time_average.sum(), 1.0, 1e-12);
    EXPECT_NEAR(phase_of(r.decomposition, "phi_G"), 0.5 * p.detuning_integral(0.0, p.period()), 1e-12);
    EXPECT_GT(phase_of(r.decomposition, "stokes_imp1_x1"), 0.0);
}

TEST(Aia, ZeroStokesOptionDropsEveryStokesPhase) {
    const SystemSpec s = SystemSpec::three_level(1.0, 10.0);
    const DriveProtocol p = DriveProtocol::linear(2.0);
    CVector psi = CVector::Zero(3);
    psi(0) = 1.0;
    AiaOptions opt;
    opt.zero_stokes = true;
    const auto r = compose_linear(s, p, psi, standard_window(s, p), opt);
    for (const auto& f : r.decomposition.factors)
        if (f.kind == FactorKind::Impulse) {
            EXPECT_EQ(f.stokes, 0.0);
        }
}

TEST(Aia, SingleAtomValidityReport) {
    const auto r = validity_report(SystemSpec::two_level(1.0), DriveProtocol::periodic(5.0, 20.0, 1.0));
    ASSERT_GE(r.criteria.size(), 2u);
    EXPECT_EQ(r.criteria[0].name, "delta - |Delta0| > Omega");
    EXPECT_DOUBLE_EQ(r.criteria[0].lhs, 15.0);
    EXPECT_TRUE(r.criteria[0].pass);
    EXPECT_DOUBLE_EQ(r.criteria[1].lhs, 20.0);
    EXPECT_TRUE(r.criteria[1].pass);
    EXPECT_TRUE(r.verdict);
    const auto slow = validity_report(SystemSpec::two_level(1.0), DriveProtocol::periodic(0.0, 1.5, 0.2));
    EXPECT_FALSE(slow.verdict);
}

TEST(Aia, LinearValidityReport) {
    const auto ok = validity_report(SystemSpec::three_level(1.0, 20.0), DriveProtocol::linear(2.0));
    EXPECT_TRUE(ok.verdict);
    EXPECT_EQ(ok.lz_times.size(), 3u);
    const auto merged = validity_report(SystemSpec::three_level(1.0, 0.5), DriveProtocol::linear(4.0));
    EXPECT_FALSE(merged.verdict);
}
