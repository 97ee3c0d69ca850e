#include "dqpt/error.hpp"
#include "dqpt/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dqpt;

namespace {

ComplexVector random_state(std::mt19937_64& rng, int d)
{
    std::normal_distribution<double> n;
    ComplexVector v(d);
    for (int i = 0; i < d; ++i) {
        v(i) = {n(rng), n(rng)};
    }
    return v.normalized();
}

DensityMatrix random_density(std::mt19937_64& rng, int d, int rank)
{
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (int r = 0; r < rank; ++r) {
        const auto v = random_state(rng, d);
        a += (r + 1.0) * v * v.adjoint();
    }
    a /= a.trace().real();
    return DensityMatrix::from_trusted(a);
}

QuenchSpec quench(int twice_j, double h0, double h, std::optional<double> beta, double t_max, double dt,
                  InitialState s = InitialState::symmetry_broken)
{
    const SpinQuantumNumber j(twice_j);
    return QuenchSpec{LMGParams{h0, 0.5, 1.0, j}, LMGParams{h, 0.5, 1.0, j}, beta, TimeGrid::from_horizon(t_max, dt),
                      s};
}

} // namespace

TEST(Wootters, KnownAngles)
{
    ComplexVector a(2), b(2);
    a << 1.0, 0.0;
    b << 0.0, 1.0;
    EXPECT_NEAR(wootters_distance(a, b), std::numbers::pi / 2, 1e-15);
    EXPECT_DOUBLE_EQ(wootters_distance(a, a), 0.0);
    ComplexVector c(2);
    c << std::cos(0.3), std::complex<double>(0.0, std::sin(0.3));
    EXPECT_NEAR(wootters_distance(a, c), 0.3, 1e-15);
    // Near-parallel states: accurate far below sqrt(epsilon).
    ComplexVector d(2);
    d << std::cos(1e-9), std::sin(1e-9);
    EXPECT_NEAR(wootters_distance(a, d), 1e-9, 1e-20);
    EXPECT_THROW((void)wootters_distance(a, 2.0 * a), DomainError);
}

TEST(Uhlmann, PureStatesReduceToOverlap)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_state(rng, 6);
        const auto b = random_state(rng, 6);
        const double f = uhlmann_fidelity(DensityMatrix::from_trusted(a * a.adjoint()),
                                          DensityMatrix::from_trusted(b * b.adjoint()));
        EXPECT_NEAR(f, std::norm(a.dot(b)), 1e-10);
    }
}

TEST(Uhlmann, SymmetricBoundedAndUnitaryInvariant)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r1 = random_density(rng, 5, 3);
        const auto r2 = random_density(rng, 5, 2);
        const double f12 = uhlmann_fidelity(r1, r2);
        EXPECT_NEAR(f12, uhlmann_fidelity(r2, r1), 1e-10);
        EXPECT_GE(f12, 0.0);
        EXPECT_LE(f12, 1.0);
        EXPECT_NEAR(uhlmann_fidelity(r1, r1), 1.0, 1e-10);
        Eigen::ComplexEigenSolver<ComplexMatrix> es(r1.matrix() + r2.matrix() * std::complex<double>(0, 1));
        const ComplexMatrix u = Eigen::HouseholderQR<ComplexMatrix>(es.eigenvectors()).householderQ();
        const auto u1 = DensityMatrix::from_trusted(u * r1.matrix() * u.adjoint());
        const auto u2 = DensityMatrix::from_trusted(u * r2.matrix() * u.adjoint());
        // Rank-deficient states: square roots of roundoff-level eigenvalues limit this to ~1e-9.
        EXPECT_NEAR(uhlmann_fidelity(u1, u2), f12, 1e-8);
    }
}

TEST(Uhlmann, CommutingStatesGiveClassicalFidelity)
{
    ComplexMatrix a = ComplexMatrix::Zero(3, 3), b = ComplexMatrix::Zero(3, 3);
    a.diagonal() << 0.5, 0.3, 0.2;
    b.diagonal() << 0.1, 0.6, 0.3;
    const double root = std::sqrt(0.05) + std::sqrt(0.18) + std::sqrt(0.06);
    EXPECT_NEAR(uhlmann_fidelity(DensityMatrix(a), DensityMatrix(b)), root * root, 1e-14);
    EXPECT_NEAR(bures_angle(DensityMatrix(a), DensityMatrix(b)), std::acos(root), 1e-12);
}

TEST(BuresFromRate, Identity)
{
    EXPECT_DOUBLE_EQ(bures_from_rate(0.0, 10), 0.0);
    EXPECT_NEAR(bures_from_rate(0.2, 10), std::acos(std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(bures_from_rate(5.0, 600), std::numbers::pi / 2, 1e-15);
    EXPECT_THROW((void)bures_from_rate(-0.1, 10), DomainError);
    EXPECT_THROW((void)bures_from_rate(0.1, 0), DomainError);
}

TEST(BuresSeries, PureMatchesDirectWootters)
{
    const auto q = quench(40, 0.0, 0.8, std::nullopt, 5.0, 0.05);
    const auto b = bures_series(q);
    const auto direct = direct_wootters_series(q);
    EXPECT_EQ(b.protocol, Protocol::pure);
    for (std::size_t n = 0; n < direct.size(); ++n) {
        EXPECT_NEAR(b.angle[n], direct[n], 1e-9);
    }
}

TEST(ThermalFidelity, MatchesDenseUhlmann)
{
    const SpinQuantumNumber j(10);
    const LMGParams p0{0.0, 0.5, 1.0, j}, pf{0.8, 0.5, 1.0, j};
    const auto rho0 = thermal_state(diagonalize(build_lmg_hamiltonian(p0)), 0.7);
    const auto spec_f = diagonalize(build_lmg_hamiltonian(pf));
    const ThermalFidelity engine(p0, pf, 0.7);
    EXPECT_EQ(engine.retained_states(), 11);
    for (double t : {0.0, 0.4, 1.3, 5.0}) {
        const double dense = std::sqrt(uhlmann_fidelity(rho0, evolve_density(spec_f, rho0, t)));
        EXPECT_NEAR(engine.root_fidelity(t), dense, 1e-9) << t;
    }
}

TEST(BuresSeries, ThermalIsDeterministicAcrossWorkers)
{
    const auto q = quench(30, 0.0, 0.8, 1.0, 3.0, 0.05);
    const auto a = bures_series(q, AngleReference::initial, 1);
    const auto b = bures_series(q, AngleReference::initial, 4);
    EXPECT_EQ(a.angle, b.angle);
    EXPECT_EQ(a.protocol, Protocol::thermal);
    EXPECT_DOUBLE_EQ(a.angle[0], 0.0);
}

TEST(BuresSeries, EquilibriumReference)
{
    const auto q = quench(20, 0.0, 0.8, 2.0, 1.0, 0.1);
    const auto b = bures_series(q, AngleReference::equilibrium);
    EXPECT_GT(b.angle.front(), 0.0);
    EXPECT_EQ(b.angle.front(), b.angle.back());
    EXPECT_THROW((void)bures_series(quench(20, 0.0, 0.8, std::nullopt, 1.0, 0.1), AngleReference::equilibrium),
                 DomainError);
    EXPECT_THROW((void)angle_reference_from_string("final"), DomainError);
}

TEST(BuresSeries, ColdThermalApproachesPureGroundState)
{
    // Paramagnetic h0: unique even ground state.
    const auto thermal = bures_series(quench(40, 1.5, 0.8, 200.0, 3.0, 0.05));
    const auto pure = bures_series(quench(40, 1.5, 0.8, std::nullopt, 3.0, 0.05, InitialState::parity_even));
    for (std::size_t n = 0; n < pure.angle.size(); ++n) {
        EXPECT_NEAR(thermal.angle[n], pure.angle[n], 1e-6);
    }
}
