#include "dqpt/error.hpp"
#include "dqpt/precise_spectrum.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dqpt;
using namespace dqpt::precise;

TEST(Precision, GrowsWithSystemSize)
{
    EXPECT_GE(precision_for_system_size(10), 128);
    EXPECT_GT(precision_for_system_size(600), precision_for_system_size(100));
    // ln 2^(bits - 64) must cover 0.75 N.
    const auto bits = precision_for_system_size(600);
    EXPECT_GE((bits - 64) * std::log(2.0), 0.75 * 600);
}

TEST(ParityBlock, IndicesSplitTheBasis)
{
    const SpinQuantumNumber j(7);
    const auto even = parity_block_indices(j, 1);
    const auto odd = parity_block_indices(j, -1);
    EXPECT_EQ(even.size() + odd.size(), 8u);
    EXPECT_EQ(even.front(), 0);
    EXPECT_EQ(odd.front(), 1);
}

TEST(ParityBlock, MatchesDenseHamiltonian)
{
    const SpinQuantumNumber j(13);
    const LMGParams p{0.3, 0.5, 1.0, j};
    const auto h = build_lmg_hamiltonian(p);
    for (int parity : {1, -1}) {
        const auto idx = parity_block_indices(j, parity);
        const auto t = lmg_parity_block(p, parity, 128);
        ASSERT_EQ(t.size(), idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            EXPECT_NEAR(t.diag[a].to_double(), h(idx[a], idx[a]).real(), 1e-13);
            if (a + 1 < idx.size()) {
                EXPECT_NEAR(t.off[a].to_double(), h(idx[a], idx[a + 1]).real(), 1e-13);
            }
        }
    }
}

TEST(Eigenpairs, AgreeWithDenseSolver)
{
    const SpinQuantumNumber j(40);
    const LMGParams p{0.8, 0.5, 1.0, j};
    const auto dense = diagonalize(build_lmg_hamiltonian(p));
    std::vector<double> all;
    for (int parity : {1, -1}) {
        const auto t = lmg_parity_block(p, parity, 192);
        const auto pairs = eigenpairs(t);
        ASSERT_EQ(pairs.size(), t.size());
        for (const auto& e : pairs) {
            all.push_back(e.value.to_double());
            mpfr_t norm;
            mpfr_init2(norm, 192);
            mp::dot(norm, e.vector, e.vector);
            EXPECT_NEAR(mpfr_get_d(norm, MPFR_RNDN), 1.0, 1e-30);
            mpfr_clear(norm);
        }
    }
    std::sort(all.begin(), all.end());
    for (std::size_t k = 0; k < all.size(); ++k) {
        EXPECT_NEAR(all[k], dense.eigenvalues(static_cast<Eigen::Index>(k)), 1e-11);
    }
}

TEST(Eigenpairs, MirrorSymmetricBlockAtZeroField)
{
    // h = 0: every block is symmetric under reversal, half its eigenvectors antisymmetric.
    const LMGParams p{0.0, 0.5, 1.0, SpinQuantumNumber(400)};
    for (int parity : {1, -1}) {
        const auto t = lmg_parity_block(p, parity, 160);
        const auto pairs = eigenpairs(t);
        ASSERT_EQ(pairs.size(), t.size());
        EXPECT_NEAR(pairs[1].value.to_double(), -198.882756381538, 1e-9);
    }
}

TEST(Eigenpairs, ResolvesDegenerateDoubletAtHighPrecision)
{
    // At h = 0 the ferromagnetic doublet splits by far less than double epsilon.
    const SpinQuantumNumber j(200);
    const LMGParams p{0.0, 0.5, 1.0, j};
    const auto m = PreciseGroundManifold::compute(p, precision_for_system_size(200));
    EXPECT_NEAR(m.even_energy, m.odd_energy, 1e-12);
    const auto even = m.to_full(1);
    const auto odd = m.to_full(-1);
    EXPECT_NEAR(even.norm(), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(even.dot(odd)), 0.0, 1e-14);
}

TEST(SpectralWeights, SumToOne)
{
    const SpinQuantumNumber j(60);
    const LMGParams p0{0.0, 0.5, 1.0, j};
    const LMGParams pf{0.8, 0.5, 1.0, j};
    const auto bits = precision_for_system_size(60);
    const auto m = PreciseGroundManifold::compute(p0, bits);
    const auto sw = spectral_weights(lmg_parity_block(pf, 1, bits), m.even);
    double total = 0.0;
    for (const auto& w : sw.weights) {
        total += w.to_double();
    }
    EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(ReturnAmplitudes, MatchDirectSumAtShortTimes)
{
    const SpinQuantumNumber j(20);
    const LMGParams p0{0.0, 0.5, 1.0, j};
    const LMGParams pf{0.8, 0.5, 1.0, j};
    const auto bits = precision_for_system_size(20);
    const auto m = PreciseGroundManifold::compute(p0, bits);
    const std::vector<SpectralWeights> sectors = {spectral_weights(lmg_parity_block(pf, 1, bits), m.even)};
    std::vector<std::complex<double>> g;
    evaluate_return_amplitudes(sectors, 0.1, 30, [&](std::size_t, std::span<const mp::Real> re,
                                                     std::span<const mp::Real> im) {
        g.emplace_back(re[0].to_double(), im[0].to_double());
    });
    ASSERT_EQ(g.size(), 31u);
    EXPECT_NEAR(std::abs(g[0]), 1.0, 1e-15);
    for (std::size_t n = 0; n < g.size(); ++n) {
        std::complex<double> direct = 0.0;
        for (std::size_t k = 0; k < sectors[0].weights.size(); ++k) {
            direct += sectors[0].weights[k].to_double() *
                      std::polar(1.0, -sectors[0].energies[k].to_double() * 0.1 * static_cast<double>(n));
        }
        EXPECT_NEAR(std::abs(g[n] - direct), 0.0, 1e-12) << n;
    }
}
