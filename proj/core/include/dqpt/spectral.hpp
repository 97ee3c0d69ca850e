#pragma once

#include "dqpt/spinops.hpp"

#include <vector>

namespace dqpt {

using HermitianMatrix = ComplexMatrix;

/// Parameters of H = -2h J_z - (g/j)(J_x^2 + gamma J_y^2).
struct LMGParams {
    double h;
    double gamma;
    double g;
    SpinQuantumNumber j;

    /// Throws DomainError if g == 0 or any field is not finite.
    void validate() const;

    friend bool operator==(const LMGParams&, const LMGParams&) = default;
};

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// (column k belongs to eigenvalue k).
struct SpectralDecomposition {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
    /// Parity (+1/-1) of each eigenvector, or empty when the decomposition was
    /// computed without reference to a symmetry.
    std::vector<int> parity;

    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(eigenvalues.size()); }
    [[nodiscard]] bool has_parity() const noexcept { return !parity.empty(); }
    /// V diag(E) V^dagger.
    [[nodiscard]] HermitianMatrix reconstruct() const;
};

/// A Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    /// Validates Hermiticity (1e-12), trace (1e-10) and spectrum (>= -1e-12).
    explicit DensityMatrix(ComplexMatrix rho);

    /// Skips the eigenvalue check; for states that are valid by construction
    /// (spectral forms, unitary conjugates of valid states). The matrix is
    /// symmetrized to remove roundoff asymmetry.
    static DensityMatrix from_trusted(ComplexMatrix rho);

    [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return rho_; }
    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(rho_.rows()); }
    [[nodiscard]] double purity() const;

private:
    struct Trusted {};
    DensityMatrix(ComplexMatrix rho, Trusted);

    ComplexMatrix rho_;
};

struct GroundState {
    int parity;
    ComplexVector vector;
    double energy;
};

/// Lowest-energy eigenstate of each parity sector.
struct GroundManifold {
    /// Even sector first, then odd.
    std::vector<GroundState> states;
    double degeneracy_gap;

    [[nodiscard]] const GroundState& sector(int parity) const;
    /// (|even> + |odd>)/sqrt(2); with the phase convention used by
    /// ground_manifold() this is the state polarized along +x.
    [[nodiscard]] ComplexVector symmetry_broken_state() const;
};

[[nodiscard]] HermitianMatrix build_lmg_hamiltonian(const LMGParams& params, const CollectiveSpinOps& ops);
[[nodiscard]] HermitianMatrix build_lmg_hamiltonian(const LMGParams& params);

/// Dense Hermitian eigendecomposition. Throws DomainError for non-Hermitian
/// input and NumericalFault if the solver does not converge.
[[nodiscard]] SpectralDecomposition diagonalize(const HermitianMatrix& h);

/// Diagonalizes each eigenspace of a diagonal +-1 symmetry separately and
/// merges the results in ascending energy. Eigenvectors are exact parity
/// eigenstates even where the two sectors are degenerate to machine precision.
[[nodiscard]] SpectralDecomposition diagonalize_parity_resolved(const HermitianMatrix& h, const HermitianMatrix& parity);

/// Spin-flip parity (-1)^(j+m), diagonal in the m basis.
[[nodiscard]] HermitianMatrix parity_operator(SpinQuantumNumber j);

/// Picks the lowest state in each parity sector. Phases are fixed so that the
/// even state has a real positive largest component and <even|J_x|odd> >= 0.
[[nodiscard]] GroundManifold ground_manifold(const SpectralDecomposition& spec, const HermitianMatrix& parity);

/// Normalized Boltzmann weights exp(-beta (E - E_min)) / Z.
[[nodiscard]] RealVector boltzmann_weights(const RealVector& energies, double beta);

/// Gibbs state exp(-beta H)/Z built in the eigenbasis. Rejects beta < 0.
[[nodiscard]] DensityMatrix thermal_state(const SpectralDecomposition& spec, double beta);

/// h_c = (h0 + g)/2.
[[nodiscard]] constexpr double dynamical_critical_field(double h0, double g) noexcept { return (h0 + g) / 2.0; }

/// Largest absolute entry.
[[nodiscard]] double max_abs(const ComplexMatrix& m);

} // namespace dqpt
