#pragma once

// Extended-precision spectral machinery for the LMG model.
//
// Return amplitudes of a quenched many-body state are exponentially small in
// the system size (|G| ~ exp(-N lambda / 2)), and they arise from cancellation
// in a sum of O(1) terms. Double precision bottoms out near |G| ~ 1e-15, which
// at N = 600 is far above the values that carry the dynamical transition. The
// routines here rebuild the parity blocks of H (tridiagonal, since H couples m
// to m +- 2 only), refine their eigenpairs in MPFR arithmetic starting from
// double-precision guesses, and evaluate the amplitude sums at that precision.

#include "dqpt/multiprecision.hpp"
#include "dqpt/spectral.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dqpt::precise {

/// Working precision that resolves return amplitudes down to exp(-depth * N)
/// with 64 guard bits.
[[nodiscard]] mpfr_prec_t precision_for_system_size(int system_size, double depth = 0.75);

struct SymmetricTridiagonal {
    mp::Vector diag;
    /// off[i] couples rows i and i+1.
    mp::Vector off;
    mpfr_prec_t bits;

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }
    /// Gershgorin bound on the spectral radius.
    [[nodiscard]] double norm_bound() const;
};

/// Basis indices k = j + m of one parity sector; +1 selects even k.
[[nodiscard]] std::vector<int> parity_block_indices(SpinQuantumNumber j, int parity);

/// H(params) restricted to one parity sector, in ascending-m order.
[[nodiscard]] SymmetricTridiagonal lmg_parity_block(const LMGParams& params, int parity, mpfr_prec_t bits);

struct Eigenpair {
    mp::Real value;
    mp::Vector vector;
};

/// Lowest eigenpair of t. Throws NumericalFault if it is not separated from
/// the next eigenvalue.
[[nodiscard]] Eigenpair lowest_eigenpair(const SymmetricTridiagonal& t);

/// All eigenpairs of t, ascending. Near-degenerate clusters are resolved by
/// subspace iteration followed by a Rayleigh-Ritz step.
[[nodiscard]] std::vector<Eigenpair> eigenpairs(const SymmetricTridiagonal& t);

/// Eigenvalues E_k and squared overlaps <k|state>^2 of a normalized block state.
struct SpectralWeights {
    mp::Vector energies;
    mp::Vector weights;
};

/// Throws NumericalFault if the weights fail to sum to one at working precision.
[[nodiscard]] SpectralWeights spectral_weights(const SymmetricTridiagonal& t, const mp::Vector& state);

/// Ground state of each parity sector of H(params). The odd state's sign is
/// fixed by <even|J_x|odd> >= 0, the same convention as dqpt::ground_manifold.
struct PreciseGroundManifold {
    LMGParams params;
    mpfr_prec_t bits;
    mp::Vector even;
    mp::Vector odd;
    double even_energy;
    double odd_energy;

    [[nodiscard]] static PreciseGroundManifold compute(const LMGParams& params, mpfr_prec_t bits);

    [[nodiscard]] const mp::Vector& sector(int parity) const { return parity > 0 ? even : odd; }
    /// Embeds one sector state in the full (double precision) m basis.
    [[nodiscard]] ComplexVector to_full(int parity) const;
};

/// Receives the amplitude of every sector at grid point n.
using AmplitudeVisitor =
    std::function<void(std::size_t n, std::span<const mp::Real> re, std::span<const mp::Real> im)>;

/// Evaluates G_s(n dt) = sum_k w_k exp(-i E_k n dt) for every sector s and
/// n = 0..steps, in order.
void evaluate_return_amplitudes(std::span<const SpectralWeights> sectors, double dt, std::size_t steps,
                                const AmplitudeVisitor& visit);

} // namespace dqpt::precise
