#pragma once

#include "dqpt/dynamics.hpp"

#include <string>
#include <vector>

namespace dqpt {

enum class Protocol { pure, thermal };

/// State the evolved state is compared against.
enum class AngleReference {
    /// The initial state rho_0.
    initial,
    /// The Gibbs state of the final Hamiltonian at the same beta. Unitary
    /// invariance makes the resulting angle constant in time.
    equilibrium,
};

[[nodiscard]] std::string to_string(Protocol p);
[[nodiscard]] std::string to_string(AngleReference r);
[[nodiscard]] AngleReference angle_reference_from_string(const std::string& name);

struct BuresSeries {
    std::vector<double> times;
    /// Radians in [0, pi/2].
    std::vector<double> angle;
    /// ln(pi/2 - angle); stays accurate where angle is within roundoff of pi/2.
    std::vector<double> log_complement;
    Protocol protocol = Protocol::pure;
    AngleReference reference = AngleReference::initial;
};

/// arccos |<psi1|psi2>|. Both states must be normalized within 1e-10.
[[nodiscard]] double wootters_distance(const ComplexVector& psi1, const ComplexVector& psi2);

/// [Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))]^2, evaluated as the squared trace norm
/// of sqrt(rho2) sqrt(rho1).
[[nodiscard]] double uhlmann_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// arccos sqrt(F).
[[nodiscard]] double bures_angle(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// arccos exp(-N lambda / 2).
[[nodiscard]] double bures_from_rate(double lambda, int system_size);

/// Angle series of a quench. Without beta the evolved ground state is compared
/// with the initial one at extended precision; with beta the thermal state of
/// H(h0) is evolved and compared through the Uhlmann fidelity. Thermal time
/// points are spread over `workers` threads.
[[nodiscard]] BuresSeries bures_series(const QuenchSpec& quench, AngleReference reference = AngleReference::initial,
                                       unsigned workers = 1, const precise::PreciseGroundManifold* manifold = nullptr);

/// Pure-protocol angles read off an existing Loschmidt result.
[[nodiscard]] BuresSeries bures_series(const LoschmidtResult& loschmidt);

/// wootters_distance(psi0, evolve_pure(psi0, t)) on the grid, entirely in
/// double precision with dense eigenvectors. Independent of loschmidt_series.
[[nodiscard]] std::vector<double> direct_wootters_series(const QuenchSpec& quench);

/// Fidelity between exp(-beta H0)/Z and its evolution under H_f, computed
/// block by block in the parity basis where both states are block diagonal.
class ThermalFidelity {
public:
    ThermalFidelity(const LMGParams& initial, const LMGParams& final_params, double beta);

    /// sqrt F(rho_0, rho_t).
    [[nodiscard]] double root_fidelity(double t) const;
    /// Number of Boltzmann weights retained across both blocks.
    [[nodiscard]] int retained_states() const noexcept { return retained_; }

private:
    struct Block {
        RealVector energies;
        /// Rows: eigenstates of H_f; columns: retained eigenstates of H0 scaled by sqrt(p).
        Eigen::MatrixXd overlaps;
    };
    std::vector<Block> blocks_;
    int retained_ = 0;
};

} // namespace dqpt
