#pragma once

#include <Eigen/Dense>

#include <compare>
#include <string>

namespace dqpt {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Spin quantum number j stored as the integer 2j, so half-integers are exact.
class SpinQuantumNumber {
public:
    /// Throws DomainError unless twice_j >= 1.
    explicit SpinQuantumNumber(int twice_j);

    /// Accepts j as a decimal (e.g. 0.5, 300); rejects values that are not
    /// half-integers.
    static SpinQuantumNumber from_value(double j);

    [[nodiscard]] int twice_j() const noexcept { return twice_j_; }
    [[nodiscard]] double value() const noexcept { return 0.5 * twice_j_; }
    [[nodiscard]] int dimension() const noexcept { return twice_j_ + 1; }
    /// Number of spin-1/2 constituents, N = 2j.
    [[nodiscard]] int system_size() const noexcept { return twice_j_; }
    /// Magnetic quantum number of basis index k (ascending m).
    [[nodiscard]] double m_of_index(int k) const noexcept { return k - value(); }

    [[nodiscard]] std::string to_string() const;

    auto operator<=>(const SpinQuantumNumber&) const = default;

private:
    int twice_j_;
};

/// <m+1| J_+ |m> = sqrt(j(j+1) - m(m+1)).
[[nodiscard]] double ladder_coefficient(SpinQuantumNumber j, double m);

/// Dense collective spin operators in the |j, m> basis, m = -j ... +j.
struct CollectiveSpinOps {
    SpinQuantumNumber j;
    ComplexMatrix jx;
    ComplexMatrix jy;
    ComplexMatrix jz;
    ComplexMatrix jplus;
    ComplexMatrix jminus;
};

/// Builds J_x, J_y, J_z, J_+ and J_- for spin j. Matrix elements come straight
/// from the square-root formula, not a recursion.
[[nodiscard]] CollectiveSpinOps build_spin_ops(SpinQuantumNumber j);

} // namespace dqpt
