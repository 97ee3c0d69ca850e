#include "dqpt/spinops.hpp"

#include "dqpt/error.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace dqpt {

SpinQuantumNumber::SpinQuantumNumber(int twice_j) : twice_j_{twice_j}
{
    if (twice_j < 1) {
        throw DomainError("spin quantum number requires 2j >= 1, got 2j = " + std::to_string(twice_j));
    }
}

SpinQuantumNumber SpinQuantumNumber::from_value(double j)
{
    const double twice = 2.0 * j;
    const double rounded = std::round(twice);
    if (!std::isfinite(j) || std::abs(twice - rounded) > 1e-9 || rounded > 1e8) {
        std::ostringstream msg;
        msg << "j must be a positive half-integer, got " << j;
        throw DomainError(msg.str());
    }
    return SpinQuantumNumber(static_cast<int>(rounded));
}

std::string SpinQuantumNumber::to_string() const
{
    if (twice_j_ % 2 == 0) {
        return std::to_string(twice_j_ / 2);
    }
    return std::to_string(twice_j_) + "/2";
}

double ladder_coefficient(SpinQuantumNumber j, double m)
{
    const double jj = j.value();
    const double arg = jj * (jj + 1.0) - m * (m + 1.0);
    return arg > 0.0 ? std::sqrt(arg) : 0.0;
}

CollectiveSpinOps build_spin_ops(SpinQuantumNumber j)
{
    const int d = j.dimension();
    ComplexMatrix jplus = ComplexMatrix::Zero(d, d);
    ComplexMatrix jz = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double m = j.m_of_index(k);
        jz(k, k) = m;
        if (k + 1 < d) {
            jplus(k + 1, k) = ladder_coefficient(j, m);
        }
    }
    ComplexMatrix jminus = jplus.adjoint();
    const std::complex<double> two_i{0.0, 2.0};
    ComplexMatrix jx = 0.5 * (jplus + jminus);
    ComplexMatrix jy = (jplus - jminus) / two_i;
    return CollectiveSpinOps{j, std::move(jx), std::move(jy), std::move(jz), std::move(jplus), std::move(jminus)};
}

} // namespace dqpt
