#include "dqpt/spectral.hpp"

#include "dqpt/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

namespace dqpt {
namespace {

constexpr double kHermitianTolerance = 1e-10;
constexpr double kParityPurity = 1e-8;

bool is_real(const ComplexMatrix& m)
{
    return m.imag().cwiseAbs().maxCoeff() == 0.0;
}

void require_hermitian(const HermitianMatrix& h, double tolerance)
{
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw DomainError("expected a non-empty square matrix");
    }
    const double scale = std::max(1.0, max_abs(h));
    const double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tolerance * scale) {
        std::ostringstream msg;
        msg << "matrix is not Hermitian: max |H - H^dagger| = " << asym;
        throw DomainError(msg.str());
    }
}

SpectralDecomposition solve_hermitian(const HermitianMatrix& h)
{
    SpectralDecomposition out;
    if (is_real(h)) {
        const Eigen::MatrixXd re = h.real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(re);
        if (solver.info() != Eigen::Success) {
            throw NumericalFault("real symmetric eigensolver failed to converge");
        }
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors().cast<std::complex<double>>();
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
        if (solver.info() != Eigen::Success) {
            throw NumericalFault("Hermitian eigensolver failed to converge");
        }
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors();
    }
    return out;
}

std::vector<int> diagonal_signs(const HermitianMatrix& parity)
{
    const Eigen::Index d = parity.rows();
    if (parity.cols() != d) {
        throw DomainError("parity operator must be square");
    }
    std::vector<int> signs(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto v = parity(k, k);
        if (std::abs(v.imag()) > 0.0 || std::abs(std::abs(v.real()) - 1.0) > 1e-12) {
            throw DomainError("parity operator must be diagonal with entries +-1");
        }
        signs[static_cast<std::size_t>(k)] = v.real() > 0 ? 1 : -1;
    }
    const double off = (parity - ComplexMatrix(parity.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
    if (off > 0.0) {
        throw DomainError("parity operator must be diagonal in the m basis");
    }
    return signs;
}

std::vector<Eigen::Index> sector_indices(const std::vector<int>& signs, int sector)
{
    std::vector<Eigen::Index> idx;
    for (std::size_t k = 0; k < signs.size(); ++k) {
        if (signs[k] == sector) {
            idx.push_back(static_cast<Eigen::Index>(k));
        }
    }
    return idx;
}

HermitianMatrix restrict(const HermitianMatrix& h, const std::vector<Eigen::Index>& idx)
{
    const auto n = static_cast<Eigen::Index>(idx.size());
    HermitianMatrix block(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            block(a, b) = h(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
    }
    return block;
}

// Lowest eigenpair of H restricted to one parity sector, embedded in the full space.
GroundState sector_ground_state(const HermitianMatrix& h, const std::vector<int>& signs, int sector)
{
    const auto idx = sector_indices(signs, sector);
    if (idx.empty()) {
        throw NumericalFault("parity sector " + std::to_string(sector) + " is empty");
    }
    const SpectralDecomposition block = solve_hermitian(restrict(h, idx));
    ComplexVector v = ComplexVector::Zero(h.rows());
    for (std::size_t a = 0; a < idx.size(); ++a) {
        v(idx[a]) = block.eigenvectors(static_cast<Eigen::Index>(a), 0);
    }
    return GroundState{sector, v.normalized(), block.eigenvalues(0)};
}

// Multiplies v by a phase so that its largest-magnitude entry is real positive.
void fix_phase_by_largest(ComplexVector& v)
{
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    const auto z = v(arg);
    if (std::abs(z) > 0.0) {
        v *= std::conj(z) / std::abs(z);
    }
}

// <a| J_x |b> from the ladder coefficients, with j inferred from the dimension.
std::complex<double> jx_element(const ComplexVector& a, const ComplexVector& b)
{
    const SpinQuantumNumber j(static_cast<int>(a.size()) - 1);
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index k = 0; k + 1 < a.size(); ++k) {
        const double c = 0.5 * ladder_coefficient(j, j.m_of_index(static_cast<int>(k)));
        acc += c * (std::conj(a(k + 1)) * b(k) + std::conj(a(k)) * b(k + 1));
    }
    return acc;
}

} // namespace

void LMGParams::validate() const
{
    if (!std::isfinite(h) || !std::isfinite(gamma) || !std::isfinite(g)) {
        throw DomainError("LMG parameters must be finite");
    }
    if (g == 0.0) {
        throw DomainError("LMG coupling g must be nonzero");
    }
}

HermitianMatrix SpectralDecomposition::reconstruct() const
{
    return eigenvectors * eigenvalues.cast<std::complex<double>>().asDiagonal() * eigenvectors.adjoint();
}

double max_abs(const ComplexMatrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_{std::move(rho)}
{
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
        throw DomainError("density matrix must be square and non-empty");
    }
    const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        throw DomainError("density matrix is not Hermitian");
    }
    const double trace = rho_.trace().real();
    if (std::abs(trace - 1.0) > 1e-10) {
        throw DomainError("density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalFault("eigensolver failed while validating a density matrix");
    }
    if (solver.eigenvalues().minCoeff() < -1e-12) {
        throw DomainError("density matrix has a negative eigenvalue");
    }
}

DensityMatrix::DensityMatrix(ComplexMatrix rho, Trusted) : rho_{std::move(rho)} {}

DensityMatrix DensityMatrix::from_trusted(ComplexMatrix rho)
{
    ComplexMatrix sym = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(std::move(sym), Trusted{});
}

double DensityMatrix::purity() const
{
    return (rho_ * rho_).trace().real();
}

const GroundState& GroundManifold::sector(int parity) const
{
    for (const auto& s : states) {
        if (s.parity == parity) {
            return s;
        }
    }
    throw DomainError("no ground state recorded for parity " + std::to_string(parity));
}

ComplexVector GroundManifold::symmetry_broken_state() const
{
    return (sector(1).vector + sector(-1).vector) / std::sqrt(2.0);
}

HermitianMatrix build_lmg_hamiltonian(const LMGParams& params, const CollectiveSpinOps& ops)
{
    params.validate();
    if (ops.j != params.j) {
        throw DomainError("spin operators built for j = " + ops.j.to_string() + " but parameters use j = " +
                          params.j.to_string());
    }
    const double j = params.j.value();
    HermitianMatrix h = -2.0 * params.h * ops.jz - (params.g / j) * (ops.jx * ops.jx + params.gamma * (ops.jy * ops.jy));
    return 0.5 * (h + h.adjoint());
}

HermitianMatrix build_lmg_hamiltonian(const LMGParams& params)
{
    return build_lmg_hamiltonian(params, build_spin_ops(params.j));
}

SpectralDecomposition diagonalize(const HermitianMatrix& h)
{
    require_hermitian(h, kHermitianTolerance);
    return solve_hermitian(h);
}

SpectralDecomposition diagonalize_parity_resolved(const HermitianMatrix& h, const HermitianMatrix& parity)
{
    require_hermitian(h, kHermitianTolerance);
    if (parity.rows() != h.rows()) {
        throw DomainError("parity operator and Hamiltonian differ in dimension");
    }
    const auto signs = diagonal_signs(parity);
    const double scale = std::max(1.0, max_abs(h));
    for (Eigen::Index a = 0; a < h.rows(); ++a) {
        for (Eigen::Index b = 0; b < h.cols(); ++b) {
            if (signs[static_cast<std::size_t>(a)] != signs[static_cast<std::size_t>(b)] &&
                std::abs(h(a, b)) > 1e-10 * scale) {
                throw DomainError("Hamiltonian does not commute with the parity operator");
            }
        }
    }

    struct Column {
        double energy;
        int parity;
        ComplexVector vector;
    };
    std::vector<Column> columns;
    columns.reserve(static_cast<std::size_t>(h.rows()));
    for (int sector : {1, -1}) {
        const auto idx = sector_indices(signs, sector);
        if (idx.empty()) {
            continue;
        }
        const SpectralDecomposition block = solve_hermitian(restrict(h, idx));
        for (Eigen::Index c = 0; c < block.eigenvalues.size(); ++c) {
            ComplexVector v = ComplexVector::Zero(h.rows());
            for (std::size_t a = 0; a < idx.size(); ++a) {
                v(idx[a]) = block.eigenvectors(static_cast<Eigen::Index>(a), c);
            }
            columns.push_back(Column{block.eigenvalues(c), sector, std::move(v)});
        }
    }
    std::stable_sort(columns.begin(), columns.end(),
                     [](const Column& a, const Column& b) { return a.energy < b.energy; });

    SpectralDecomposition out;
    out.eigenvalues.resize(h.rows());
    out.eigenvectors.resize(h.rows(), h.rows());
    out.parity.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        out.eigenvalues(col) = columns[c].energy;
        out.eigenvectors.col(col) = columns[c].vector;
        out.parity[c] = columns[c].parity;
    }
    return out;
}

HermitianMatrix parity_operator(SpinQuantumNumber j)
{
    const int d = j.dimension();
    HermitianMatrix pi = HermitianMatrix::Zero(d, d);
    // j + m equals the basis index k, so (-1)^(j+m) = (-1)^k.
    for (int k = 0; k < d; ++k) {
        pi(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    }
    return pi;
}

GroundManifold ground_manifold(const SpectralDecomposition& spec, const HermitianMatrix& parity)
{
    const int d = spec.dimension();
    if (d < 2) {
        throw NumericalFault("ground manifold needs at least two basis states");
    }
    if (parity.rows() != d) {
        throw DomainError("parity operator and decomposition differ in dimension");
    }
    const auto signs = diagonal_signs(parity);

    // Parity label of every eigenvector; unlabeled decompositions are labeled
    // from <v|P|v> when every column is a clean parity eigenstate.
    std::vector<int> labels = spec.parity;
    bool clean = spec.has_parity();
    if (!clean) {
        clean = true;
        labels.resize(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            double expectation = 0.0;
            for (int k = 0; k < d; ++k) {
                expectation += signs[static_cast<std::size_t>(k)] * std::norm(spec.eigenvectors(k, c));
            }
            if (std::abs(std::abs(expectation) - 1.0) > kParityPurity) {
                clean = false;
                break;
            }
            labels[static_cast<std::size_t>(c)] = expectation > 0 ? 1 : -1;
        }
    }

    GroundManifold out;
    for (int sector : {1, -1}) {
        if (clean) {
            const auto it = std::find(labels.begin(), labels.end(), sector);
            if (it == labels.end()) {
                throw NumericalFault("parity sector " + std::to_string(sector) + " is empty");
            }
            const auto c = static_cast<Eigen::Index>(it - labels.begin());
            out.states.push_back(GroundState{sector, spec.eigenvectors.col(c), spec.eigenvalues(c)});
        } else {
            // Degenerate partners mixed by the solver: rebuild H and solve inside the sector.
            const HermitianMatrix h = spec.reconstruct();
            out.states.push_back(sector_ground_state(h, signs, sector));
        }
    }

    auto& even = out.states[0].vector;
    auto& odd = out.states[1].vector;
    fix_phase_by_largest(even);
    const auto coupling = jx_element(even, odd);
    if (std::abs(coupling) > 1e-12) {
        odd *= std::conj(coupling) / std::abs(coupling);
    } else {
        fix_phase_by_largest(odd);
    }
    out.degeneracy_gap = std::abs(out.states[0].energy - out.states[1].energy);
    return out;
}

RealVector boltzmann_weights(const RealVector& energies, double beta)
{
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw DomainError("inverse temperature must be finite and >= 0");
    }
    const double e_min = energies.minCoeff();
    RealVector w = (-beta * (energies.array() - e_min)).exp().matrix();
    return w / w.sum();
}

DensityMatrix thermal_state(const SpectralDecomposition& spec, double beta)
{
    const RealVector p = boltzmann_weights(spec.eigenvalues, beta);
    ComplexMatrix rho = spec.eigenvectors * p.cast<std::complex<double>>().asDiagonal() * spec.eigenvectors.adjoint();
    return DensityMatrix::from_trusted(std::move(rho));
}

} // namespace dqpt
