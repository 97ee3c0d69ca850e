#include "dqpt/geometry.hpp"

#include "dqpt/error.hpp"
#include "dqpt/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dqpt {
namespace {

// Overlaps and root fidelities may exceed 1 by this much before it counts as a fault.
constexpr double kClampTolerance = 1e-8;
// Boltzmann weights below this fraction of the largest one are dropped.
constexpr double kWeightCutoff = 1e-32;
constexpr double kSmallestLog = -745.0;

double clamp_unit(double value, const char* what)
{
    if (value > 1.0 + kClampTolerance) {
        std::ostringstream msg;
        msg << what << " exceeds 1 by " << value - 1.0;
        throw NumericalFault(msg.str());
    }
    return std::clamp(value, 0.0, 1.0);
}

double log_complement_of(double overlap)
{
    // pi/2 - arccos(a) = asin(a)
    if (overlap <= 0.0) {
        return kSmallestLog;
    }
    return std::max(kSmallestLog, std::log(std::asin(overlap)));
}

ComplexMatrix psd_sqrt(const DensityMatrix& rho)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.matrix());
    if (solver.info() != Eigen::Success) {
        throw NumericalFault("eigensolver failed on a density matrix");
    }
    RealVector ev = solver.eigenvalues();
    if (ev.minCoeff() < -kClampTolerance) {
        std::ostringstream msg;
        msg << "density matrix has eigenvalue " << ev.minCoeff();
        throw DomainError(msg.str());
    }
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    const auto& v = solver.eigenvectors();
    return v * ev.cast<std::complex<double>>().asDiagonal() * v.adjoint();
}

struct RealBlock {
    RealVector energies;
    Eigen::MatrixXd vectors;
};

RealBlock solve_block(const LMGParams& params, int parity)
{
    const auto t = precise::lmg_parity_block(params, parity, 64);
    const auto n = static_cast<Eigen::Index>(t.size());
    RealBlock out;
    if (n == 1) {
        out.energies = RealVector::Constant(1, t.diag[0].to_double());
        out.vectors = Eigen::MatrixXd::Identity(1, 1);
        return out;
    }
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        diag(i) = t.diag[static_cast<std::size_t>(i)].to_double();
        if (i + 1 < n) {
            sub(i) = t.off[static_cast<std::size_t>(i)].to_double();
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalFault("tridiagonal eigensolver failed to converge");
    }
    out.energies = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    return out;
}

BuresSeries thermal_series(const QuenchSpec& quench, AngleReference reference, unsigned workers)
{
    BuresSeries out;
    out.times = quench.grid.times();
    out.protocol = Protocol::thermal;
    out.reference = reference;
    const double beta = *quench.beta;

    if (reference == AngleReference::equilibrium) {
        const auto rho0 = thermal_state(diagonalize(build_lmg_hamiltonian(quench.params_initial)), beta);
        const auto rho_eq = thermal_state(diagonalize(build_lmg_hamiltonian(quench.params_final)), beta);
        const double root = std::sqrt(uhlmann_fidelity(rho0, rho_eq));
        out.angle.assign(out.times.size(), std::acos(root));
        out.log_complement.assign(out.times.size(), log_complement_of(root));
        return out;
    }

    const ThermalFidelity engine(quench.params_initial, quench.params_final, beta);
    const auto roots = parallel_map(out.times.size(), workers, [&](std::size_t n) {
        return n == 0 ? 1.0 : engine.root_fidelity(out.times[n]);
    });
    out.angle.resize(roots.size());
    out.log_complement.resize(roots.size());
    for (std::size_t n = 0; n < roots.size(); ++n) {
        out.angle[n] = std::acos(roots[n]);
        out.log_complement[n] = log_complement_of(roots[n]);
    }
    return out;
}

} // namespace

std::string to_string(Protocol p)
{
    return p == Protocol::pure ? "pure" : "thermal";
}

std::string to_string(AngleReference r)
{
    return r == AngleReference::initial ? "initial" : "equilibrium";
}

AngleReference angle_reference_from_string(const std::string& name)
{
    if (name == "initial") {
        return AngleReference::initial;
    }
    if (name == "equilibrium") {
        return AngleReference::equilibrium;
    }
    throw DomainError("unknown angle reference '" + name + "' (expected initial or equilibrium)");
}

double wootters_distance(const ComplexVector& psi1, const ComplexVector& psi2)
{
    if (psi1.size() != psi2.size()) {
        throw DomainError("states differ in dimension");
    }
    for (const auto* psi : {&psi1, &psi2}) {
        if (std::abs(psi->norm() - 1.0) > 1e-10) {
            throw DomainError("wootters_distance needs normalized states");
        }
    }
    const std::complex<double> overlap = psi1.dot(psi2);
    const double magnitude = clamp_unit(std::abs(overlap), "state overlap");
    if (magnitude < 0.5) {
        return std::acos(magnitude);
    }
    // Nearly parallel: the chord |psi2 - e^{i phi} psi1| = 2 sin(angle/2) is
    // better conditioned than arccos near 1.
    const double chord = (psi2 - (overlap / std::abs(overlap)) * psi1).norm();
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

double uhlmann_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2)
{
    if (rho1.dimension() != rho2.dimension()) {
        throw DomainError("density matrices differ in dimension");
    }
    // The singular values of sqrt(rho2) sqrt(rho1) are the square roots of the
    // eigenvalues of sqrt(rho1) rho2 sqrt(rho1); the SVD resolves small ones to
    // absolute rather than relative-to-square-root accuracy.
    const ComplexMatrix a = psd_sqrt(rho2) * psd_sqrt(rho1);
    Eigen::BDCSVD<ComplexMatrix> svd(a);
    const double root = clamp_unit(svd.singularValues().sum(), "root fidelity");
    return root * root;
}

double bures_angle(const DensityMatrix& rho1, const DensityMatrix& rho2)
{
    return std::acos(std::sqrt(uhlmann_fidelity(rho1, rho2)));
}

double bures_from_rate(double lambda, int system_size)
{
    if (!(lambda >= 0.0)) {
        throw DomainError("rate function must be >= 0");
    }
    if (system_size < 1) {
        throw DomainError("system size must be >= 1");
    }
    // arccos e^{-y} = 2 asin(sqrt((1 - e^{-y})/2))
    return 2.0 * std::asin(std::sqrt(-0.5 * std::expm1(-0.5 * system_size * lambda)));
}

ThermalFidelity::ThermalFidelity(const LMGParams& initial, const LMGParams& final_params, double beta)
{
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw DomainError("beta must be finite and >= 0");
    }
    const RealBlock b0[2] = {solve_block(initial, 1), solve_block(initial, -1)};
    const double e_min = std::min(b0[0].energies.minCoeff(), b0[1].energies.minCoeff());
    double z = 0.0;
    for (const auto& b : b0) {
        z += (-beta * (b.energies.array() - e_min)).exp().sum();
    }
    const double p_max = 1.0 / z;

    for (int i = 0; i < 2; ++i) {
        const int parity = i == 0 ? 1 : -1;
        const RealBlock bf = solve_block(final_params, parity);
        std::vector<Eigen::Index> kept;
        for (Eigen::Index k = 0; k < b0[i].energies.size(); ++k) {
            const double p = std::exp(-beta * (b0[i].energies(k) - e_min)) / z;
            if (p >= kWeightCutoff * p_max) {
                kept.push_back(k);
            }
        }
        if (kept.empty()) {
            continue;
        }
        Eigen::MatrixXd scaled(b0[i].vectors.rows(), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t c = 0; c < kept.size(); ++c) {
            const double p = std::exp(-beta * (b0[i].energies(kept[c]) - e_min)) / z;
            scaled.col(static_cast<Eigen::Index>(c)) = std::sqrt(p) * b0[i].vectors.col(kept[c]);
        }
        blocks_.push_back(Block{bf.energies, bf.vectors.transpose() * scaled});
        retained_ += static_cast<int>(kept.size());
    }
}

double ThermalFidelity::root_fidelity(double t) const
{
    // sqrt F = || sqrt(rho0) U_t sqrt(rho0) ||_1, block by block.
    double root = 0.0;
    for (const auto& b : blocks_) {
        ComplexVector phase(b.energies.size());
        for (Eigen::Index k = 0; k < phase.size(); ++k) {
            phase(k) = std::polar(1.0, -b.energies(k) * t);
        }
        const ComplexMatrix s = b.overlaps.cast<std::complex<double>>();
        const ComplexMatrix m = s.transpose() * (phase.asDiagonal() * s);
        Eigen::BDCSVD<ComplexMatrix> svd(m);
        root += svd.singularValues().sum();
    }
    return clamp_unit(root, "root fidelity");
}

BuresSeries bures_series(const QuenchSpec& quench, AngleReference reference, unsigned workers,
                         const precise::PreciseGroundManifold* manifold)
{
    quench.validate();
    if (quench.beta) {
        return thermal_series(quench, reference, workers);
    }
    if (reference == AngleReference::equilibrium) {
        throw DomainError("the equilibrium reference needs a thermal initial state (set beta)");
    }
    return bures_series(loschmidt_series(quench, manifold));
}

BuresSeries bures_series(const LoschmidtResult& loschmidt)
{
    BuresSeries out;
    out.times = loschmidt.times;
    out.angle = loschmidt.overlap_angle;
    out.log_complement = loschmidt.log_overlap_complement;
    out.protocol = Protocol::pure;
    out.reference = AngleReference::initial;
    return out;
}

std::vector<double> direct_wootters_series(const QuenchSpec& quench)
{
    quench.validate();
    const auto parity = parity_operator(quench.params_initial.j);
    const auto spec0 = diagonalize_parity_resolved(build_lmg_hamiltonian(quench.params_initial), parity);
    const ComplexVector psi0 = initial_pure_state(ground_manifold(spec0, parity), quench.initial_state);
    const auto spec_f = diagonalize(build_lmg_hamiltonian(quench.params_final));
    std::vector<double> out(quench.grid.size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = wootters_distance(psi0, evolve_pure(spec_f, psi0, quench.grid.time(n)));
    }
    return out;
}

} // namespace dqpt
