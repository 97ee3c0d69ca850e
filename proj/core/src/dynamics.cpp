#include "dqpt/dynamics.hpp"

#include "dqpt/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dqpt {
namespace {

constexpr double kEchoFloor = 1e-300;

void require_normalized(const ComplexVector& psi, const char* what)
{
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << what << " is not normalized (norm = " << norm << ")";
        throw DomainError(msg.str());
    }
}

ComplexVector phases(const RealVector& energies, double t)
{
    ComplexVector out(energies.size());
    for (Eigen::Index k = 0; k < energies.size(); ++k) {
        out(k) = std::polar(1.0, -energies(k) * t);
    }
    return out;
}

} // namespace

TimeGrid TimeGrid::from_horizon(double t_max, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt) || !(t_max >= 0.0) || !std::isfinite(t_max)) {
        throw DomainError("time grid needs dt > 0 and t_max >= 0");
    }
    const double ratio = t_max / dt;
    const double nearest = std::round(ratio);
    const double steps = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest : std::ceil(ratio);
    if (steps > 1e9) {
        throw DomainError("time grid has more than 1e9 points");
    }
    return TimeGrid{dt, static_cast<std::size_t>(steps)};
}

std::vector<double> TimeGrid::times() const
{
    std::vector<double> out(size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = time(n);
    }
    return out;
}

void TimeGrid::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("time step must be positive and finite");
    }
}

std::string to_string(InitialState s)
{
    switch (s) {
    case InitialState::symmetry_broken:
        return "symmetry-broken";
    case InitialState::parity_even:
        return "parity-even";
    }
    return "unknown";
}

InitialState initial_state_from_string(const std::string& name)
{
    if (name == "symmetry-broken") {
        return InitialState::symmetry_broken;
    }
    if (name == "parity-even") {
        return InitialState::parity_even;
    }
    throw DomainError("unknown initial state '" + name + "' (expected symmetry-broken or parity-even)");
}

void QuenchSpec::validate() const
{
    params_initial.validate();
    params_final.validate();
    if (params_initial.j != params_final.j || params_initial.gamma != params_final.gamma ||
        params_initial.g != params_final.g) {
        throw DomainError("initial and final parameters may differ only in h");
    }
    if (beta && (!(*beta >= 0.0) || !std::isfinite(*beta))) {
        throw DomainError("beta must be finite and >= 0");
    }
    grid.validate();
}

TimeSeries::TimeSeries(std::vector<double> t, std::vector<double> v, std::string l)
    : times(std::move(t)), values(std::move(v)), label(std::move(l))
{
    if (times.size() != values.size()) {
        throw DomainError("time series '" + label + "' has mismatched lengths");
    }
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (!std::isfinite(values[n])) {
            std::ostringstream msg;
            msg << "time series '" << label << "' has a non-finite value at t = " << times[n];
            throw NumericalFault(msg.str());
        }
    }
}

ComplexVector evolve_pure(const SpectralDecomposition& spec_final, const ComplexVector& psi0, double t)
{
    if (psi0.size() != spec_final.dimension()) {
        throw DomainError("state and Hamiltonian differ in dimension");
    }
    require_normalized(psi0, "initial state");
    if (t == 0.0) {
        return psi0;
    }
    const ComplexVector coords = spec_final.eigenvectors.adjoint() * psi0;
    return spec_final.eigenvectors * phases(spec_final.eigenvalues, t).cwiseProduct(coords);
}

DensityMatrix evolve_density(const SpectralDecomposition& spec_final, const DensityMatrix& rho0, double t)
{
    if (rho0.dimension() != spec_final.dimension()) {
        throw DomainError("density matrix and Hamiltonian differ in dimension");
    }
    if (t == 0.0) {
        return rho0;
    }
    const auto& v = spec_final.eigenvectors;
    const ComplexMatrix u = v * phases(spec_final.eigenvalues, t).asDiagonal() * v.adjoint();
    return DensityMatrix::from_trusted(u * rho0.matrix() * u.adjoint());
}

ComplexVector initial_pure_state(const GroundManifold& manifold, InitialState which)
{
    switch (which) {
    case InitialState::symmetry_broken:
        return manifold.symmetry_broken_state();
    case InitialState::parity_even:
        return manifold.sector(1).vector;
    }
    throw DomainError("unknown initial state");
}

precise::PreciseGroundManifold initial_manifold(const QuenchSpec& quench)
{
    quench.validate();
    const auto bits = precise::precision_for_system_size(quench.params_initial.j.system_size());
    return precise::PreciseGroundManifold::compute(quench.params_initial, bits);
}

LoschmidtResult loschmidt_series(const QuenchSpec& quench, const precise::PreciseGroundManifold* manifold)
{
    quench.validate();
    if (quench.beta) {
        throw DomainError("the Loschmidt series is defined for the pure protocol; drop beta");
    }
    std::optional<precise::PreciseGroundManifold> own;
    if (manifold == nullptr) {
        own = initial_manifold(quench);
        manifold = &*own;
    } else if (!(manifold->params == quench.params_initial)) {
        throw DomainError("cached ground manifold was built for different parameters");
    }
    const mpfr_prec_t bits = manifold->bits;
    const int n_sys = quench.params_initial.j.system_size();
    const bool broken = quench.initial_state == InitialState::symmetry_broken;

    std::vector<precise::SpectralWeights> blocks;
    blocks.push_back(precise::spectral_weights(precise::lmg_parity_block(quench.params_final, 1, bits), manifold->even));
    if (broken) {
        blocks.push_back(
            precise::spectral_weights(precise::lmg_parity_block(quench.params_final, -1, bits), manifold->odd));
    }

    LoschmidtResult out;
    out.system_size = n_sys;
    out.precision_bits = static_cast<long>(bits);
    out.times = quench.grid.times();
    out.sector_labels = broken ? std::vector<std::string>{"+x", "-x"} : std::vector<std::string>{"even"};
    const std::size_t n_sectors = out.sector_labels.size();
    const std::size_t size = quench.grid.size();
    out.amplitude.resize(size);
    out.log_amplitude.resize(size);
    out.echo.resize(size);
    out.rate.resize(size);
    out.echo_rate.resize(size);
    out.sector_rates.assign(n_sectors, std::vector<double>(size));
    out.active_sector.resize(size);
    out.overlap_angle.resize(size);
    out.log_overlap_complement.resize(size);
    out.echo_underflow.resize(size);

    // Amplitudes below 2^-(bits-64) are not resolved at this precision.
    const double log_floor = -static_cast<double>(bits - 64) * std::numbers::ln2;
    const double rate_scale = 2.0 / n_sys;

    mp::Real re(bits), im(bits), mag(bits);
    precise::evaluate_return_amplitudes(
        blocks, quench.grid.dt, quench.grid.steps, [&](std::size_t n, auto block_re, auto block_im) {
            for (std::size_t s = 0; s < n_sectors; ++s) {
                double log_abs = 0.0;
                if (n == 0) {
                    // Exact: the state overlaps only with its own sector.
                    log_abs = s == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
                    mpfr_set_ui(re.get(), s == 0 ? 1 : 0, MPFR_RNDN);
                    mpfr_set_zero(im.get(), 1);
                } else {
                    if (broken) {
                        // A_+- = (G_even +- G_odd)/2
                        if (s == 0) {
                            mpfr_add(re.get(), block_re[0].get(), block_re[1].get(), MPFR_RNDN);
                            mpfr_add(im.get(), block_im[0].get(), block_im[1].get(), MPFR_RNDN);
                        } else {
                            mpfr_sub(re.get(), block_re[0].get(), block_re[1].get(), MPFR_RNDN);
                            mpfr_sub(im.get(), block_im[0].get(), block_im[1].get(), MPFR_RNDN);
                        }
                        mpfr_div_2ui(re.get(), re.get(), 1, MPFR_RNDN);
                        mpfr_div_2ui(im.get(), im.get(), 1, MPFR_RNDN);
                    } else {
                        mpfr_set(re.get(), block_re[0].get(), MPFR_RNDN);
                        mpfr_set(im.get(), block_im[0].get(), MPFR_RNDN);
                    }
                    mpfr_hypot(mag.get(), re.get(), im.get(), MPFR_RNDN);
                    log_abs = mp::log_abs(mag.get());
                }
                if (log_abs < log_floor) {
                    ++out.below_resolution;
                    log_abs = log_floor;
                }
                log_abs = std::min(log_abs, 0.0);
                out.sector_rates[s][n] = -rate_scale * log_abs;
                if (s == 0) {
                    out.log_amplitude[n] = log_abs;
                    out.amplitude[n] = {mpfr_get_d(re.get(), MPFR_RNDN), mpfr_get_d(im.get(), MPFR_RNDN)};
                }
            }
        });

    for (std::size_t n = 0; n < size; ++n) {
        std::size_t best = 0;
        for (std::size_t s = 1; s < n_sectors; ++s) {
            if (out.sector_rates[s][n] < out.sector_rates[best][n]) {
                best = s;
            }
        }
        out.active_sector[n] = static_cast<int>(best);
        out.rate[n] = out.sector_rates[best][n];
        out.echo_rate[n] = out.sector_rates[0][n];

        double echo = std::norm(out.amplitude[n]);
        out.echo_underflow[n] = echo < kEchoFloor;
        out.echo[n] = std::min(1.0, std::max(echo, kEchoFloor));

        const double log_a = out.log_amplitude[n];
        const double a = std::min(1.0, std::exp(log_a));
        // arccos a = 2 asin(sqrt((1 - a)/2)), which stays accurate for a near 1.
        out.overlap_angle[n] = 2.0 * std::asin(std::sqrt(-0.5 * std::expm1(log_a)));
        // asin(a) = a (1 + a^2/6 + ...), so for small a its log is log_a to double precision.
        out.log_overlap_complement[n] = a < 1e-8 ? log_a : std::log(std::asin(a));
    }
    return out;
}

std::vector<double> detect_critical_times(const LoschmidtResult& result)
{
    std::vector<double> out;
    if (result.sector_rates.size() < 2) {
        return out;
    }
    for (std::size_t n = 1; n < result.active_sector.size(); ++n) {
        const int a = result.active_sector[n - 1];
        const int b = result.active_sector[n];
        if (a == b) {
            continue;
        }
        const auto& ra = result.sector_rates[static_cast<std::size_t>(a)];
        const auto& rb = result.sector_rates[static_cast<std::size_t>(b)];
        const double f0 = ra[n - 1] - rb[n - 1];
        const double f1 = ra[n] - rb[n];
        const double t0 = result.times[n - 1];
        const double t1 = result.times[n];
        const double frac = f0 == f1 ? 1.0 : std::clamp(f0 / (f0 - f1), 0.0, 1.0);
        out.push_back(t0 + frac * (t1 - t0));
    }
    return out;
}

} // namespace dqpt
