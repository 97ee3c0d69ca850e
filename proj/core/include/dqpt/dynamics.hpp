#pragma once

#include "dqpt/precise_spectrum.hpp"
#include "dqpt/spectral.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dqpt {

/// Uniform grid t_n = n dt, n = 0..steps.
struct TimeGrid {
    double dt = 0.01;
    std::size_t steps = 1000;

    /// Smallest grid with dt spacing that reaches t_max (to within 1e-9 dt).
    [[nodiscard]] static TimeGrid from_horizon(double t_max, double dt);

    [[nodiscard]] std::size_t size() const noexcept { return steps + 1; }
    [[nodiscard]] double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt; }
    [[nodiscard]] double t_max() const noexcept { return time(steps); }
    [[nodiscard]] std::vector<double> times() const;
    void validate() const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Pure initial state drawn from the ground manifold of H(h0).
enum class InitialState {
    /// (|even> + |odd>)/sqrt(2), polarized along +x.
    symmetry_broken,
    /// The parity-even ground state alone.
    parity_even,
};

[[nodiscard]] std::string to_string(InitialState s);
/// Throws DomainError for unknown names.
[[nodiscard]] InitialState initial_state_from_string(const std::string& name);

struct QuenchSpec {
    LMGParams params_initial;
    LMGParams params_final;
    /// Thermal initial state exp(-beta H0)/Z if set, otherwise a pure ground state.
    std::optional<double> beta;
    TimeGrid grid;
    InitialState initial_state = InitialState::symmetry_broken;

    /// Throws DomainError unless the two parameter sets differ only in h and
    /// the grid and beta are valid.
    void validate() const;
};

/// Samples of one observable on a TimeGrid. Construction rejects NaN/Inf.
struct TimeSeries {
    TimeSeries(std::vector<double> times, std::vector<double> values, std::string label);

    std::vector<double> times;
    std::vector<double> values;
    std::string label;
};

struct LoschmidtResult {
    std::vector<double> times;
    /// <psi0|psi_t>; may underflow to zero in double (see log_amplitude).
    std::vector<std::complex<double>> amplitude;
    /// ln |<psi0|psi_t>|, computed at extended precision.
    std::vector<double> log_amplitude;
    /// |<psi0|psi_t>|^2, floored at 1e-300.
    std::vector<double> echo;
    /// min over sectors of sector_rates.
    std::vector<double> rate;
    /// -(1/N) ln of the echo, the initial state's own sector rate.
    std::vector<double> echo_rate;
    /// One rate series per ground-manifold state; sector 0 is the initial state.
    std::vector<std::vector<double>> sector_rates;
    std::vector<std::string> sector_labels;
    /// Index of the sector attaining the minimum (lowest index on ties).
    std::vector<int> active_sector;
    /// Overlap angle arccos|G| and ln(pi/2 - arccos|G|) = ln asin|G|. The
    /// latter keeps the distance to pi/2 accurate when |G| is tiny.
    std::vector<double> overlap_angle;
    std::vector<double> log_overlap_complement;
    /// True where the echo fell below 1e-300 and was floored.
    std::vector<bool> echo_underflow;
    /// Count of sector amplitudes below the working-precision resolution; their
    /// rates are capped at the resolution limit.
    std::size_t below_resolution = 0;
    int system_size = 0;
    long precision_bits = 0;
};

/// V e^{-iEt} V^dagger psi0.
[[nodiscard]] ComplexVector evolve_pure(const SpectralDecomposition& spec_final, const ComplexVector& psi0, double t);

/// U_t rho0 U_t^dagger with U_t = V e^{-iEt} V^dagger.
[[nodiscard]] DensityMatrix evolve_density(const SpectralDecomposition& spec_final, const DensityMatrix& rho0, double t);

/// Pure initial state in double precision, consistent with the phase convention
/// of ground_manifold().
[[nodiscard]] ComplexVector initial_pure_state(const GroundManifold& manifold, InitialState which);

/// Ground manifold of quench.params_initial at the precision loschmidt_series
/// uses; sweeps build it once and pass it in.
[[nodiscard]] precise::PreciseGroundManifold initial_manifold(const QuenchSpec& quench);

/// Pure-protocol Loschmidt amplitude, echo and sector rates. The optional
/// manifold must come from initial_manifold() for the same quench parameters.
[[nodiscard]] LoschmidtResult loschmidt_series(const QuenchSpec& quench,
                                               const precise::PreciseGroundManifold* manifold = nullptr);

/// Times at which active_sector switches, refined by linear interpolation of
/// the difference of the two sector rates involved.
[[nodiscard]] std::vector<double> detect_critical_times(const LoschmidtResult& result);

} // namespace dqpt
