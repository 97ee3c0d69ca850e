#pragma once

#include "dqpt/entropy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dqpt {

enum class Mode { echo, bures, entropy_bound, s_curve, sweep };

[[nodiscard]] std::string to_string(Mode m);
/// Accepts the CLI spellings: echo, bures, entropy-bound, s-curve, sweep.
[[nodiscard]] Mode mode_from_string(const std::string& name);

struct ExperimentConfig {
    Mode mode = Mode::echo;
    std::vector<SpinQuantumNumber> j_grid;
    double gamma = 0.5;
    double g = 1.0;
    double h0 = 0.0;
    /// Final fields. Series modes run one series per entry.
    std::vector<double> h_grid;
    /// Empty: pure protocol. Otherwise one thermal run per entry.
    std::vector<double> beta_grid;
    /// Unset means 0.01 for pure series and 0.05 for thermal series and sweeps.
    std::optional<double> dt;
    double t_max = 10.0;
    double T_average = 1000.0;
    std::string output_path;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    InitialState initial_state = InitialState::symmetry_broken;
    AngleReference reference = AngleReference::initial;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Mode-dependent defaults: j = 300 and h = 0.8 for series modes; for sweeps
/// j in {100, 200, 500} and 101 fields on [0, 1].
[[nodiscard]] ExperimentConfig default_config(Mode mode);

/// Fills unset fields with defaults and validates. Throws DomainError.
[[nodiscard]] ExperimentConfig resolve(ExperimentConfig config);

/// Overlays the keys of a JSON object on `base`. Scalar aliases j, h and beta
/// are accepted for the grid fields. Unknown keys are rejected.
[[nodiscard]] ExperimentConfig apply_config_json(std::string_view json_text, ExperimentConfig base);

/// Canonical JSON (sorted keys, grids as arrays).
[[nodiscard]] std::string config_to_json(const ExperimentConfig& config);

/// FNV-1a 64 hash of the canonical JSON without output_path and workers,
/// which cannot change results; 16 hex digits.
[[nodiscard]] std::string config_fingerprint(const ExperimentConfig& config);

/// "a:b:steps" -> steps + 1 evenly spaced values from a to b.
[[nodiscard]] std::vector<double> parse_grid(std::string_view spec);

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] std::string format_number(double value);

/// Runs every (j, beta, h) tuple of a resolved sweep config on the worker pool.
[[nodiscard]] SweepResult run_sweep_parallel(const ExperimentConfig& config);

struct ExperimentOutput {
    std::string csv;
    std::string metadata;
};

/// Computes the CSV and JSON sidecar contents for a config.
[[nodiscard]] ExperimentOutput render_experiment(const ExperimentConfig& config);

/// Renders and writes config.output_path and <output_path>.meta.json. Both
/// files appear only if everything succeeded.
void run_experiment(const ExperimentConfig& config);

[[nodiscard]] const char* library_version() noexcept;

} // namespace dqpt
