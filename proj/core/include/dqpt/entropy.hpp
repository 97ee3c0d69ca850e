#pragma once

#include "dqpt/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dqpt {

/// Relative entropy of the two-outcome distributions (p, 1-p) and (q, 1-q).
/// Throws DomainError if it diverges (q in {0, 1} with p != q).
[[nodiscard]] double binary_kl(double p, double q);

/// S((r-x, 1-r+x) || (r, 1-r)), the function minimized by s(x).
[[nodiscard]] double kl_objective(double x, double r);

struct BoundEvaluation {
    double x = 0.0;
    double s = 0.0;
    double minimizer_r = 0.0;
    /// 2 x^2
    double lower = 0.0;
    /// -ln(1 - x)
    double upper = 0.0;
};

/// s(x) = min over x < r < 1 of kl_objective(x, r), for 0 <= x < 1.
[[nodiscard]] BoundEvaluation s_of_x(double x);

/// s evaluated at x = 1 - exp(log_delta). Accurate when 1 - x is far below
/// double resolution; log_delta must be <= 0.
[[nodiscard]] BoundEvaluation s_of_log_complement(double log_delta);

/// Lower bound on the entropy production along a Bures-angle series.
struct EntropyProductionSeries {
    std::vector<double> times;
    /// s(2 L(t) / pi)
    std::vector<double> sigma_lower;
    /// Trapezoidal mean of sigma_lower over [0, horizon_T].
    double time_average = 0.0;
    double horizon_T = 0.0;
};

[[nodiscard]] EntropyProductionSeries entropy_bound_series(const BuresSeries& bures);

/// Trapezoidal mean of uniformly sampled values.
[[nodiscard]] double trapezoid_mean(const std::vector<double>& values);

struct SweepRow {
    double h = 0.0;
    SpinQuantumNumber j{1};
    std::optional<double> beta;
    double value = 0.0;
    std::string quantity;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
    /// Sorted by (j, beta, h); rows without beta sort first.
    std::vector<SweepRow> rows;
    std::string config_fingerprint;
};

/// Sorts rows by (j, beta, h).
void sort_rows(std::vector<SweepRow>& rows);

inline constexpr const char* kTimeAveragedBound = "time_averaged_entropy_bound";

/// Time-averaged entropy bound over [0, T] for every final field in h_grid,
/// with everything else taken from `base` (its grid supplies dt). For the pure
/// protocol an optional cached ground manifold of base.params_initial is used.
[[nodiscard]] SweepResult time_averaged_entropy_vs_h(const std::vector<double>& h_grid, const QuenchSpec& base,
                                                     double T, unsigned workers = 1,
                                                     const precise::PreciseGroundManifold* manifold = nullptr);

struct SCurvePoint {
    double x;
    double s;
    double lower;
    double upper;
};

/// s(x) with its two bounds on `points` evenly spaced x in [0, x_max].
[[nodiscard]] std::vector<SCurvePoint> s_curve(std::size_t points = 1000, double x_max = 0.99);

} // namespace dqpt
