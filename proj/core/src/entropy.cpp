#include "dqpt/entropy.hpp"

#include "dqpt/error.hpp"
#include "dqpt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

namespace dqpt {
namespace {

constexpr int kScanPoints = 64;
constexpr double kEdge = 1e-14;
constexpr double kTolerance = 1e-11;

double xlogy_ratio(double a, double b)
{
    return a == 0.0 ? 0.0 : a * std::log(a / b);
}

// The objective with r = x + u (1 - x), written in terms of delta = 1 - x and
// its log so that nothing cancels when delta is tiny:
//   P = (u delta, 1 - u delta),  Q = (1 - (1-u) delta, (1-u) delta).
double objective(double u, double delta, double log_delta)
{
    const double ud = u * delta;
    const double log_r = std::log1p(-(1.0 - u) * delta);
    const double first = ud == 0.0 ? 0.0 : ud * (std::log(u) + log_delta - log_r);
    const double second = (1.0 - ud) * (std::log1p(-ud) - std::log1p(-u) - log_delta);
    return first + second;
}

} // namespace

double binary_kl(double p, double q)
{
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
        throw DomainError("binary_kl needs p, q in [0, 1]");
    }
    if (p == q) {
        return 0.0;
    }
    if (q == 0.0 || q == 1.0) {
        std::ostringstream msg;
        msg << "binary_kl diverges for p = " << p << ", q = " << q;
        throw DomainError(msg.str());
    }
    return std::max(0.0, xlogy_ratio(p, q) + xlogy_ratio(1.0 - p, 1.0 - q));
}

double kl_objective(double x, double r)
{
    return binary_kl(r - x, r);
}

BoundEvaluation s_of_log_complement(double log_delta)
{
    if (!(log_delta <= 0.0)) {
        throw DomainError("s(x) needs 0 <= x < 1");
    }
    if (std::isinf(log_delta)) {
        throw DomainError("s(x) needs x < 1");
    }
    BoundEvaluation out;
    out.x = -std::expm1(log_delta);
    out.lower = 2.0 * out.x * out.x;
    out.upper = -log_delta;
    if (log_delta == 0.0) {
        out.minimizer_r = 0.5;
        return out;
    }
    const double delta = std::exp(log_delta);
    auto g = [&](double u) { return objective(u, delta, log_delta); };

    // Coarse scan for the global minimum, then golden section on its bracket.
    const double lo = kEdge;
    const double hi = 1.0 - kEdge;
    int best = 0;
    double best_value = g(lo);
    for (int i = 1; i < kScanPoints; ++i) {
        const double value = g(lo + (hi - lo) * i / (kScanPoints - 1));
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best - 1) / (kScanPoints - 1);
    double b = lo + (hi - lo) * std::min(kScanPoints - 1, best + 1) / (kScanPoints - 1);
    double best_u = lo + (hi - lo) * best / (kScanPoints - 1);

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = g(c);
    double gd = g(d);
    while (b - a > kTolerance) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    const double mid = 0.5 * (a + b);
    const double g_mid = g(mid);
    if (g_mid <= best_value) {
        best_value = g_mid;
        best_u = mid;
    }
    // As r -> x the objective tends to -ln(1 - x), so the infimum never exceeds it.
    out.s = std::clamp(best_value, 0.0, out.upper);
    out.minimizer_r = out.x + best_u * delta;
    return out;
}

BoundEvaluation s_of_x(double x)
{
    if (!(x >= 0.0) || !(x < 1.0)) {
        throw DomainError("s(x) needs 0 <= x < 1");
    }
    auto out = s_of_log_complement(std::log1p(-x));
    out.x = x;
    out.lower = 2.0 * x * x;
    return out;
}

double trapezoid_mean(const std::vector<double>& values)
{
    if (values.empty()) {
        throw DomainError("cannot average an empty series");
    }
    if (values.size() == 1) {
        return values.front();
    }
    double sum = 0.0;
    for (std::size_t n = 1; n + 1 < values.size(); ++n) {
        sum += values[n];
    }
    sum += 0.5 * (values.front() + values.back());
    return sum / static_cast<double>(values.size() - 1);
}

EntropyProductionSeries entropy_bound_series(const BuresSeries& bures)
{
    if (bures.times.empty() || bures.angle.size() != bures.times.size()) {
        throw DomainError("Bures series is empty or malformed");
    }
    const bool have_complement = bures.log_complement.size() == bures.angle.size();
    const double log_two_over_pi = std::log(2.0 / std::numbers::pi);

    EntropyProductionSeries out;
    out.times = bures.times;
    out.sigma_lower.resize(bures.angle.size());
    for (std::size_t n = 0; n < bures.angle.size(); ++n) {
        const double angle = bures.angle[n];
        if (!(angle >= 0.0) || angle > std::numbers::pi / 2 + 1e-12) {
            std::ostringstream msg;
            msg << "Bures angle " << angle << " at t = " << bures.times[n] << " is outside [0, pi/2]";
            throw NumericalFault(msg.str());
        }
        const double x = std::min(1.0, 2.0 * angle / std::numbers::pi);
        // 1 - x = (2/pi)(pi/2 - angle); the stored complement keeps it exact near x = 1.
        const double log_delta =
            have_complement && x > 0.5 ? std::min(0.0, bures.log_complement[n] + log_two_over_pi) : std::log1p(-x);
        out.sigma_lower[n] = s_of_log_complement(log_delta).s;
    }
    out.time_average = trapezoid_mean(out.sigma_lower);
    out.horizon_T = bures.times.back();
    return out;
}

void sort_rows(std::vector<SweepRow>& rows)
{
    auto key = [](const SweepRow& r) {
        return std::make_tuple(r.j.twice_j(), r.beta.has_value(), r.beta.value_or(0.0), r.h);
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const SweepRow& a, const SweepRow& b) { return key(a) < key(b); });
}

SweepResult time_averaged_entropy_vs_h(const std::vector<double>& h_grid, const QuenchSpec& base, double T,
                                       unsigned workers, const precise::PreciseGroundManifold* manifold)
{
    if (h_grid.empty()) {
        throw DomainError("h grid is empty");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw DomainError("averaging horizon T must be positive");
    }
    base.validate();
    const TimeGrid grid = TimeGrid::from_horizon(T, base.grid.dt);

    std::optional<precise::PreciseGroundManifold> own;
    if (!base.beta && manifold == nullptr) {
        own = initial_manifold(base);
        manifold = &*own;
    }

    const auto values = parallel_map(h_grid.size(), workers, [&](std::size_t i) {
        QuenchSpec quench = base;
        quench.params_final.h = h_grid[i];
        quench.grid = grid;
        return entropy_bound_series(bures_series(quench, AngleReference::initial, 1, manifold)).time_average;
    });

    SweepResult out;
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        out.rows.push_back(SweepRow{h_grid[i], base.params_initial.j, base.beta, values[i], kTimeAveragedBound});
    }
    sort_rows(out.rows);
    return out;
}

std::vector<SCurvePoint> s_curve(std::size_t points, double x_max)
{
    if (points < 2 || !(x_max >= 0.0) || !(x_max < 1.0)) {
        throw DomainError("s curve needs at least two points and 0 <= x_max < 1");
    }
    std::vector<SCurvePoint> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double x = x_max * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto e = s_of_x(x);
        out.push_back(SCurvePoint{e.x, e.s, e.lower, e.upper});
    }
    return out;
}

} // namespace dqpt
