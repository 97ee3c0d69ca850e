#include "dqpt/precise_spectrum.hpp"

#include "dqpt/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>

namespace dqpt::precise {
namespace {

using mp::Real;
using mp::Vector;

constexpr int kMaxRayleighIterations = 16;
constexpr int kMaxSubspaceIterations = 400;
// Guesses closer than this (relative to the Gershgorin bound) are refined together.
constexpr double kClusterTolerance = 1e-7;

// Scratch space for one shifted tridiagonal solve.
struct Workspace {
    Workspace(std::size_t n, mpfr_prec_t bits)
        : d(mp::make_vector(n, bits)), du(mp::make_vector(n, bits)), dl(mp::make_vector(n, bits)),
          fact(bits), temp(bits), tiny(bits), rho(bits), res(bits), acc(bits), y(mp::make_vector(n, bits))
    {
    }
    Vector d, du, dl;
    Real fact, temp, tiny, rho, res, acc;
    Vector y;
};

void guard_pivot(mpfr_ptr pivot, const Workspace& ws)
{
    if (mpfr_cmpabs(pivot, ws.tiny.get()) < 0) {
        mpfr_set(pivot, ws.tiny.get(), MPFR_RNDN);
    }
}

// Solves (T - mu I) out = rhs by Gaussian elimination with partial pivoting
// (the LAPACK gtsv scheme). Exactly singular pivots are replaced by a tiny
// value, as inverse iteration expects.
void solve_shifted(const SymmetricTridiagonal& t, mpfr_srcptr mu, const Vector& rhs, Workspace& ws, Vector& out)
{
    const std::size_t n = t.size();
    auto& d = ws.d;
    auto& du = ws.du;
    auto& dl = ws.dl;
    for (std::size_t i = 0; i < n; ++i) {
        mpfr_sub(d[i].get(), t.diag[i].get(), mu, MPFR_RNDN);
        mpfr_set(out[i].get(), rhs[i].get(), MPFR_RNDN);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        mpfr_set(du[i].get(), t.off[i].get(), MPFR_RNDN);
        mpfr_set(dl[i].get(), t.off[i].get(), MPFR_RNDN);
    }
    auto* fact = ws.fact.get();
    auto* temp = ws.temp.get();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (mpfr_cmpabs(d[i].get(), dl[i].get()) >= 0) {
            guard_pivot(d[i].get(), ws);
            mpfr_div(fact, dl[i].get(), d[i].get(), MPFR_RNDN);
            mpfr_mul(temp, fact, du[i].get(), MPFR_RNDN);
            mpfr_sub(d[i + 1].get(), d[i + 1].get(), temp, MPFR_RNDN);
            mpfr_mul(temp, fact, out[i].get(), MPFR_RNDN);
            mpfr_sub(out[i + 1].get(), out[i + 1].get(), temp, MPFR_RNDN);
            mpfr_set_zero(dl[i].get(), 1);
        } else {
            // Interchange rows i and i+1; dl[i] becomes the second superdiagonal.
            mpfr_div(fact, d[i].get(), dl[i].get(), MPFR_RNDN);
            mpfr_set(d[i].get(), dl[i].get(), MPFR_RNDN);
            mpfr_set(temp, d[i + 1].get(), MPFR_RNDN);
            mpfr_fms(d[i + 1].get(), fact, temp, du[i].get(), MPFR_RNDN);
            mpfr_neg(d[i + 1].get(), d[i + 1].get(), MPFR_RNDN);
            if (i + 2 < n) {
                mpfr_set(dl[i].get(), du[i + 1].get(), MPFR_RNDN);
                mpfr_mul(du[i + 1].get(), fact, dl[i].get(), MPFR_RNDN);
                mpfr_neg(du[i + 1].get(), du[i + 1].get(), MPFR_RNDN);
            } else {
                mpfr_set_zero(dl[i].get(), 1);
            }
            mpfr_set(du[i].get(), temp, MPFR_RNDN);
            mpfr_set(temp, out[i].get(), MPFR_RNDN);
            mpfr_set(out[i].get(), out[i + 1].get(), MPFR_RNDN);
            mpfr_fms(out[i + 1].get(), fact, out[i + 1].get(), temp, MPFR_RNDN);
            mpfr_neg(out[i + 1].get(), out[i + 1].get(), MPFR_RNDN);
        }
    }
    guard_pivot(d[n - 1].get(), ws);

    mpfr_div(out[n - 1].get(), out[n - 1].get(), d[n - 1].get(), MPFR_RNDN);
    if (n > 1) {
        mpfr_mul(temp, du[n - 2].get(), out[n - 1].get(), MPFR_RNDN);
        mpfr_sub(out[n - 2].get(), out[n - 2].get(), temp, MPFR_RNDN);
        mpfr_div(out[n - 2].get(), out[n - 2].get(), d[n - 2].get(), MPFR_RNDN);
    }
    for (std::size_t ii = n >= 2 ? n - 2 : 0; ii-- > 0;) {
        mpfr_mul(temp, du[ii].get(), out[ii + 1].get(), MPFR_RNDN);
        mpfr_sub(out[ii].get(), out[ii].get(), temp, MPFR_RNDN);
        mpfr_mul(temp, dl[ii].get(), out[ii + 2].get(), MPFR_RNDN);
        mpfr_sub(out[ii].get(), out[ii].get(), temp, MPFR_RNDN);
        mpfr_div(out[ii].get(), out[ii].get(), d[ii].get(), MPFR_RNDN);
    }
}

// out = T x
void apply(const SymmetricTridiagonal& t, const Vector& x, Vector& out)
{
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i) {
        mpfr_mul(out[i].get(), t.diag[i].get(), x[i].get(), MPFR_RNDN);
        if (i > 0) {
            mpfr_fma(out[i].get(), t.off[i - 1].get(), x[i - 1].get(), out[i].get(), MPFR_RNDN);
        }
        if (i + 1 < n) {
            mpfr_fma(out[i].get(), t.off[i].get(), x[i + 1].get(), out[i].get(), MPFR_RNDN);
        }
    }
}

// Sets ws.rho to the Rayleigh quotient of unit x and returns ||T x - rho x|| as a double.
double rayleigh_residual(const SymmetricTridiagonal& t, const Vector& x, Workspace& ws)
{
    apply(t, x, ws.y);
    mp::dot(ws.rho.get(), x, ws.y);
    mpfr_set_zero(ws.acc.get(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        mpfr_mul(ws.res.get(), ws.rho.get(), x[i].get(), MPFR_RNDN);
        mpfr_sub(ws.res.get(), ws.y[i].get(), ws.res.get(), MPFR_RNDN);
        mpfr_fma(ws.acc.get(), ws.res.get(), ws.res.get(), ws.acc.get(), MPFR_RNDN);
    }
    mpfr_sqrt(ws.acc.get(), ws.acc.get(), MPFR_RNDN);
    return mpfr_get_d(ws.acc.get(), MPFR_RNDN);
}

// Seeded pseudo-random start. At h = 0 the blocks are mirror-symmetric, and a
// patterned start can be orthogonal to every antisymmetric eigenvector.
Vector start_vector(std::size_t n, mpfr_prec_t bits, int seed)
{
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v = mp::make_vector(n, bits);
    for (std::size_t i = 0; i < n; ++i) {
        mpfr_set_d(v[i].get(), u(rng), MPFR_RNDN);
    }
    mp::normalize(v);
    return v;
}

double residual_tolerance(const SymmetricTridiagonal& t)
{
    return std::ldexp(std::max(1.0, t.norm_bound()), -static_cast<int>(t.bits) + 24);
}

std::vector<double> double_eigenvalues(const SymmetricTridiagonal& t)
{
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index i = 0; i < n; ++i) {
        diag(i) = t.diag[static_cast<std::size_t>(i)].to_double();
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        sub(i) = t.off[static_cast<std::size_t>(i)].to_double();
    }
    if (n == 1) {
        return {diag(0)};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalFault("tridiagonal eigensolver failed to converge");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Groups sorted guesses into runs whose consecutive gaps are below the cluster tolerance.
std::vector<std::pair<std::size_t, std::size_t>> clusters(const std::vector<double>& guesses, double scale)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= guesses.size(); ++i) {
        if (i == guesses.size() || guesses[i] - guesses[i - 1] > kClusterTolerance * scale) {
            out.emplace_back(begin, i);
            begin = i;
        }
    }
    return out;
}

Eigenpair refine_isolated(const SymmetricTridiagonal& t, double guess, double half_gap, Workspace& ws, int seed)
{
    const mpfr_prec_t bits = t.bits;
    Vector x = start_vector(t.size(), bits, seed);
    Vector y = mp::make_vector(t.size(), bits);
    Real mu(guess, bits);
    const double tol = residual_tolerance(t);
    for (int it = 0; it < kMaxRayleighIterations; ++it) {
        solve_shifted(t, mu.get(), x, ws, y);
        std::swap(x, y);
        if (!mp::normalize(x)) {
            throw NumericalFault("inverse iteration produced a zero vector");
        }
        const double residual = rayleigh_residual(t, x, ws);
        mpfr_set(mu.get(), ws.rho.get(), MPFR_RNDN);
        if (residual <= tol) {
            if (std::abs(mu.to_double() - guess) > half_gap) {
                std::ostringstream msg;
                msg << "Rayleigh quotient iteration drifted from eigenvalue guess " << guess << " to "
                    << mu.to_double();
                throw NumericalFault(msg.str());
            }
            return Eigenpair{std::move(mu), std::move(x)};
        }
    }
    std::ostringstream msg;
    msg << "Rayleigh quotient iteration did not converge near eigenvalue " << guess;
    throw NumericalFault(msg.str());
}

// Modified Gram-Schmidt, applied twice for stability.
void orthonormalize(std::vector<Vector>& basis, Real& scratch)
{
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t a = 0; a < basis.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) {
                mp::dot(scratch.get(), basis[a], basis[b]);
                for (std::size_t i = 0; i < basis[a].size(); ++i) {
                    mpfr_fms(basis[a][i].get(), scratch.get(), basis[b][i].get(), basis[a][i].get(), MPFR_RNDN);
                    mpfr_neg(basis[a][i].get(), basis[a][i].get(), MPFR_RNDN);
                }
            }
            if (!mp::normalize(basis[a])) {
                throw NumericalFault("subspace iteration collapsed to a rank-deficient basis");
            }
        }
    }
}

// Cyclic Jacobi diagonalization of a small symmetric matrix; returns the
// eigenvalues (ascending) and overwrites q with the eigenvectors as columns.
std::vector<Real> jacobi_eigen(std::vector<std::vector<Real>>& a, std::vector<std::vector<Real>>& q, mpfr_prec_t bits)
{
    const std::size_t s = a.size();
    q.assign(s, std::vector<Real>());
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t k = 0; k < s; ++k) {
            q[i].emplace_back(i == k ? 1.0 : 0.0, bits);
        }
    }
    Real theta(bits), tt(bits), c(bits), sn(bits), tmp(bits), x(bits), y(bits), off(bits), scale(bits);
    for (int sweep = 0; sweep < 100; ++sweep) {
        mpfr_set_zero(off.get(), 1);
        mpfr_set_zero(scale.get(), 1);
        for (std::size_t i = 0; i < s; ++i) {
            mpfr_fma(scale.get(), a[i][i].get(), a[i][i].get(), scale.get(), MPFR_RNDN);
            for (std::size_t k = i + 1; k < s; ++k) {
                mpfr_fma(off.get(), a[i][k].get(), a[i][k].get(), off.get(), MPFR_RNDN);
            }
        }
        mpfr_mul_2si(tmp.get(), scale.get(), -2 * static_cast<long>(bits), MPFR_RNDN);
        if (mpfr_lessequal_p(off.get(), tmp.get())) {
            break;
        }
        for (std::size_t p = 0; p < s; ++p) {
            for (std::size_t r = p + 1; r < s; ++r) {
                if (mpfr_zero_p(a[p][r].get())) {
                    continue;
                }
                // theta = (a_rr - a_pp) / (2 a_pr); t = sign(theta)/(|theta| + sqrt(theta^2+1))
                mpfr_sub(theta.get(), a[r][r].get(), a[p][p].get(), MPFR_RNDN);
                mpfr_div(theta.get(), theta.get(), a[p][r].get(), MPFR_RNDN);
                mpfr_div_2ui(theta.get(), theta.get(), 1, MPFR_RNDN);
                mpfr_set_ui(c.get(), 1, MPFR_RNDN);
                mpfr_hypot(tmp.get(), theta.get(), c.get(), MPFR_RNDN);
                mpfr_abs(tt.get(), theta.get(), MPFR_RNDN);
                mpfr_add(tt.get(), tt.get(), tmp.get(), MPFR_RNDN);
                mpfr_ui_div(tt.get(), 1, tt.get(), MPFR_RNDN);
                if (mpfr_sgn(theta.get()) < 0) {
                    mpfr_neg(tt.get(), tt.get(), MPFR_RNDN);
                }
                // c = 1/sqrt(t^2+1), s = t c
                mpfr_hypot(c.get(), tt.get(), c.get(), MPFR_RNDN);
                mpfr_ui_div(c.get(), 1, c.get(), MPFR_RNDN);
                mpfr_mul(sn.get(), tt.get(), c.get(), MPFR_RNDN);
                for (std::size_t k = 0; k < s; ++k) {
                    // columns p, r of a
                    mpfr_set(x.get(), a[k][p].get(), MPFR_RNDN);
                    mpfr_set(y.get(), a[k][r].get(), MPFR_RNDN);
                    mpfr_mul(a[k][p].get(), c.get(), x.get(), MPFR_RNDN);
                    mpfr_mul(tmp.get(), sn.get(), y.get(), MPFR_RNDN);
                    mpfr_sub(a[k][p].get(), a[k][p].get(), tmp.get(), MPFR_RNDN);
                    mpfr_mul(a[k][r].get(), sn.get(), x.get(), MPFR_RNDN);
                    mpfr_fma(a[k][r].get(), c.get(), y.get(), a[k][r].get(), MPFR_RNDN);
                }
                for (std::size_t k = 0; k < s; ++k) {
                    // rows p, r of a
                    mpfr_set(x.get(), a[p][k].get(), MPFR_RNDN);
                    mpfr_set(y.get(), a[r][k].get(), MPFR_RNDN);
                    mpfr_mul(a[p][k].get(), c.get(), x.get(), MPFR_RNDN);
                    mpfr_mul(tmp.get(), sn.get(), y.get(), MPFR_RNDN);
                    mpfr_sub(a[p][k].get(), a[p][k].get(), tmp.get(), MPFR_RNDN);
                    mpfr_mul(a[r][k].get(), sn.get(), x.get(), MPFR_RNDN);
                    mpfr_fma(a[r][k].get(), c.get(), y.get(), a[r][k].get(), MPFR_RNDN);
                }
                for (std::size_t k = 0; k < s; ++k) {
                    mpfr_set(x.get(), q[k][p].get(), MPFR_RNDN);
                    mpfr_set(y.get(), q[k][r].get(), MPFR_RNDN);
                    mpfr_mul(q[k][p].get(), c.get(), x.get(), MPFR_RNDN);
                    mpfr_mul(tmp.get(), sn.get(), y.get(), MPFR_RNDN);
                    mpfr_sub(q[k][p].get(), q[k][p].get(), tmp.get(), MPFR_RNDN);
                    mpfr_mul(q[k][r].get(), sn.get(), x.get(), MPFR_RNDN);
                    mpfr_fma(q[k][r].get(), c.get(), y.get(), q[k][r].get(), MPFR_RNDN);
                }
            }
        }
    }
    // Sort ascending, permuting eigenvector columns alongside.
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t u, std::size_t v) { return mpfr_less_p(a[u][u].get(), a[v][v].get()); });
    std::vector<Real> values;
    std::vector<std::vector<Real>> sorted(s);
    for (std::size_t i = 0; i < s; ++i) {
        values.push_back(a[order[i]][order[i]]);
        for (std::size_t k = 0; k < s; ++k) {
            sorted[k].push_back(q[k][order[i]]);
        }
    }
    q = std::move(sorted);
    return values;
}

std::vector<Eigenpair> refine_cluster(const SymmetricTridiagonal& t, const std::vector<double>& guesses, Workspace& ws)
{
    const mpfr_prec_t bits = t.bits;
    const std::size_t s = guesses.size();
    const std::size_t n = t.size();
    std::vector<Vector> basis;
    for (std::size_t c = 0; c < s; ++c) {
        basis.push_back(start_vector(n, bits, static_cast<int>(c) + 11));
    }
    Real mu(std::accumulate(guesses.begin(), guesses.end(), 0.0) / static_cast<double>(s), bits);
    Real scratch(bits);
    Vector y = mp::make_vector(n, bits);
    Vector ty = mp::make_vector(n, bits);
    const double tol = residual_tolerance(t);

    for (int it = 0; it < kMaxSubspaceIterations; ++it) {
        for (auto& v : basis) {
            solve_shifted(t, mu.get(), v, ws, y);
            std::swap(v, y);
        }
        orthonormalize(basis, scratch);

        // Rayleigh-Ritz on the current subspace.
        std::vector<std::vector<Real>> projected(s);
        for (std::size_t a = 0; a < s; ++a) {
            apply(t, basis[a], ty);
            for (std::size_t b = 0; b < s; ++b) {
                projected[b].emplace_back(bits);
            }
            for (std::size_t b = 0; b < s; ++b) {
                mp::dot(projected[b][a].get(), basis[b], ty);
            }
        }
        std::vector<std::vector<Real>> q;
        std::vector<Real> ritz = jacobi_eigen(projected, q, bits);
        std::vector<Vector> rotated;
        for (std::size_t c = 0; c < s; ++c) {
            Vector v = mp::make_vector(n, bits);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t b = 0; b < s; ++b) {
                    mpfr_fma(v[i].get(), basis[b][i].get(), q[b][c].get(), v[i].get(), MPFR_RNDN);
                }
            }
            mp::normalize(v);
            rotated.push_back(std::move(v));
        }
        basis = std::move(rotated);

        bool converged = true;
        mpfr_set_zero(mu.get(), 1);
        for (std::size_t c = 0; c < s; ++c) {
            if (rayleigh_residual(t, basis[c], ws) > tol) {
                converged = false;
            }
            mpfr_add(mu.get(), mu.get(), ritz[c].get(), MPFR_RNDN);
        }
        mpfr_div_ui(mu.get(), mu.get(), static_cast<unsigned long>(s), MPFR_RNDN);
        if (converged) {
            std::vector<Eigenpair> out;
            for (std::size_t c = 0; c < s; ++c) {
                out.push_back(Eigenpair{std::move(ritz[c]), std::move(basis[c])});
            }
            return out;
        }
    }
    std::ostringstream msg;
    msg << "subspace iteration did not converge for a cluster of " << s << " eigenvalues near " << guesses.front();
    throw NumericalFault(msg.str());
}

Real ladder(mpfr_prec_t bits, int twice_j, int k)
{
    // sqrt(j(j+1) - m(m+1)) with j = twice_j/2 and m = k - j, i.e.
    // sqrt((k + 1)(twice_j - k)).
    Real out(bits);
    mpfr_set_si(out.get(), static_cast<long>(k + 1) * static_cast<long>(twice_j - k), MPFR_RNDN);
    mpfr_sqrt(out.get(), out.get(), MPFR_RNDN);
    return out;
}

} // namespace

mpfr_prec_t precision_for_system_size(int system_size, double depth)
{
    const double bits = 64.0 + std::ceil(depth * static_cast<double>(system_size) / std::log(2.0));
    return static_cast<mpfr_prec_t>(std::max(128.0, bits));
}

double SymmetricTridiagonal::norm_bound() const
{
    double bound = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double row = std::abs(diag[i].to_double());
        if (i > 0) {
            row += std::abs(off[i - 1].to_double());
        }
        if (i + 1 < diag.size()) {
            row += std::abs(off[i].to_double());
        }
        bound = std::max(bound, row);
    }
    return bound;
}

std::vector<int> parity_block_indices(SpinQuantumNumber j, int parity)
{
    std::vector<int> idx;
    for (int k = (parity > 0 ? 0 : 1); k < j.dimension(); k += 2) {
        idx.push_back(k);
    }
    return idx;
}

SymmetricTridiagonal lmg_parity_block(const LMGParams& params, int parity, mpfr_prec_t bits)
{
    params.validate();
    const int twice_j = params.j.twice_j();
    const auto idx = parity_block_indices(params.j, parity);
    if (idx.empty()) {
        throw DomainError("parity sector is empty for j = " + params.j.to_string());
    }
    SymmetricTridiagonal t{mp::make_vector(idx.size(), bits), mp::make_vector(idx.size() - 1, bits), bits};

    Real h(params.h, bits), gamma(params.gamma, bits), g(params.g, bits);
    Real coupling(bits); // g / j = 2 g / twice_j
    mpfr_mul_2ui(coupling.get(), g.get(), 1, MPFR_RNDN);
    mpfr_div_si(coupling.get(), coupling.get(), twice_j, MPFR_RNDN);
    Real one_plus(bits), one_minus(bits), m(bits), jj1(bits), tmp(bits);
    mpfr_add_ui(one_plus.get(), gamma.get(), 1, MPFR_RNDN);
    mpfr_ui_sub(one_minus.get(), 1, gamma.get(), MPFR_RNDN);
    // j(j+1) = twice_j (twice_j + 2) / 4
    mpfr_set_si(jj1.get(), static_cast<long>(twice_j) * (twice_j + 2), MPFR_RNDN);
    mpfr_div_2ui(jj1.get(), jj1.get(), 2, MPFR_RNDN);

    for (std::size_t a = 0; a < idx.size(); ++a) {
        const int k = idx[a];
        // m = (2k - twice_j)/2
        mpfr_set_si(m.get(), 2L * k - twice_j, MPFR_RNDN);
        mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
        // diag = -2 h m - (g/j) (1+gamma) (j(j+1) - m^2) / 2
        mpfr_sqr(tmp.get(), m.get(), MPFR_RNDN);
        mpfr_sub(tmp.get(), jj1.get(), tmp.get(), MPFR_RNDN);
        mpfr_mul(tmp.get(), tmp.get(), one_plus.get(), MPFR_RNDN);
        mpfr_mul(tmp.get(), tmp.get(), coupling.get(), MPFR_RNDN);
        mpfr_div_2ui(tmp.get(), tmp.get(), 1, MPFR_RNDN);
        auto* dptr = t.diag[a].get();
        mpfr_mul(dptr, h.get(), m.get(), MPFR_RNDN);
        mpfr_mul_2ui(dptr, dptr, 1, MPFR_RNDN);
        mpfr_add(dptr, dptr, tmp.get(), MPFR_RNDN);
        mpfr_neg(dptr, dptr, MPFR_RNDN);
        if (a + 1 < idx.size()) {
            // <m+2| H |m> = -(g/j) (1-gamma)/4 c+(m) c+(m+1)
            const Real c0 = ladder(bits, twice_j, k);
            const Real c1 = ladder(bits, twice_j, k + 1);
            auto* optr = t.off[a].get();
            mpfr_mul(optr, c0.get(), c1.get(), MPFR_RNDN);
            mpfr_mul(optr, optr, one_minus.get(), MPFR_RNDN);
            mpfr_mul(optr, optr, coupling.get(), MPFR_RNDN);
            mpfr_div_2ui(optr, optr, 2, MPFR_RNDN);
            mpfr_neg(optr, optr, MPFR_RNDN);
        }
    }
    return t;
}

Eigenpair lowest_eigenpair(const SymmetricTridiagonal& t)
{
    const auto guesses = double_eigenvalues(t);
    const double scale = std::max(1.0, t.norm_bound());
    double half_gap = scale;
    if (guesses.size() > 1) {
        const double gap = guesses[1] - guesses[0];
        if (gap <= kClusterTolerance * scale) {
            throw NumericalFault("lowest eigenvalue of the parity block is degenerate");
        }
        half_gap = 0.5 * gap;
    }
    Workspace ws(t.size(), t.bits);
    mpfr_set_d(ws.tiny.get(), std::ldexp(scale, -static_cast<int>(t.bits)), MPFR_RNDN);
    return refine_isolated(t, guesses[0], half_gap, ws, 0);
}

std::vector<Eigenpair> eigenpairs(const SymmetricTridiagonal& t)
{
    const auto guesses = double_eigenvalues(t);
    const double scale = std::max(1.0, t.norm_bound());
    Workspace ws(t.size(), t.bits);
    mpfr_set_d(ws.tiny.get(), std::ldexp(scale, -static_cast<int>(t.bits)), MPFR_RNDN);

    std::vector<Eigenpair> out;
    out.reserve(guesses.size());
    for (const auto& [begin, end] : clusters(guesses, scale)) {
        if (end - begin == 1) {
            double half_gap = scale;
            if (begin > 0) {
                half_gap = std::min(half_gap, 0.5 * (guesses[begin] - guesses[begin - 1]));
            }
            if (end < guesses.size()) {
                half_gap = std::min(half_gap, 0.5 * (guesses[end] - guesses[begin]));
            }
            out.push_back(refine_isolated(t, guesses[begin], half_gap, ws, static_cast<int>(begin)));
        } else {
            const std::vector<double> group(guesses.begin() + static_cast<std::ptrdiff_t>(begin),
                                            guesses.begin() + static_cast<std::ptrdiff_t>(end));
            for (auto& pair : refine_cluster(t, group, ws)) {
                out.push_back(std::move(pair));
            }
        }
    }
    for (std::size_t k = 1; k < out.size(); ++k) {
        if (mpfr_less_p(out[k].value.get(), out[k - 1].value.get())) {
            throw NumericalFault("refined eigenvalues are out of order");
        }
    }
    return out;
}

SpectralWeights spectral_weights(const SymmetricTridiagonal& t, const mp::Vector& state)
{
    if (state.size() != t.size()) {
        throw DomainError("state and block dimension differ");
    }
    auto pairs = eigenpairs(t);
    SpectralWeights out;
    out.energies.reserve(pairs.size());
    out.weights.reserve(pairs.size());
    Real overlap(t.bits), total(t.bits);
    for (auto& pair : pairs) {
        mp::dot(overlap.get(), pair.vector, state);
        mpfr_sqr(overlap.get(), overlap.get(), MPFR_RNDN);
        mpfr_add(total.get(), total.get(), overlap.get(), MPFR_RNDN);
        out.energies.push_back(std::move(pair.value));
        out.weights.push_back(overlap);
    }
    mpfr_sub_ui(total.get(), total.get(), 1, MPFR_RNDN);
    const double defect = std::abs(total.to_double());
    if (defect > std::ldexp(1.0, -static_cast<int>(t.bits) / 2)) {
        std::ostringstream msg;
        msg << "spectral weights sum to 1 + " << total.to_double() << "; eigenbasis is incomplete";
        throw NumericalFault(msg.str());
    }
    return out;
}

PreciseGroundManifold PreciseGroundManifold::compute(const LMGParams& params, mpfr_prec_t bits)
{
    const auto even_block = lmg_parity_block(params, 1, bits);
    const auto odd_block = lmg_parity_block(params, -1, bits);
    auto even = lowest_eigenpair(even_block);
    auto odd = lowest_eigenpair(odd_block);

    // Even state: largest component positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < even.vector.size(); ++i) {
        if (mpfr_cmpabs(even.vector[i].get(), even.vector[arg].get()) > 0) {
            arg = i;
        }
    }
    if (mpfr_sgn(even.vector[arg].get()) < 0) {
        for (auto& x : even.vector) {
            mpfr_neg(x.get(), x.get(), MPFR_RNDN);
        }
    }

    // <even|J_x|odd>: J_x links k and k+1 with weight c+(k)/2. Even block index
    // a sits at k = 2a, odd block index b at k = 2b + 1.
    const int twice_j = params.j.twice_j();
    Real acc(bits), term(bits);
    for (int k = 0; k + 1 < params.j.dimension(); ++k) {
        const Real c = ladder(bits, twice_j, k);
        const auto& e = even.vector[static_cast<std::size_t>(k % 2 == 0 ? k / 2 : (k + 1) / 2)];
        const auto& o = odd.vector[static_cast<std::size_t>(k / 2)];
        mpfr_mul(term.get(), e.get(), o.get(), MPFR_RNDN);
        mpfr_fma(acc.get(), term.get(), c.get(), acc.get(), MPFR_RNDN);
    }
    if (mpfr_sgn(acc.get()) < 0) {
        for (auto& x : odd.vector) {
            mpfr_neg(x.get(), x.get(), MPFR_RNDN);
        }
    } else if (mpfr_zero_p(acc.get())) {
        std::size_t oarg = 0;
        for (std::size_t i = 1; i < odd.vector.size(); ++i) {
            if (mpfr_cmpabs(odd.vector[i].get(), odd.vector[oarg].get()) > 0) {
                oarg = i;
            }
        }
        if (mpfr_sgn(odd.vector[oarg].get()) < 0) {
            for (auto& x : odd.vector) {
                mpfr_neg(x.get(), x.get(), MPFR_RNDN);
            }
        }
    }
    return PreciseGroundManifold{params,           bits, std::move(even.vector), std::move(odd.vector),
                                 even.value.to_double(), odd.value.to_double()};
}

ComplexVector PreciseGroundManifold::to_full(int parity) const
{
    const auto idx = parity_block_indices(params.j, parity);
    const auto& v = sector(parity);
    ComplexVector out = ComplexVector::Zero(params.j.dimension());
    for (std::size_t a = 0; a < idx.size(); ++a) {
        out(idx[a]) = v[a].to_double();
    }
    return out;
}

void evaluate_return_amplitudes(std::span<const SpectralWeights> sectors, double dt, std::size_t steps,
                                const AmplitudeVisitor& visit)
{
    if (sectors.empty()) {
        return;
    }
    const mpfr_prec_t bits = sectors.front().weights.front().precision();
    // Exact phases are recomputed periodically so rounding in the running
    // product cannot accumulate over long horizons.
    constexpr std::size_t kResync = 2048;

    struct Term {
        Real w, e, ure, uim, zre, zim;
    };
    std::vector<std::vector<Term>> terms(sectors.size());
    Real step(dt, bits), phase(bits), cut(bits);
    for (std::size_t s = 0; s < sectors.size(); ++s) {
        const auto& sw = sectors[s];
        for (std::size_t k = 0; k < sw.weights.size(); ++k) {
            const mpfr_srcptr w = sw.weights[k].get();
            // Terms below 2^-(bits+8) cannot move the sum at working precision.
            if (mpfr_zero_p(w) || mpfr_get_exp(w) < -static_cast<long>(bits) - 8) {
                continue;
            }
            // A term of size 2^e only needs bits + e relative bits (plus slack for
            // the running product) to stay below 2^-bits in absolute terms.
            const mpfr_prec_t own =
                std::clamp<mpfr_prec_t>(bits + 24 + static_cast<mpfr_prec_t>(mpfr_get_exp(w)), 64, bits);
            Term term{sw.weights[k], sw.energies[k], Real(own), Real(own), Real(own), Real(own)};
            mpfr_mul(phase.get(), term.e.get(), step.get(), MPFR_RNDN);
            mpfr_sin_cos(term.zim.get(), term.zre.get(), phase.get(), MPFR_RNDN);
            mpfr_neg(term.zim.get(), term.zim.get(), MPFR_RNDN);
            terms[s].push_back(std::move(term));
        }
    }

    std::vector<Real> sum_re, sum_im;
    for (std::size_t s = 0; s < sectors.size(); ++s) {
        sum_re.emplace_back(bits);
        sum_im.emplace_back(bits);
    }
    Real t1(bits), t2(bits), t3(bits), t4(bits), time(bits);
    for (std::size_t n = 0; n <= steps; ++n) {
        if (n % kResync == 0) {
            mpfr_mul_ui(time.get(), step.get(), static_cast<unsigned long>(n), MPFR_RNDN);
            for (auto& sector_terms : terms) {
                for (auto& term : sector_terms) {
                    mpfr_mul(phase.get(), term.e.get(), time.get(), MPFR_RNDN);
                    mpfr_sin_cos(t2.get(), t1.get(), phase.get(), MPFR_RNDN);
                    mpfr_mul(term.ure.get(), t1.get(), term.w.get(), MPFR_RNDN);
                    mpfr_mul(term.uim.get(), t2.get(), term.w.get(), MPFR_RNDN);
                    mpfr_neg(term.uim.get(), term.uim.get(), MPFR_RNDN);
                }
            }
        }
        for (std::size_t s = 0; s < terms.size(); ++s) {
            mpfr_set_zero(sum_re[s].get(), 1);
            mpfr_set_zero(sum_im[s].get(), 1);
            for (auto& term : terms[s]) {
                mpfr_add(sum_re[s].get(), sum_re[s].get(), term.ure.get(), MPFR_RNDN);
                mpfr_add(sum_im[s].get(), sum_im[s].get(), term.uim.get(), MPFR_RNDN);
                // u <- u z
                mpfr_mul(t1.get(), term.ure.get(), term.zre.get(), MPFR_RNDN);
                mpfr_mul(t2.get(), term.uim.get(), term.zim.get(), MPFR_RNDN);
                mpfr_mul(t3.get(), term.ure.get(), term.zim.get(), MPFR_RNDN);
                mpfr_mul(t4.get(), term.uim.get(), term.zre.get(), MPFR_RNDN);
                mpfr_sub(term.ure.get(), t1.get(), t2.get(), MPFR_RNDN);
                mpfr_add(term.uim.get(), t3.get(), t4.get(), MPFR_RNDN);
            }
        }
        visit(n, std::span<const Real>(sum_re), std::span<const Real>(sum_im));
    }
}

} // namespace dqpt::precise
