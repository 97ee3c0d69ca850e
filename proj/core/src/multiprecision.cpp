#include "dqpt/multiprecision.hpp"

#include <cmath>
#include <limits>

namespace dqpt::mp {

Real::Real(mpfr_prec_t bits)
{
    mpfr_init2(value_, bits);
    mpfr_set_zero(value_, 1);
}

Real::Real(double value, mpfr_prec_t bits)
{
    mpfr_init2(value_, bits);
    mpfr_set_d(value_, value, MPFR_RNDN);
}

Real::Real(const Real& other)
{
    mpfr_init2(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept
{
    mpfr_init2(value_, MPFR_PREC_MIN);
    mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other)
{
    if (this != &other) {
        mpfr_set_prec(value_, other.precision());
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    return *this;
}

Real& Real::operator=(Real&& other) noexcept
{
    mpfr_swap(value_, other.value_);
    return *this;
}

Real::~Real()
{
    mpfr_clear(value_);
}

Vector make_vector(std::size_t n, mpfr_prec_t bits)
{
    Vector v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        v.emplace_back(bits);
    }
    return v;
}

void dot(mpfr_ptr out, const Vector& a, const Vector& b)
{
    mpfr_set_zero(out, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        mpfr_fma(out, a[i].get(), b[i].get(), out, MPFR_RNDN);
    }
}

bool normalize(Vector& v)
{
    if (v.empty()) {
        return false;
    }
    Real norm(v.front().precision());
    dot(norm.get(), v, v);
    if (mpfr_zero_p(norm.get())) {
        return false;
    }
    mpfr_rec_sqrt(norm.get(), norm.get(), MPFR_RNDN);
    for (auto& x : v) {
        mpfr_mul(x.get(), x.get(), norm.get(), MPFR_RNDN);
    }
    return true;
}

double log_abs(mpfr_srcptr x)
{
    if (mpfr_zero_p(x)) {
        return -std::numeric_limits<double>::infinity();
    }
    // |x| = mant * 2^exp with mant in [0.5, 1).
    long exp = 0;
    const double mant = mpfr_get_d_2exp(&exp, x, MPFR_RNDN);
    return std::log(std::abs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

} // namespace dqpt::mp
