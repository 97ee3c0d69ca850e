#pragma once

#include <mpfr.h>

#include <cstddef>
#include <vector>

namespace dqpt::mp {

/// Owning wrapper around an mpfr_t. Arithmetic is done with the mpfr_* C API
/// on get(); this class only handles lifetime and precision.
class Real {
public:
    explicit Real(mpfr_prec_t bits);
    Real(double value, mpfr_prec_t bits);
    Real(const Real& other);
    Real(Real&& other) noexcept;
    Real& operator=(const Real& other);
    Real& operator=(Real&& other) noexcept;
    ~Real();

    [[nodiscard]] mpfr_ptr get() noexcept { return value_; }
    [[nodiscard]] mpfr_srcptr get() const noexcept { return value_; }
    [[nodiscard]] mpfr_prec_t precision() const noexcept { return mpfr_get_prec(value_); }
    [[nodiscard]] double to_double() const noexcept { return mpfr_get_d(value_, MPFR_RNDN); }

private:
    mpfr_t value_;
};

using Vector = std::vector<Real>;

[[nodiscard]] Vector make_vector(std::size_t n, mpfr_prec_t bits);

/// out = a . b
void dot(mpfr_ptr out, const Vector& a, const Vector& b);
/// Scales v to unit Euclidean norm; returns false if v is zero.
bool normalize(Vector& v);

/// Natural log of |x| as a double, valid far below the double range.
[[nodiscard]] double log_abs(mpfr_srcptr x);

} // namespace dqpt::mp
