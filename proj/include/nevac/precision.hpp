#pragma once

// Extended-precision real and complex scalars backed by MPFR.
//
// Every Real carries its own significand width. Binary operations produce a
// result at the wider of the two operand widths, so a computation seeded at
// N bits stays at N bits without consulting any global state. This keeps the
// types safe to use from OpenMP worker threads.

#include <mpfr.h>

#include <complex>
#include <string>
#include <string_view>

namespace nevac {

/// Significand width in bits.
using PrecisionBits = long;

inline constexpr PrecisionBits kDefaultPrecisionBits = 256;

/// Reads NEVAC_PRECISION_BITS, falling back to kDefaultPrecisionBits.
PrecisionBits precision_from_environment();

class Real {
 public:
  explicit Real(PrecisionBits bits = kDefaultPrecisionBits);
  Real(double value, PrecisionBits bits);
  Real(long value, PrecisionBits bits);

  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);
  Real& operator=(Real&& other) noexcept;
  ~Real();

  /// Parses decimal text directly at `bits`; throws std::invalid_argument
  /// if the text is not a complete number.
  static Real parse(std::string_view text, PrecisionBits bits);
  static Real pi(PrecisionBits bits);

  PrecisionBits precision() const { return mpfr_get_prec(value_); }
  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(value_, MPFR_RNDN); }

  /// Shortest decimal that reads back to the identical binary value.
  std::string to_string() const;
  /// Scientific notation with `digits` significant digits.
  std::string to_string(int digits) const;

  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }
  int sign() const { return mpfr_sgn(value_); }

  Real& operator+=(const Real& rhs);
  Real& operator-=(const Real& rhs);
  Real& operator*=(const Real& rhs);
  Real& operator/=(const Real& rhs);
  Real operator-() const;

  mpfr_ptr raw() { return value_; }
  mpfr_srcptr raw() const { return value_; }

 private:
  mpfr_t value_;
  bool owns_ = false;
};

Real operator+(const Real& a, const Real& b);
Real operator-(const Real& a, const Real& b);
Real operator*(const Real& a, const Real& b);
Real operator/(const Real& a, const Real& b);

bool operator<(const Real& a, const Real& b);
bool operator>(const Real& a, const Real& b);
bool operator<=(const Real& a, const Real& b);
bool operator>=(const Real& a, const Real& b);
bool operator==(const Real& a, const Real& b);

Real abs(const Real& x);
Real sqrt(const Real& x);
Real exp(const Real& x);
Real tanh(const Real& x);
Real hypot(const Real& x, const Real& y);

/// Unit roundoff 2^(1 - bits) for the given width.
double ulp(PrecisionBits bits);

/// A complex number carried as two extended-precision reals.
struct Complex {
  Real re;
  Real im;

  explicit Complex(PrecisionBits bits = kDefaultPrecisionBits) : re(bits), im(bits) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  Complex(std::complex<double> z, PrecisionBits bits) : re(z.real(), bits), im(z.imag(), bits) {}

  PrecisionBits precision() const { return re.precision(); }
  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }

  Complex& operator+=(const Complex& rhs);
  Complex& operator-=(const Complex& rhs);
  Complex& operator*=(const Complex& rhs);
  Complex& operator/=(const Complex& rhs);
  Complex operator-() const { return {-re, -im}; }
};

Complex operator+(const Complex& a, const Complex& b);
Complex operator-(const Complex& a, const Complex& b);
Complex operator*(const Complex& a, const Complex& b);
Complex operator/(const Complex& a, const Complex& b);
Complex operator*(const Real& a, const Complex& b);

Complex conj(const Complex& z);
Real norm(const Complex& z);  // |z|^2
Real abs(const Complex& z);

/// The imaginary unit at `bits`.
Complex imaginary_unit(PrecisionBits bits);

}  // namespace nevac
