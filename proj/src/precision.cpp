#include "nevac/precision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace nevac {

PrecisionBits precision_from_environment() {
  const char* env = std::getenv("NEVAC_PRECISION_BITS");
  if (env == nullptr || *env == '\0') return kDefaultPrecisionBits;
  char* end = nullptr;
  const long bits = std::strtol(env, &end, 10);
  if (*end != '\0' || bits < MPFR_PREC_MIN || bits > 65536) {
    throw std::invalid_argument(std::string("NEVAC_PRECISION_BITS is not a valid width: ") + env);
  }
  return bits;
}

Real::Real(PrecisionBits bits) : owns_(true) {
  mpfr_init2(value_, bits);
  mpfr_set_zero(value_, 1);
}

Real::Real(double value, PrecisionBits bits) : owns_(true) {
  mpfr_init2(value_, bits);
  mpfr_set_d(value_, value, MPFR_RNDN);
}

Real::Real(long value, PrecisionBits bits) : owns_(true) {
  mpfr_init2(value_, bits);
  mpfr_set_si(value_, value, MPFR_RNDN);
}

Real::Real(const Real& other) : owns_(true) {
  mpfr_init2(value_, other.precision());
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept : owns_(other.owns_) {
  value_[0] = other.value_[0];
  other.owns_ = false;
}

Real& Real::operator=(const Real& other) {
  if (this == &other) return *this;
  if (!owns_) {
    mpfr_init2(value_, other.precision());
    owns_ = true;
  } else if (precision() != other.precision()) {
    mpfr_set_prec(value_, other.precision());
  }
  mpfr_set(value_, other.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  if (this == &other) return *this;
  if (owns_) mpfr_clear(value_);
  value_[0] = other.value_[0];
  owns_ = other.owns_;
  other.owns_ = false;
  return *this;
}

Real::~Real() {
  if (owns_) mpfr_clear(value_);
}

Real Real::parse(std::string_view text, PrecisionBits bits) {
  const std::string owned(text);
  Real out(bits);
  if (owned.empty()) throw std::invalid_argument("empty number");
  char* end = nullptr;
  mpfr_strtofr(out.value_, owned.c_str(), &end, 10, MPFR_RNDN);
  if (end != owned.c_str() + owned.size()) {
    throw std::invalid_argument("not a decimal number: '" + owned + "'");
  }
  if (!out.is_finite()) throw std::invalid_argument("non-finite number: '" + owned + "'");
  return out;
}

Real Real::pi(PrecisionBits bits) {
  Real out(bits);
  mpfr_const_pi(out.value_, MPFR_RNDN);
  return out;
}

namespace {

std::string format_mpfr(mpfr_srcptr x, size_t digits) {
  if (mpfr_zero_p(x)) return mpfr_signbit(x) ? "-0" : "0";
  if (mpfr_nan_p(x)) return "nan";
  if (mpfr_inf_p(x)) return mpfr_signbit(x) ? "-inf" : "inf";
  mpfr_exp_t exponent = 0;
  char* raw = mpfr_get_str(nullptr, &exponent, 10, digits, x, MPFR_RNDN);
  std::string mantissa(raw);
  mpfr_free_str(raw);
  std::string sign;
  if (mantissa.front() == '-') {
    sign = "-";
    mantissa.erase(0, 1);
  }
  while (mantissa.size() > 1 && mantissa.back() == '0') mantissa.pop_back();
  std::string out = sign + mantissa.substr(0, 1);
  if (mantissa.size() > 1) out += "." + mantissa.substr(1);
  const long exp10 = static_cast<long>(exponent) - 1;
  if (exp10 != 0) out += "e" + std::to_string(exp10);
  return out;
}

}  // namespace

std::string Real::to_string() const {
  return format_mpfr(value_, mpfr_get_str_ndigits(10, precision()));
}

std::string Real::to_string(int digits) const {
  return format_mpfr(value_, static_cast<size_t>(std::max(digits, 1)));
}

namespace {

PrecisionBits wider(const Real& a, const Real& b) { return std::max(a.precision(), b.precision()); }

}  // namespace

Real& Real::operator+=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator-=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator*=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator/=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real Real::operator-() const {
  Real out(precision());
  mpfr_neg(out.value_, value_, MPFR_RNDN);
  return out;
}

Real operator+(const Real& a, const Real& b) {
  Real out(wider(a, b));
  mpfr_add(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}

Real operator-(const Real& a, const Real& b) {
  Real out(wider(a, b));
  mpfr_sub(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}

Real operator*(const Real& a, const Real& b) {
  Real out(wider(a, b));
  mpfr_mul(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}

Real operator/(const Real& a, const Real& b) {
  Real out(wider(a, b));
  mpfr_div(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}

bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.raw(), b.raw()) != 0; }
bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.raw(), b.raw()) != 0; }
bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.raw(), b.raw()) != 0; }
bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }

Real abs(const Real& x) {
  Real out(x.precision());
  mpfr_abs(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

Real sqrt(const Real& x) {
  Real out(x.precision());
  mpfr_sqrt(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

Real exp(const Real& x) {
  Real out(x.precision());
  mpfr_exp(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

Real tanh(const Real& x) {
  Real out(x.precision());
  mpfr_tanh(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

Real hypot(const Real& x, const Real& y) {
  Real out(wider(x, y));
  mpfr_hypot(out.raw(), x.raw(), y.raw(), MPFR_RNDN);
  return out;
}

double ulp(PrecisionBits bits) { return std::ldexp(1.0, static_cast<int>(1 - bits)); }

// Complex arithmetic. Products use the four-multiply form; division scales by
// |b|^2 which is safe in MPFR's exponent range.

Complex& Complex::operator+=(const Complex& rhs) {
  re += rhs.re;
  im += rhs.im;
  return *this;
}

Complex& Complex::operator-=(const Complex& rhs) {
  re -= rhs.re;
  im -= rhs.im;
  return *this;
}

Complex& Complex::operator*=(const Complex& rhs) {
  *this = *this * rhs;
  return *this;
}

Complex& Complex::operator/=(const Complex& rhs) {
  *this = *this / rhs;
  return *this;
}

Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }

Complex operator*(const Complex& a, const Complex& b) {
  const PrecisionBits bits = std::max(a.precision(), b.precision());
  Complex out(bits);
  Real t(bits);
  mpfr_mul(out.re.raw(), a.re.raw(), b.re.raw(), MPFR_RNDN);
  mpfr_mul(t.raw(), a.im.raw(), b.im.raw(), MPFR_RNDN);
  mpfr_sub(out.re.raw(), out.re.raw(), t.raw(), MPFR_RNDN);
  mpfr_mul(out.im.raw(), a.re.raw(), b.im.raw(), MPFR_RNDN);
  mpfr_mul(t.raw(), a.im.raw(), b.re.raw(), MPFR_RNDN);
  mpfr_add(out.im.raw(), out.im.raw(), t.raw(), MPFR_RNDN);
  return out;
}

Complex operator/(const Complex& a, const Complex& b) {
  const Real denom = norm(b);
  Complex out = a * conj(b);
  out.re /= denom;
  out.im /= denom;
  return out;
}

Complex operator*(const Real& a, const Complex& b) { return {a * b.re, a * b.im}; }

Complex conj(const Complex& z) { return {z.re, -z.im}; }

Real norm(const Complex& z) {
  Real out(z.precision());
  Real t(z.precision());
  mpfr_sqr(out.raw(), z.re.raw(), MPFR_RNDN);
  mpfr_sqr(t.raw(), z.im.raw(), MPFR_RNDN);
  mpfr_add(out.raw(), out.raw(), t.raw(), MPFR_RNDN);
  return out;
}

Real abs(const Complex& z) { return hypot(z.re, z.im); }

Complex imaginary_unit(PrecisionBits bits) { return {Real(bits), Real(1.0, bits)}; }

}  // namespace nevac
