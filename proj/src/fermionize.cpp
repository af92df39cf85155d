#include "nevac/fermionize.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace nevac {

using cdouble = std::complex<double>;

std::vector<long> default_target_indices() {
  return {0,   1,   2,   3,   4,   5,   6,   8,   10,  12,  15,  18,   22,   27,   33,   40,   49,   60,
          73,  89,  109, 133, 162, 198, 242, 296, 361, 441, 539, 658, 804, 982, 1200, 1466, 1791, 2188};
}

void FermionizeConfig::check() const {
  for (std::size_t i = 0; i < target_indices.size(); ++i) {
    if (target_indices[i] < 0) throw std::invalid_argument("target indices must be non-negative");
    if (i > 0 && target_indices[i] <= target_indices[i - 1]) {
      throw std::invalid_argument("target indices must be strictly increasing");
    }
  }
  if (target_indices.empty()) throw std::invalid_argument("no target indices");
  if (tikhonov_alpha < 0.0) throw std::invalid_argument("tikhonov_alpha must be non-negative");
  if (!(svd_cutoff_rel >= 0.0 && svd_cutoff_rel < 1.0)) throw std::invalid_argument("svd_cutoff_rel must lie in [0, 1)");
}

namespace {

using Cubic = std::array<double, 4>;  // c0 + c1 s + c2 s^2 + c3 s^3

// Monomial coefficients (in s = x - origin) of the cubic through four points.
template <class V>
std::array<V, 4> cubic_through(const double* xs, const V* ys, double origin) {
  std::array<V, 4> coef{};
  for (int m = 0; m < 4; ++m) {
    std::array<double, 3> roots{};
    double denom = 1.0;
    int r = 0;
    for (int l = 0; l < 4; ++l) {
      if (l == m) continue;
      roots[r++] = xs[l] - origin;
      denom *= xs[m] - xs[l];
    }
    const auto [p, q, u] = roots;
    const V w = ys[m] / denom;
    coef[0] += w * (-p * q * u);
    coef[1] += w * (p * q + p * u + q * u);
    coef[2] += w * (-(p + q + u));
    coef[3] += w;
  }
  return coef;
}

// int_0^h s^k e^{i w s} ds for k = 0..3.
std::array<cdouble, 4> oscillatory_moments(double omega, double h) {
  std::array<cdouble, 4> out{};
  const double x = omega * h;
  if (std::abs(x) < 1.0) {
    for (int k = 0; k < 4; ++k) {
      cdouble sum = 0.0;
      cdouble term = 1.0;  // (i x)^m / m!
      for (int m = 0; m < 60; ++m) {
        const cdouble add = term / static_cast<double>(k + m + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        term *= cdouble(0.0, x) / static_cast<double>(m + 1);
      }
      out[k] = sum * std::pow(h, k + 1);
    }
    return out;
  }
  const cdouble iw(0.0, omega);
  const cdouble e = std::exp(cdouble(0.0, x));
  out[0] = (e - 1.0) / iw;
  double hk = 1.0;
  for (int k = 1; k < 4; ++k) {
    hk *= h;
    out[k] = (hk * e - static_cast<double>(k) * out[k - 1]) / iw;
  }
  return out;
}

void check_tau_data(const ImaginaryTimeData& data) {
  const auto issues = validate(data);
  if (!issues.empty()) {
    std::string msg = "invalid imaginary-time data:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw std::invalid_argument(msg);
  }
  if (data.size() < 4) throw std::invalid_argument("cubic interpolation needs at least four tau nodes");
}

MatsubaraData make_fermionic(const std::vector<long>& indices, double beta, const std::vector<cdouble>& values,
                             PrecisionBits bits) {
  MatsubaraData out;
  out.beta = Real(beta, bits);
  out.statistics = Statistics::Fermionic;
  out.indices = indices;
  out.precision_bits = bits;
  out.values.reserve(values.size());
  for (const auto& v : values) out.values.emplace_back(v, bits);
  return out;
}

}  // namespace

MatsubaraData fermionize_tau(const ImaginaryTimeData& data, const FermionizeConfig& cfg) {
  cfg.check();
  check_tau_data(data);
  const std::size_t n = data.size();
  const double beta = data.beta;

  // Breakpoints 0, tau_0, ..., tau_{n-1}, beta; interval j spans [b_j, b_{j+1}].
  std::vector<double> breaks;
  breaks.reserve(n + 2);
  breaks.push_back(0.0);
  breaks.insert(breaks.end(), data.taus.begin(), data.taus.end());
  breaks.push_back(beta);

  std::vector<std::array<cdouble, 4>> pieces;
  pieces.reserve(n + 1);
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    // Interval j lies between data nodes j-1 and j; centre the stencil on it.
    const long lo = std::clamp<long>(static_cast<long>(j) - 2, 0, static_cast<long>(n) - 4);
    pieces.push_back(cubic_through(&data.taus[lo], &data.values[lo], breaks[j]));
  }

  std::vector<cdouble> result(cfg.target_indices.size());
  for (std::size_t m = 0; m < cfg.target_indices.size(); ++m) {
    const double omega = frequency_of(cfg.target_indices[m], beta, Statistics::Fermionic);
    cdouble sum = 0.0;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
      const double a = breaks[j];
      const auto moments = oscillatory_moments(omega, breaks[j + 1] - a);
      cdouble piece = 0.0;
      for (int k = 0; k < 4; ++k) piece += pieces[j][k] * moments[k];
      sum += std::exp(cdouble(0.0, omega * a)) * piece;
    }
    result[m] = sum;
  }
  return make_fermionic(cfg.target_indices, beta, result, cfg.precision_bits);
}

namespace {

// Kernel entries in type T; see bosonic_fit_kernel for the layout.
template <class T>
std::vector<T> fit_kernel(const std::vector<long>& indices, double beta, const RealFrequencyGrid& grid) {
  const std::size_t rows = indices.size();
  const std::size_t cols = grid.count();
  const T b(beta);
  const T dw(grid.spacing());
  std::vector<T> k(2 * rows * cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const T w(grid[j]);
    const T t = std::tanh(T(0.5) * b * w);
    for (std::size_t n = 0; n < rows; ++n) {
      const T nu = T(2 * indices[n]) * std::numbers::pi_v<T> / b;
      T re = 0;
      T im = 0;
      if (nu == T(0)) {
        // tanh(beta w / 2) / (0 - w) -> -beta / 2 as w -> 0.
        re = (w == T(0)) ? T(-0.5) * b : -t / w;
      } else {
        const T den = nu * nu + w * w;
        re = -t * w / den;
        im = -t * nu / den;
      }
      k[j * 2 * rows + n] = dw * re;
      k[j * 2 * rows + rows + n] = dw * im;
    }
  }
  return k;
}

}  // namespace

std::vector<double> bosonic_fit_kernel(const std::vector<long>& indices, double beta, const RealFrequencyGrid& grid) {
  return fit_kernel<double>(indices, beta, grid);
}

FermionizeFit fermionize_freq(const MatsubaraData& data, const FermionizeConfig& cfg) {
  cfg.check();
  require_valid(data);
  if (data.statistics != Statistics::Bosonic) throw std::invalid_argument("fermionize_freq expects bosonic data");
  // Extended double keeps the rounding noise of the fit well below what the
  // Pick/Schur stage can amplify into visible asymmetry.
  using T = long double;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const double beta = data.beta_double();
  const auto rows = static_cast<Eigen::Index>(data.size());
  const auto cols = static_cast<Eigen::Index>(cfg.fit_grid.count());

  const std::vector<T> kernel = fit_kernel<T>(data.indices, beta, cfg.fit_grid);
  const Eigen::Map<const Matrix> k(kernel.data(), 2 * rows, cols);
  Vector y(2 * rows);
  for (Eigen::Index n = 0; n < rows; ++n) {
    y(n) = data.values[n].re.to_long_double();
    y(rows + n) = data.values[n].im.to_long_double();
  }

  const Eigen::BDCSVD<Matrix> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const T cutoff = s.size() > 0 ? T(cfg.svd_cutoff_rel) * s(0) : T(0);
  const T alpha(cfg.tikhonov_alpha);
  std::size_t rank = 0;
  const Vector uty = svd.matrixU().transpose() * y;
  Vector coeff = Vector::Zero(cols);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s(i) > cutoff) || s(i) == T(0)) continue;
    ++rank;
    coeff += (s(i) / (s(i) * s(i) + alpha) * uty(i)) * svd.matrixV().col(i);
  }
  if (rank == 0) throw DegenerateInputError("fermionize_freq: every singular value fell below the cutoff");

  const T dw(cfg.fit_grid.spacing());
  const T b(beta);
  MatsubaraData fermionic;
  fermionic.beta = Real(beta, cfg.precision_bits);
  fermionic.statistics = Statistics::Fermionic;
  fermionic.indices = cfg.target_indices;
  fermionic.precision_bits = cfg.precision_bits;
  for (long m : cfg.target_indices) {
    const std::complex<T> iw(0, T(2 * m + 1) * std::numbers::pi_v<T> / b);
    std::complex<T> sum = 0;
    for (Eigen::Index j = 0; j < cols; ++j) sum += dw * coeff(j) / (iw - T(cfg.fit_grid[j]));
    Complex v(cfg.precision_bits);
    mpfr_set_ld(v.re.raw(), sum.real(), MPFR_RNDN);
    mpfr_set_ld(v.im.raw(), sum.imag(), MPFR_RNDN);
    fermionic.values.push_back(std::move(v));
  }

  std::vector<double> density(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) density[static_cast<std::size_t>(j)] = static_cast<double>(coeff(j));
  const double residual = static_cast<double>((k * coeff - y).norm());
  return {std::move(fermionic), SpectralFunction(cfg.fit_grid, std::move(density), Statistics::Fermionic), rank,
          residual};
}

SumRule sum_rule_from_tau(const ImaginaryTimeData& data) {
  check_tau_data(data);
  const double beta = data.beta;
  const double low = data.taus.front() / beta;
  const double high = data.taus.back() / beta;
  if (low > 0.05 || high < 0.95) {
    std::ostringstream msg;
    msg << "sum rule needs tau nodes within 5% of both ends; coverage is [" << low << ", " << high << "] of beta";
    throw PreconditionError(msg.str(), low, high);
  }
  const std::size_t n = data.size();
  std::vector<double> re(n);
  for (std::size_t i = 0; i < n; ++i) re[i] = data.values[i].real();

  const auto head = cubic_through(&data.taus[0], &re[0], 0.0);
  const auto tail = cubic_through(&data.taus[n - 4], &re[n - 4], beta);
  const double at_zero = head[0];
  const double at_beta = tail[0];

  // Quadratic extrapolation from the three nearest nodes as an error estimate.
  auto quadratic_at = [](const double* xs, const double* ys, double x) {
    double sum = 0.0;
    for (int m = 0; m < 3; ++m) {
      double w = ys[m];
      for (int l = 0; l < 3; ++l) {
        if (l != m) w *= (x - xs[l]) / (xs[m] - xs[l]);
      }
      sum += w;
    }
    return sum;
  };
  const double q0 = quadratic_at(&data.taus[0], &re[0], 0.0);
  const double qb = quadratic_at(&data.taus[n - 3], &re[n - 3], beta);

  SumRule rule;
  rule.value = -(at_zero + at_beta);
  rule.source = SumRuleSource::TauEndpoints;
  rule.quality = std::abs(at_zero - q0) + std::abs(at_beta - qb);
  return rule;
}

SumRule sum_rule_from_tail(const MatsubaraData& data) {
  require_valid(data);
  if (data.size() < 4) throw std::invalid_argument("tail fit needs at least four points");
  const double beta = data.beta_double();
  const std::size_t n = data.size();
  const std::size_t quartile = std::max<std::size_t>((n + 3) / 4, 1);
  const std::size_t first = n - quartile;

  // Rows scaled by omega_n so both unknowns enter at unit order:
  // omega Im chi = -S + m2 / omega^2.
  const bool with_correction = quartile >= 3;
  const Eigen::Index cols = with_correction ? 2 : 1;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(quartile), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(quartile));
  for (std::size_t i = first; i < n; ++i) {
    const double w = frequency_of(data.indices[i], beta, data.statistics);
    if (w == 0.0) throw std::invalid_argument("tail fit cannot use omega = 0");
    const auto r = static_cast<Eigen::Index>(i - first);
    a(r, 0) = -1.0;
    if (with_correction) a(r, 1) = 1.0 / (w * w);
    b(r) = w * data.values[i].im.to_double();
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  SumRule rule;
  rule.value = x(0);
  rule.source = SumRuleSource::TailFit;
  rule.quality = (a * x - b).norm() / std::sqrt(static_cast<double>(quartile));
  return rule;
}

SpectralFunction tanh_convert(const SpectralFunction& rho_aux, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  std::vector<double> out(rho_aux.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho_aux.values[i] * std::tanh(0.5 * beta * rho_aux.grid[i]);
  return SpectralFunction(rho_aux.grid, std::move(out), Statistics::Bosonic);
}

}  // namespace nevac
