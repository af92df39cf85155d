#include "nevac/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <utility>

namespace nevac {

namespace {

namespace bmp = boost::multiprecision;

// Matsubara data feed the Pick test, so they need far more digits than tau
// data, which the pipeline consumes in double precision.
using WideFloat = bmp::number<bmp::mpfr_float_backend<110>, bmp::et_off>;
using NarrowFloat = bmp::number<bmp::mpfr_float_backend<34>, bmp::et_off>;

constexpr double kWindowWidths = 12.0;

using Interval = std::pair<double, double>;

// Union of +-12 sigma windows, split at omega = 0.
std::vector<Interval> quadrature_pieces(const SpectralModel& model) {
  std::vector<Interval> windows;
  for (const auto& c : model.components) {
    windows.emplace_back(c.center - kWindowWidths * c.width, c.center + kWindowWidths * c.width);
  }
  std::sort(windows.begin(), windows.end());
  std::vector<Interval> merged;
  for (const auto& w : windows) {
    if (!merged.empty() && w.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, w.second);
    } else {
      merged.push_back(w);
    }
  }
  std::vector<Interval> pieces;
  for (const auto& [lo, hi] : merged) {
    if (lo < 0.0 && hi > 0.0) {
      pieces.emplace_back(lo, 0.0);
      pieces.emplace_back(0.0, hi);
    } else {
      pieces.emplace_back(lo, hi);
    }
  }
  return pieces;
}

template <class F>
F gaussian_aux(const SpectralModel& model, const F& omega) {
  static const F inv_sqrt_2pi = F(1) / sqrt(2 * boost::math::constants::pi<F>());
  const F scale = F(model.weight_scale());
  F sum = 0;
  for (const auto& c : model.components) {
    const F sigma = F(c.width);
    const F x = (omega - F(c.center)) / sigma;
    sum += F(c.weight) * inv_sqrt_2pi / sigma * exp(-x * x / 2);
  }
  return scale * sum;
}

// Fermionic kernel e^{-tau w} / (1 + e^{-beta w}) without overflow.
template <class F>
F fermi_kernel(const F& tau, const F& omega, const F& beta) {
  if (omega >= 0) return exp(-tau * omega) / (1 + exp(-beta * omega));
  return exp((beta - tau) * omega) / (1 + exp(beta * omega));
}

template <class F, class Integrand>
F integrate_pieces(const std::vector<Interval>& pieces, Integrand&& f, const OracleOptions& opts) {
  using boost::math::quadrature::gauss_kronrod;
  F total = 0;
  F abs_total = 0;
  F err_total = 0;
  for (const auto& [lo, hi] : pieces) {
    F err = 0;
    F l1 = 0;
    total += gauss_kronrod<F, 31>::integrate(f, F(lo), F(hi), opts.max_depth, F(opts.rel_tolerance), &err, &l1);
    abs_total += l1;
    err_total += err;
  }
  if (abs_total > 0 && err_total > F(opts.rel_tolerance) * abs_total * 10) {
    const double achieved = static_cast<double>(err_total / abs_total);
    std::ostringstream msg;
    msg << "oracle quadrature did not converge: achieved relative error " << achieved << ", requested "
        << opts.rel_tolerance;
    throw OracleError(msg.str(), achieved);
  }
  return total;
}

Real to_real(const WideFloat& x, PrecisionBits bits) {
  Real out(bits);
  mpfr_set(out.raw(), x.backend().data(), MPFR_RNDN);
  return out;
}

WideFloat to_wide(const Real& x) {
  WideFloat out;
  mpfr_set(out.backend().data(), x.raw(), MPFR_RNDN);
  return out;
}

template <class Fn>
void parallel_points(long n, Fn&& body) {
  std::exception_ptr failure;
  long failed_at = n;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(nevac_oracle_failure)
      {
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Boost computes Kronrod abscissae lazily per type; do it before threads start.
template <class F>
void warm_quadrature() {
  using boost::math::quadrature::gauss_kronrod;
  F err;
  gauss_kronrod<F, 31>::integrate([](const F& x) { return x; }, F(0), F(1), 0, F(1), &err);
}

}  // namespace

void SpectralModel::check() const {
  if (components.empty()) throw std::invalid_argument("spectral model has no components");
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("spectral model weights must be positive");
    if (kind == ModelKind::GaussianMixture && !(c.width > 0.0)) {
      throw std::invalid_argument("Gaussian components need positive width");
    }
    if (kind == ModelKind::DeltaPoles && c.width != 0.0) {
      throw std::invalid_argument("delta poles must have zero width");
    }
  }
}

double SpectralModel::weight_scale() const {
  if (!normalize_aux) return 1.0;
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  return 1.0 / total;
}

SpectralModel SpectralModel::symmetric_double_peak(double center, double sigma) {
  return {ModelKind::GaussianMixture, {{0.5, -center, sigma}, {0.5, center, sigma}}, true};
}

SpectralModel SpectralModel::single_pole(double weight, double center) {
  return {ModelKind::DeltaPoles, {{weight, center, 0.0}}, false};
}

double model_density(const SpectralModel& model, double omega, double beta, DensityKind which) {
  model.check();
  if (model.kind == ModelKind::DeltaPoles) {
    throw std::invalid_argument("delta poles have no pointwise density");
  }
  double aux = 0.0;
  for (const auto& c : model.components) {
    const double x = (omega - c.center) / c.width;
    aux += c.weight * std::exp(-0.5 * x * x) / (std::sqrt(2.0 * std::numbers::pi) * c.width);
  }
  aux *= model.weight_scale();
  if (which == DensityKind::Aux) return aux;
  return aux * std::tanh(0.5 * beta * omega);
}

SpectralFunction model_spectral(const SpectralModel& model, const RealFrequencyGrid& grid, double beta,
                                DensityKind which) {
  std::vector<double> values;
  values.reserve(grid.count());
  for (double w : grid.nodes()) values.push_back(model_density(model, w, beta, which));
  return SpectralFunction(grid, std::move(values),
                          which == DensityKind::Aux ? Statistics::Fermionic : Statistics::Bosonic);
}

MatsubaraData oracle_matsubara(const SpectralModel& model, const Real& beta, const std::vector<long>& indices,
                               Statistics statistics, const OracleOptions& opts) {
  model.check();
  if (beta.sign() <= 0) throw std::invalid_argument("beta must be positive");
  const PrecisionBits bits = opts.precision_bits;
  MatsubaraData out;
  out.beta = beta;
  out.statistics = statistics;
  out.indices = indices;
  out.precision_bits = bits;
  out.values.assign(indices.size(), Complex(bits));

  if (model.kind == ModelKind::DeltaPoles) {
    const double scale = model.weight_scale();
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const Complex iw{Real(bits), frequency_of(indices[k], beta, statistics)};
      Complex sum(bits);
      for (const auto& c : model.components) {
        const Complex den = iw - Complex{Real(c.center, bits), Real(bits)};
        if (den.re.is_zero() && den.im.is_zero()) throw std::invalid_argument("pole sits on a Matsubara frequency");
        sum += Complex{Real(c.weight * scale, bits), Real(bits)} / den;
      }
      out.values[k] = std::move(sum);
    }
    return out;
  }

  warm_quadrature<WideFloat>();
  const auto pieces = quadrature_pieces(model);
  const WideFloat beta_w = to_wide(beta);
  const bool bosonic = statistics == Statistics::Bosonic;

  parallel_points(static_cast<long>(indices.size()), [&](long k) {
    const WideFloat nu = WideFloat(2 * indices[k] + statistics_offset(statistics)) *
                         boost::math::constants::pi<WideFloat>() / beta_w;
    // Weight: rho~ for fermions, rho = rho~ tanh(beta w / 2) for bosons.
    auto weight = [&](const WideFloat& w) {
      WideFloat rho = gaussian_aux(model, w);
      if (bosonic) rho *= tanh(beta_w * w / 2);
      return rho;
    };
    // 1 / (i nu - w) = (-w - i nu) / (nu^2 + w^2). At nu = 0 the real part is
    // -tanh(beta w / 2) / w, finite at w = 0 (pieces are split there).
    auto re_part = [&](const WideFloat& w) { return -weight(w) * w / (nu * nu + w * w); };
    auto im_part = [&](const WideFloat& w) { return -weight(w) * nu / (nu * nu + w * w); };
    const WideFloat re = integrate_pieces<WideFloat>(pieces, re_part, opts);
    const WideFloat im = nu == 0 ? WideFloat(0) : integrate_pieces<WideFloat>(pieces, im_part, opts);
    out.values[k] = Complex{to_real(re, bits), to_real(im, bits)};
  });
  return out;
}

ImaginaryTimeData oracle_tau(const SpectralModel& model, double beta, const std::vector<double>& taus,
                             Statistics statistics, const OracleOptions& opts) {
  model.check();
  ImaginaryTimeData out;
  out.beta = beta;
  out.taus = taus;
  out.values.assign(taus.size(), 0.0);
  for (double t : taus) {
    if (!(t > 0.0 && t < beta)) throw std::invalid_argument("oracle_tau: tau outside (0, beta)");
  }

  if (model.kind == ModelKind::DeltaPoles) {
    const double scale = model.weight_scale();
    for (std::size_t k = 0; k < taus.size(); ++k) {
      double sum = 0.0;
      for (const auto& c : model.components) {
        const NarrowFloat t(taus[k]), w(c.center), b(beta);
        NarrowFloat kernel;
        if (statistics == Statistics::Fermionic) {
          kernel = fermi_kernel(t, w, b);
        } else {
          if (c.center == 0.0) throw std::invalid_argument("bosonic kernel is singular for a pole at omega = 0");
          kernel = w > 0 ? exp(-t * w) / (1 - exp(-b * w)) : -exp((b - t) * w) / (1 - exp(b * w));
        }
        sum -= c.weight * scale * static_cast<double>(kernel);
      }
      out.values[k] = sum;
    }
    return out;
  }

  warm_quadrature<NarrowFloat>();
  const auto pieces = quadrature_pieces(model);
  const NarrowFloat beta_n(beta);
  parallel_points(static_cast<long>(taus.size()), [&](long k) {
    const NarrowFloat tau(taus[k]);
    // K_B(tau, w) rho(w) = K_F(tau, w) rho~(w): always integrate the smooth form.
    auto integrand = [&](const NarrowFloat& w) { return -gaussian_aux(model, w) * fermi_kernel(tau, w, beta_n); };
    out.values[k] = static_cast<double>(integrate_pieces<NarrowFloat>(pieces, integrand, opts));
  });
  return out;
}

std::vector<double> chebyshev_taus(double beta, std::size_t n) {
  std::vector<double> taus(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Ascending order: k = 0 sits next to tau = 0.
    const double angle = std::numbers::pi * (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(n));
    taus[k] = 0.5 * beta * (1.0 - std::cos(angle));
  }
  return taus;
}

double l2_norm(const SpectralFunction& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v * v;
  return std::sqrt(sum * f.grid.spacing());
}

Metrics compare(const SpectralFunction& exact, const SpectralFunction& reconstructed, bool positive_half) {
  if (!(exact.grid == reconstructed.grid)) throw std::invalid_argument("compare: grids differ");
  Metrics m;
  double sq = 0.0;
  for (std::size_t i = 0; i < exact.values.size(); ++i) {
    const double d = reconstructed.values[i] - exact.values[i];
    sq += d * d;
    m.linf = std::max(m.linf, std::abs(d));
  }
  m.l2 = std::sqrt(sq * exact.grid.spacing());
  m.sum_rule_violation = std::abs(exact.integral() - reconstructed.integral());

  auto argmax = [&](const std::vector<double>& v) {
    std::size_t best = exact.grid.count();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (positive_half && exact.grid[i] <= 0.0) continue;
      if (best == exact.grid.count() || v[i] > v[best]) best = i;
    }
    return best == exact.grid.count() ? std::size_t{0} : best;
  };
  m.peak_position_error = std::abs(exact.grid[argmax(exact.values)] - exact.grid[argmax(reconstructed.values)]);
  return m;
}

}  // namespace nevac
