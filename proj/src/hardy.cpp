#include "nevac/hardy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nevac {

using cdouble = std::complex<double>;

namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

// f_0 .. f_{order-1} at z, appended to `out`.
void append_basis(int order, cdouble z, std::vector<cdouble>& out) {
  const cdouble zi = z + cdouble(0.0, 1.0);
  const cdouble ratio = (z - cdouble(0.0, 1.0)) / zi;
  cdouble f = kInvSqrtPi / zi;
  for (int k = 0; k < order; ++k) {
    out.push_back(f);
    f *= ratio;
  }
}

cdouble expand(const HardyCoefficients& c, const cdouble* basis) {
  cdouble sum = 0.0;
  for (int k = 0; k < c.order; ++k) sum += c.coefficient(k) * basis[k];
  return sum;
}

}  // namespace

HardyCoefficients HardyCoefficients::zeros(int order) {
  if (order < 1) throw std::invalid_argument("Hardy order must be at least 1");
  return {order, std::vector<double>(2 * static_cast<std::size_t>(order), 0.0)};
}

void HardyCoefficients::check() const {
  if (order < 1) throw std::invalid_argument("Hardy order must be at least 1");
  if (coeffs.size() != 2 * static_cast<std::size_t>(order)) {
    throw std::invalid_argument("Hardy coefficient vector must hold 2 * order reals");
  }
}

cdouble hardy_basis(int k, cdouble z) {
  const cdouble zi = z + cdouble(0.0, 1.0);
  if (zi == cdouble(0.0, 0.0)) throw PoleError("Hardy basis pole at z = -i");
  return kInvSqrtPi / zi * std::pow((z - cdouble(0.0, 1.0)) / zi, k);
}

cdouble hardy_eval(const HardyCoefficients& c, cdouble z) {
  c.check();
  if (z == cdouble(0.0, -1.0)) throw PoleError("Hardy basis pole at z = -i");
  std::vector<cdouble> basis;
  basis.reserve(static_cast<std::size_t>(c.order));
  append_basis(c.order, z, basis);
  return expand(c, basis.data());
}

Complex hardy_eval(const HardyCoefficients& c, const Complex& z) {
  c.check();
  const PrecisionBits bits = z.precision();
  const Complex i = imaginary_unit(bits);
  const Complex zi = z + i;
  if (zi.re.is_zero() && zi.im.is_zero()) throw PoleError("Hardy basis pole at z = -i");
  const Complex ratio = (z - i) / zi;
  const Real inv_sqrt_pi = Real(1.0, bits) / sqrt(Real::pi(bits));
  Complex f = Complex{inv_sqrt_pi, Real(bits)} / zi;
  Complex sum(bits);
  for (int k = 0; k < c.order; ++k) {
    sum += Complex(c.coefficient(k), bits) * f;
    f *= ratio;
  }
  return sum;
}

FreeFunction hardy_free_function(const HardyCoefficients& c) {
  c.check();
  return [c](const Complex& z) { return hardy_eval(c, z); };
}

void CostConfig::check() const {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
}

std::vector<cdouble> admissibility_check_set(const RealFrequencyGrid& grid, double eta) {
  std::vector<cdouble> points;
  points.reserve(grid.count() + 21 * 11);
  for (double w : grid.nodes()) points.emplace_back(w, eta);
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 11; ++j) {
      points.emplace_back(-10.0 + i, std::pow(10.0, -2.0 + 0.3 * j));
    }
  }
  return points;
}

std::vector<TransferMatrix> grid_transfer_matrices(const SchurState& state, const RealFrequencyGrid& grid,
                                                   double eta) {
  const PrecisionBits bits = state.precision_bits;
  const auto n = static_cast<long>(grid.count());
  std::vector<TransferMatrix> out(grid.count(), TransferMatrix{Complex(bits), Complex(bits), Complex(bits), Complex(bits)});
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    out[i] = transfer_matrix(state, Complex{Real(grid[i], bits), Real(eta, bits)}, state.size());
  }
  return out;
}

std::vector<TransferMatrix> grid_transfer_matrices_serial(const SchurState& state, const RealFrequencyGrid& grid,
                                                          double eta) {
  const PrecisionBits bits = state.precision_bits;
  std::vector<TransferMatrix> out;
  out.reserve(grid.count());
  for (double w : grid.nodes()) out.push_back(transfer_matrix(state, Complex{Real(w, bits), Real(eta, bits)}, state.size()));
  return out;
}

HardyProblem::HardyProblem(const SchurState& state, CostConfig cfg, int order)
    : cfg_(std::move(cfg)), order_(order), bits_(state.precision_bits), inv_pi_(1.0, state.precision_bits) {
  cfg_.check();
  if (order < 1) throw std::invalid_argument("Hardy order must be at least 1");
  if (!state.has_coefficients()) throw std::invalid_argument("HardyProblem needs Schur parameters");
  inv_pi_ /= Real::pi(bits_);

  const auto transfers = grid_transfer_matrices(state, cfg_.grid, cfg_.eta);
  nodes_.reserve(transfers.size());
  for (const auto& t : transfers) {
    NodeMap m{t.a + t.c, t.b + t.d, t.c - t.a, t.d - t.b, Complex(bits_)};
    m.d = m.p_slope * m.q_offset - m.p_offset * m.q_slope;
    nodes_.push_back(std::move(m));
  }

  grid_basis_.reserve(cfg_.grid.count() * static_cast<std::size_t>(order));
  for (double w : cfg_.grid.nodes()) append_basis(order, cdouble(w, cfg_.eta), grid_basis_);
  const auto check_points = admissibility_check_set(cfg_.grid, cfg_.eta);
  for (std::size_t i = cfg_.grid.count(); i < check_points.size(); ++i) append_basis(order, check_points[i], check_basis_);
}

double HardyProblem::max_free_modulus(const HardyCoefficients& c) const {
  c.check();
  if (c.order != order_) throw std::invalid_argument("Hardy order does not match the problem");
  double worst = 0.0;
  const auto ord = static_cast<std::size_t>(order_);
  for (std::size_t i = 0; i < grid_basis_.size() / ord; ++i) worst = std::max(worst, std::abs(expand(c, &grid_basis_[i * ord])));
  for (std::size_t i = 0; i < check_basis_.size() / ord; ++i) worst = std::max(worst, std::abs(expand(c, &check_basis_[i * ord])));
  return worst;
}

bool HardyProblem::admissible(const HardyCoefficients& c) const { return max_free_modulus(c) <= 1.0; }

bool HardyProblem::evaluate(const HardyCoefficients& c, std::vector<double>& rho, std::vector<cdouble>* dng) const {
  const auto n = static_cast<long>(nodes_.size());
  const auto ord = static_cast<std::size_t>(order_);
  rho.assign(nodes_.size(), 0.0);
  if (dng != nullptr) dng->assign(nodes_.size(), 0.0);
  std::atomic<bool> pole{false};

#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    const NodeMap& m = nodes_[i];
    const Complex t(expand(c, &grid_basis_[static_cast<std::size_t>(i) * ord]), bits_);
    const Complex p = m.p_slope * t + m.p_offset;
    const Complex q = m.q_slope * t + m.q_offset;
    const Real q2 = norm(q);
    if (q2.is_zero()) {
      pole = true;
      continue;
    }
    // rho = Im(i P / Q) / pi = Re(P conj(Q)) / (pi |Q|^2)
    rho[i] = ((p.re * q.re + p.im * q.im) * inv_pi_ / q2).to_double();
    if (dng != nullptr) {
      const Complex g = m.d / (q * q);
      (*dng)[i] = cdouble(-g.im.to_double(), g.re.to_double());  // i D / Q^2
    }
  }
  return !pole;
}

std::vector<double> HardyProblem::spectrum(const HardyCoefficients& c) const {
  c.check();
  std::vector<double> rho;
  if (!evaluate(c, rho, nullptr)) return {};
  return rho;
}

double HardyProblem::cost(const HardyCoefficients& c) const { return objective(c, nullptr); }

double HardyProblem::cost_and_gradient(const HardyCoefficients& c, std::vector<double>& grad) const {
  return objective(c, &grad);
}

double HardyProblem::objective(const HardyCoefficients& c, std::vector<double>* grad) const {
  if (!admissible(c)) return std::numeric_limits<double>::infinity();
  std::vector<double> rho;
  std::vector<cdouble> dng;
  if (!evaluate(c, rho, grad != nullptr ? &dng : nullptr)) return std::numeric_limits<double>::infinity();

  const std::size_t n = rho.size();
  const double dw = cfg_.grid.spacing();
  double integral = 0.5 * (rho.front() + rho.back());
  for (std::size_t i = 1; i + 1 < n; ++i) integral += rho[i];
  integral *= dw;
  const double mismatch = cfg_.sum_rule.value - integral;

  const double inv_dw2 = 1.0 / (dw * dw);
  std::vector<double> curvature(n, 0.0);
  double smooth = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    curvature[i] = (rho[i + 1] - 2.0 * rho[i] + rho[i - 1]) * inv_dw2;
    smooth += curvature[i] * curvature[i];
  }
  smooth *= dw;
  const double f = mismatch * mismatch + cfg_.lambda * smooth;
  if (grad == nullptr) return f;

  // dF/drho_i
  std::vector<double> dfdrho(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = (i == 0 || i + 1 == n) ? 0.5 * dw : dw;
    dfdrho[i] = -2.0 * mismatch * weight;
  }
  const double scale = 2.0 * cfg_.lambda * dw * inv_dw2;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    dfdrho[i - 1] += scale * curvature[i];
    dfdrho[i] -= 2.0 * scale * curvature[i];
    dfdrho[i + 1] += scale * curvature[i];
  }

  // drho_i/da_k = Im(g_i f_k) / pi, drho_i/db_k = Re(g_i f_k) / pi.
  const auto ord = static_cast<std::size_t>(order_);
  std::vector<cdouble> acc(ord, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const cdouble h = dfdrho[i] * dng[i] / std::numbers::pi;
    const cdouble* basis = &grid_basis_[i * ord];
    for (std::size_t k = 0; k < ord; ++k) acc[k] += h * basis[k];
  }
  grad->assign(2 * ord, 0.0);
  for (std::size_t k = 0; k < ord; ++k) {
    (*grad)[2 * k] = acc[k].imag();
    (*grad)[2 * k + 1] = acc[k].real();
  }
  return f;
}

double cost(const HardyCoefficients& c, const SchurState& state, const CostConfig& cfg) {
  return HardyProblem(state, cfg, c.order).cost(c);
}

std::vector<double> gradient(const HardyCoefficients& c, const SchurState& state, const CostConfig& cfg) {
  const HardyProblem problem(state, cfg, c.order);
  std::vector<double> grad;
  const double f = problem.cost_and_gradient(c, grad);
  if (!std::isfinite(f)) throw std::domain_error("gradient: cost is infinite at these coefficients");
  return grad;
}

OptimizeResult optimize(const HardyProblem& problem, const HardyCoefficients& init, const LbfgsOptions& opts) {
  init.check();
  if (init.order != problem.order()) throw std::invalid_argument("initial coefficients have the wrong order");
  const int order = init.order;
  const Objective objective = [&](const std::vector<double>& x, std::vector<double>& g) {
    return problem.cost_and_gradient(HardyCoefficients{order, x}, g);
  };
  const LbfgsResult run = lbfgs_minimize(objective, init.coeffs, opts);
  return {HardyCoefficients{order, run.x}, run.cost, run.trace, run.status, run.evaluations};
}

OptimizeResult optimize(const SchurState& state, const CostConfig& cfg, const HardyCoefficients& init,
                        const LbfgsOptions& opts) {
  const HardyProblem problem(state, cfg, init.order);
  return optimize(problem, init, opts);
}

}  // namespace nevac
