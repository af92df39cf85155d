#pragma once

// Hardy-basis optimization of the free Schur function.
//
// The free function is expanded as t(z) = sum_k (a_k + i b_k) f_k(z) with
// f_k(z) = (z - i)^k / (sqrt(pi) (z + i)^{k+1}), and the coefficients minimize
//
//   F = (S - int rho~)^2 + lambda int (rho~'')^2 d omega
//
// on the evaluation grid. Coefficients with |t| > 1 anywhere on the check set
// are inadmissible and cost +infinity.

#include <complex>
#include <vector>

#include "nevac/domain.hpp"
#include "nevac/lbfgs.hpp"
#include "nevac/nevanlinna.hpp"

namespace nevac {

struct HardyCoefficients {
  int order = 25;
  std::vector<double> coeffs;  // interleaved a_0, b_0, a_1, b_1, ...

  static HardyCoefficients zeros(int order);
  std::complex<double> coefficient(int k) const { return {coeffs[2 * k], coeffs[2 * k + 1]}; }
  void check() const;
};

std::complex<double> hardy_basis(int k, std::complex<double> z);
std::complex<double> hardy_eval(const HardyCoefficients& c, std::complex<double> z);
Complex hardy_eval(const HardyCoefficients& c, const Complex& z);

/// The expansion as a free function for evaluate_theta / extract_spectral.
FreeFunction hardy_free_function(const HardyCoefficients& c);

struct CostConfig {
  double lambda = 1e-4;
  SumRule sum_rule;
  RealFrequencyGrid grid{-8.0, 8.0, 2001};
  double eta = 1e-3;

  void check() const;
};

/// Points where |t(z)| <= 1 is enforced: the grid at omega + i eta and a
/// 21 x 11 lattice over [-10, 10] x [1e-2, 10] (imaginary parts log-spaced).
std::vector<std::complex<double>> admissibility_check_set(const RealFrequencyGrid& grid, double eta);

/// Cost evaluator for one Schur state. Construction evaluates the transfer
/// matrices on every grid node once; afterwards each evaluation only maps the
/// free-function values through them.
class HardyProblem {
 public:
  HardyProblem(const SchurState& state, CostConfig cfg, int order);

  int order() const { return order_; }
  const CostConfig& config() const { return cfg_; }

  bool admissible(const HardyCoefficients& c) const;
  /// max |t(z)| over the check set.
  double max_free_modulus(const HardyCoefficients& c) const;

  /// rho~ on the grid; empty if a grid node hits the interpolant's pole.
  std::vector<double> spectrum(const HardyCoefficients& c) const;

  /// +inf for inadmissible coefficients.
  double cost(const HardyCoefficients& c) const;
  /// Cost and exact gradient; +inf (gradient untouched) for inadmissible coefficients.
  double cost_and_gradient(const HardyCoefficients& c, std::vector<double>& grad) const;

 private:
  // theta = (a t + b) / (c t + d) rewritten as NG = i P / Q with
  // P = (a + c) t + (b + d), Q = (c - a) t + (d - b), dNG/dt = i D / Q^2.
  struct NodeMap {
    Complex p_slope, p_offset, q_slope, q_offset, d;
  };

  bool evaluate(const HardyCoefficients& c, std::vector<double>& rho, std::vector<std::complex<double>>* dng) const;
  double objective(const HardyCoefficients& c, std::vector<double>* grad) const;

  CostConfig cfg_;
  int order_;
  PrecisionBits bits_;
  Real inv_pi_;
  std::vector<NodeMap> nodes_;
  std::vector<std::complex<double>> grid_basis_;   // [node * order + k]
  std::vector<std::complex<double>> check_basis_;  // lattice part of the check set
};

/// Transfer-map coefficients on every grid node, evaluated in parallel.
std::vector<TransferMatrix> grid_transfer_matrices(const SchurState& state, const RealFrequencyGrid& grid, double eta);
/// Single-threaded reference for grid_transfer_matrices.
std::vector<TransferMatrix> grid_transfer_matrices_serial(const SchurState& state, const RealFrequencyGrid& grid,
                                                          double eta);

double cost(const HardyCoefficients& c, const SchurState& state, const CostConfig& cfg);
/// Throws std::domain_error if the cost is infinite at `c`.
std::vector<double> gradient(const HardyCoefficients& c, const SchurState& state, const CostConfig& cfg);

struct OptimizeResult {
  HardyCoefficients coeffs;
  double cost = 0.0;
  std::vector<TraceEntry> trace;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  std::size_t evaluations = 0;

  bool converged() const { return status != LbfgsStatus::MaxIterations; }
};

OptimizeResult optimize(const HardyProblem& problem, const HardyCoefficients& init, const LbfgsOptions& opts = {});
OptimizeResult optimize(const SchurState& state, const CostConfig& cfg, const HardyCoefficients& init,
                        const LbfgsOptions& opts = {});

}  // namespace nevac
