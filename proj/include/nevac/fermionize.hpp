#pragma once

// Fermionization of bosonic correlation data.
//
// A bosonic chi(tau) on (0, beta), continued antiperiodically to (-beta, 0),
// is the imaginary-time function of an auxiliary fermionic problem whose
// density satisfies rho(omega) = rho~(omega) tanh(beta omega / 2). The
// routines here produce chi~(i omega_n) from tau data or from bosonic
// Matsubara data, estimate the sum rule int rho~, and map rho~ back to rho.

#include <stdexcept>
#include <vector>

#include "nevac/domain.hpp"

namespace nevac {

/// 36 non-negative fermionic indices spaced roughly logarithmically up to 2188.
std::vector<long> default_target_indices();

struct FermionizeConfig {
  std::vector<long> target_indices = default_target_indices();
  RealFrequencyGrid fit_grid{-8.0, 8.0, 801};
  double tikhonov_alpha = 1e-12;
  double svd_cutoff_rel = 1e-12;
  PrecisionBits precision_bits = kDefaultPrecisionBits;  // storage width of the output

  void check() const;
};

/// All singular values of the fit kernel fell below the cutoff.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input does not reach close enough to tau = 0 and tau = beta.
class PreconditionError : public std::runtime_error {
 public:
  PreconditionError(const std::string& what, double coverage_low, double coverage_high)
      : std::runtime_error(what), low_(coverage_low), high_(coverage_high) {}
  /// tau_min / beta and tau_max / beta actually achieved.
  double coverage_low() const { return low_; }
  double coverage_high() const { return high_; }

 private:
  double low_;
  double high_;
};

/// chi~(i omega_n) = int_0^beta e^{i omega_n tau} chi(tau) d tau using a
/// piecewise cubic (four-point Lagrange) interpolant of chi with exact
/// moment integrals against the exponential. The end intervals [0, tau_0]
/// and [tau_last, beta] use the extrapolated end cubics.
MatsubaraData fermionize_tau(const ImaginaryTimeData& data, const FermionizeConfig& cfg);

struct FermionizeFit {
  MatsubaraData fermionic;
  SpectralFunction density;  // c_j ~ rho~(omega_j) on cfg.fit_grid
  std::size_t rank = 0;      // singular values kept
  double residual = 0.0;     // ||K c - chi||_2
};

/// Regularized least-squares fit of rho~ to bosonic data, then evaluation of
/// the fermionic transform of the fitted density on the target grid.
FermionizeFit fermionize_freq(const MatsubaraData& data, const FermionizeConfig& cfg);

/// The fit kernel Delta_omega tanh(beta w_j / 2) / (i nu_n - w_j), stacked as
/// real rows [Re; Im] of size 2N x J, column-major.
std::vector<double> bosonic_fit_kernel(const std::vector<long>& indices, double beta, const RealFrequencyGrid& grid);

/// S = -(chi(0+) + chi(beta-)) from cubic extrapolation of the four nodes
/// nearest each end. Requires tau_min <= 0.05 beta and tau_max >= 0.95 beta.
SumRule sum_rule_from_tau(const ImaginaryTimeData& data);

/// Least-squares fit of Im chi~(i omega_n) = -S / omega_n + m2 / omega_n^3 over
/// the top quartile of frequencies (the m2 term is dropped when fewer than
/// three points are available).
SumRule sum_rule_from_tail(const MatsubaraData& data);

/// rho(omega) = rho~(omega) tanh(beta omega / 2) on the same grid.
SpectralFunction tanh_convert(const SpectralFunction& rho_aux, double beta);

}  // namespace nevac
