#pragma once

// Synthetic spectral models and an independent Lehmann-integration oracle.
//
// The oracle integrates the spectral representation with adaptive
// Gauss-Kronrod quadrature in Boost.Multiprecision arithmetic, a separate code
// path from the pipeline's own extended-precision types.

#include <vector>

#include "nevac/domain.hpp"

namespace nevac {

enum class ModelKind { GaussianMixture, DeltaPoles };

struct ModelComponent {
  double weight;
  double center;
  double width;
};

/// For GaussianMixture the components define the auxiliary density rho~(omega)
/// and rho(omega) = rho~(omega) tanh(beta omega / 2). DeltaPoles are sampled in
/// closed form as sum_i w_i / (i omega_n - c_i) for either statistics, i.e. the
/// weights belong to the density of the requested statistics.
struct SpectralModel {
  ModelKind kind = ModelKind::GaussianMixture;
  std::vector<ModelComponent> components;
  bool normalize_aux = true;

  /// Throws std::invalid_argument on non-positive weights or widths that do not match the kind.
  void check() const;
  /// Weight multiplier applied by normalize_aux.
  double weight_scale() const;

  /// Two equal Gaussians at +-center with width sigma, unit total weight.
  static SpectralModel symmetric_double_peak(double center = 2.0, double sigma = 0.5);
  static SpectralModel single_pole(double weight, double center);
};

enum class DensityKind { Aux, Bosonic };

double model_density(const SpectralModel& model, double omega, double beta, DensityKind which);

/// Density sampled on every grid node (statistics tag Fermionic for Aux).
SpectralFunction model_spectral(const SpectralModel& model, const RealFrequencyGrid& grid, double beta,
                                DensityKind which);

struct OracleOptions {
  double rel_tolerance = 1e-13;
  PrecisionBits precision_bits = kDefaultPrecisionBits;  // width of the returned values
  unsigned max_depth = 60;
};

/// Thrown when the adaptive quadrature cannot reach the requested tolerance.
class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, double achieved) : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

MatsubaraData oracle_matsubara(const SpectralModel& model, const Real& beta, const std::vector<long>& indices,
                               Statistics statistics, const OracleOptions& opts = {});

/// chi(tau) = -int K(tau, omega) rho(omega). For Gaussian mixtures the bosonic
/// and fermionic data coincide on (0, beta) because K_B rho = K_F rho~.
ImaginaryTimeData oracle_tau(const SpectralModel& model, double beta, const std::vector<double>& taus,
                             Statistics statistics, const OracleOptions& opts = {});

/// n Chebyshev points of the first kind mapped onto (0, beta).
std::vector<double> chebyshev_taus(double beta, std::size_t n);

struct Metrics {
  double l2 = 0.0;
  double linf = 0.0;
  double sum_rule_violation = 0.0;
  double peak_position_error = 0.0;
};

/// Reconstruction error. Peak positions are compared on the omega > 0 half
/// when `positive_half` is set (symmetric models have mirrored peaks).
Metrics compare(const SpectralFunction& exact, const SpectralFunction& reconstructed, bool positive_half = true);

/// sqrt(sum f^2 d omega).
double l2_norm(const SpectralFunction& f);

}  // namespace nevac
