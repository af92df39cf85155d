#pragma once

// Data containers shared by the continuation pipeline: Matsubara and
// imaginary-time samples, real-frequency grids and spectral functions.
// Units: hbar = k_B = 1, beta in inverse energy.

#include <complex>
#include <string>
#include <vector>

#include "nevac/precision.hpp"

namespace nevac {

enum class Statistics { Bosonic, Fermionic };

std::string to_string(Statistics s);

/// 0 for bosons, 1 for fermions: omega_n = (2n + offset) pi / beta.
inline int statistics_offset(Statistics s) { return s == Statistics::Bosonic ? 0 : 1; }

/// Matsubara frequency in double precision. Throws std::invalid_argument for beta <= 0.
double frequency_of(long index, double beta, Statistics statistics);

/// Matsubara frequency carried at the precision of `beta`.
Real frequency_of(long index, const Real& beta, Statistics statistics);

struct MatsubaraData {
  Real beta;
  Statistics statistics = Statistics::Fermionic;
  std::vector<long> indices;
  std::vector<Complex> values;
  PrecisionBits precision_bits = kDefaultPrecisionBits;

  std::size_t size() const { return indices.size(); }
  double beta_double() const { return beta.to_double(); }
};

/// Every violated invariant of `data`, one message each. Empty means valid.
std::vector<std::string> validate(const MatsubaraData& data);

/// Throws std::invalid_argument listing all diagnostics if `data` is invalid.
void require_valid(const MatsubaraData& data);

struct ImaginaryTimeData {
  double beta = 0.0;
  std::vector<double> taus;
  std::vector<std::complex<double>> values;

  std::size_t size() const { return taus.size(); }
};

std::vector<std::string> validate(const ImaginaryTimeData& data);

class RealFrequencyGrid {
 public:
  /// Uniform grid with both endpoints included; count >= 2 and lo < hi.
  RealFrequencyGrid(double omega_min, double omega_max, std::size_t count);

  double omega_min() const { return omega_min_; }
  double omega_max() const { return omega_max_; }
  std::size_t count() const { return nodes_.size(); }
  double spacing() const { return spacing_; }
  const std::vector<double>& nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }

  bool operator==(const RealFrequencyGrid& other) const;

 private:
  double omega_min_;
  double omega_max_;
  double spacing_;
  std::vector<double> nodes_;
};

struct SpectralFunction {
  RealFrequencyGrid grid;
  std::vector<double> values;
  Statistics statistics;

  SpectralFunction(RealFrequencyGrid g, std::vector<double> v, Statistics s);

  /// Trapezoid integral over the grid.
  double integral() const;
  /// Smallest value; for auxiliary (fermionic) densities this should stay above -tol.
  double min_value() const;
};

enum class SumRuleSource { TauEndpoints, TailFit, UserSupplied };

std::string to_string(SumRuleSource s);

struct SumRule {
  double value = 0.0;
  SumRuleSource source = SumRuleSource::UserSupplied;
  /// Fit residual for TailFit, extrapolation spread for TauEndpoints, 0 otherwise.
  double quality = 0.0;
};

}  // namespace nevac
