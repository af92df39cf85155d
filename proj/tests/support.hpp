#pragma once

// Shared fixtures for the unit tests.

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "nevac/domain.hpp"
#include "nevac/precision.hpp"

namespace nevac::testing {

inline double rel_error(const Complex& got, const Complex& want) {
  const Real scale = abs(want);
  return (abs(got - want) / (scale.is_zero() ? Real(1.0, scale.precision()) : scale)).to_double();
}

inline double rel_error(std::complex<double> got, std::complex<double> want) {
  const double scale = std::abs(want);
  return std::abs(got - want) / (scale == 0.0 ? 1.0 : scale);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nevac_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// 1 / (tanh(beta w0 / 2) (i omega_n - w0)): the fermionized single pole.
inline std::complex<double> fermionized_pole(long n, double beta, double w0) {
  const double wn = (2.0 * n + 1.0) * M_PI / beta;
  return 1.0 / (std::tanh(beta * w0 / 2.0) * std::complex<double>(-w0, wn));
}

}  // namespace nevac::testing
