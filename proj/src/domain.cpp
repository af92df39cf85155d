#include "nevac/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nevac {

std::string to_string(Statistics s) { return s == Statistics::Bosonic ? "bosonic" : "fermionic"; }

std::string to_string(SumRuleSource s) {
  switch (s) {
    case SumRuleSource::TauEndpoints: return "tau-endpoints";
    case SumRuleSource::TailFit: return "tail-fit";
    case SumRuleSource::UserSupplied: return "user";
  }
  return "unknown";
}

double frequency_of(long index, double beta, Statistics statistics) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  return static_cast<double>(2 * index + statistics_offset(statistics)) * std::numbers::pi / beta;
}

Real frequency_of(long index, const Real& beta, Statistics statistics) {
  if (beta.sign() <= 0) throw std::invalid_argument("beta must be positive");
  const PrecisionBits bits = beta.precision();
  return Real(2 * index + statistics_offset(statistics), bits) * Real::pi(bits) / beta;
}

std::vector<std::string> validate(const MatsubaraData& data) {
  std::vector<std::string> issues;
  if (data.beta.sign() <= 0) issues.emplace_back("beta must be positive");
  if (data.values.size() != data.indices.size()) {
    std::ostringstream msg;
    msg << "length mismatch: " << data.indices.size() << " indices but " << data.values.size() << " values";
    issues.push_back(msg.str());
  }
  for (std::size_t i = 1; i < data.indices.size(); ++i) {
    std::ostringstream msg;
    if (data.indices[i] == data.indices[i - 1]) {
      msg << "duplicate index " << data.indices[i] << " at position " << i;
      issues.push_back(msg.str());
    } else if (data.indices[i] < data.indices[i - 1]) {
      msg << "indices not increasing at position " << i << " (" << data.indices[i - 1] << " then "
          << data.indices[i] << ")";
      issues.push_back(msg.str());
    }
  }
  if (data.precision_bits < MPFR_PREC_MIN) issues.emplace_back("precision_bits must be positive");
  return issues;
}

void require_valid(const MatsubaraData& data) {
  const auto issues = validate(data);
  if (issues.empty()) return;
  std::string msg = "invalid Matsubara data:";
  for (const auto& issue : issues) msg += "\n  " + issue;
  throw std::invalid_argument(msg);
}

std::vector<std::string> validate(const ImaginaryTimeData& data) {
  std::vector<std::string> issues;
  if (!(data.beta > 0.0)) issues.emplace_back("beta must be positive");
  if (data.taus.empty()) issues.emplace_back("empty tau grid");
  if (data.values.size() != data.taus.size()) issues.emplace_back("length mismatch between taus and values");
  for (std::size_t i = 0; i < data.taus.size(); ++i) {
    const double t = data.taus[i];
    if (!(t > 0.0 && t < data.beta)) {
      std::ostringstream msg;
      msg << "tau " << t << " at position " << i << " outside (0, beta)";
      issues.push_back(msg.str());
    }
    if (i > 0 && !(t > data.taus[i - 1])) {
      std::ostringstream msg;
      msg << "taus not strictly increasing at position " << i;
      issues.push_back(msg.str());
    }
  }
  return issues;
}

RealFrequencyGrid::RealFrequencyGrid(double omega_min, double omega_max, std::size_t count)
    : omega_min_(omega_min), omega_max_(omega_max) {
  if (!(omega_min < omega_max)) throw std::invalid_argument("grid requires omega_min < omega_max");
  if (count < 2) throw std::invalid_argument("grid requires at least two nodes");
  const auto last = static_cast<double>(count - 1);
  spacing_ = (omega_max - omega_min) / last;
  nodes_.resize(count);
  // Weighted form keeps grids with omega_min = -omega_max exactly antisymmetric.
  for (std::size_t i = 0; i < count; ++i) {
    const auto k = static_cast<double>(i);
    nodes_[i] = ((last - k) * omega_min + k * omega_max) / last;
  }
  nodes_.front() = omega_min;
  nodes_.back() = omega_max;
}

bool RealFrequencyGrid::operator==(const RealFrequencyGrid& other) const {
  return omega_min_ == other.omega_min_ && omega_max_ == other.omega_max_ && count() == other.count();
}

SpectralFunction::SpectralFunction(RealFrequencyGrid g, std::vector<double> v, Statistics s)
    : grid(std::move(g)), values(std::move(v)), statistics(s) {
  if (values.size() != grid.count()) throw std::invalid_argument("spectral values do not match grid size");
}

double SpectralFunction::integral() const {
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * grid.spacing();
}

double SpectralFunction::min_value() const { return *std::min_element(values.begin(), values.end()); }

}  // namespace nevac
