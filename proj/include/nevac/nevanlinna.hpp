#pragma once

// Nevanlinna interpolation of fermionic Matsubara data.
//
// The negated Green's function NG(z) = -G(z) is a Nevanlinna function (upper
// half plane into its closure). Composing with the Cayley map h(w) = (w-i)/(w+i)
// gives a contractive function theta(z) = h(NG(z)) on the upper half plane.
// The Schur recursion writes every contractive interpolant of the data as
//
//   theta(z) = (a(z) t(z) + b(z)) / (c(z) t(z) + d(z)),
//
// where [[a, b], [c, d]] = prod_j [[B_j(z), phi_j], [conj(phi_j) B_j(z), 1]],
// B_j(z) = (z - Y_j) / (z - conj(Y_j)), and t(z) is any contractive free
// function. All arithmetic runs at the state's precision.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nevac/domain.hpp"
#include "nevac/precision.hpp"

namespace nevac {

/// Evaluation hit a pole of a Möbius map or of the interpolant.
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A Schur parameter left the closed unit disk.
class CausalityError : public std::runtime_error {
 public:
  CausalityError(std::size_t node, const std::string& what) : std::runtime_error(what), node_(node) {}
  /// Position of the offending node within the state.
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// Cayley map (w - i) / (w + i): upper half plane onto the unit disk.
Complex mobius(const Complex& w);
/// i (1 + u) / (1 - u).
Complex inverse_mobius(const Complex& u);

struct SchurState {
  std::vector<long> indices;           // source Matsubara indices
  std::vector<Complex> nodes;          // Y_j = i omega_j
  std::vector<Complex> disk_values;    // lambda_j = h(-G(Y_j))
  std::vector<Complex> phis;           // Schur parameters, empty until computed
  std::optional<std::size_t> terminal; // first unimodular parameter; later ones are zero
  PrecisionBits precision_bits = kDefaultPrecisionBits;

  std::size_t size() const { return nodes.size(); }
  bool has_coefficients() const { return phis.size() == nodes.size(); }

  /// Keeps only the listed positions (in the given order); drops coefficients.
  SchurState subset(const std::vector<std::size_t>& positions) const;
};

/// Maps fermionic data with non-negative indices onto the disk.
SchurState disk_values(const MatsubaraData& data);

struct DroppedNode {
  long index;
  std::string reason;
};

struct PickReport {
  std::vector<std::size_t> selected;       // positions into the state
  std::vector<long> selected_indices;      // matching Matsubara indices
  double min_eigen_estimate = 0.0;         // smallest Cholesky pivot of the accepted matrix
  std::vector<DroppedNode> dropped;
  std::vector<long> boundary_flagged;      // accepted nodes with |lambda| == 1
};

/// Greedy causal subset: nodes are tried in ascending frequency and kept when
/// the Pick matrix of the kept set plus `shift` * I still factors.
PickReport pick_select(const SchurState& state, double shift = 1e-20);

/// The Pick matrix of the state, row-major, at the state's precision.
std::vector<Complex> pick_matrix(const SchurState& state);

/// Fills the Schur parameters. Throws CausalityError if one leaves the disk.
/// A parameter within sqrt(ulp) of the unit circle is snapped onto it: the
/// interpolant is then a finite Blaschke product independent of the free
/// function, and every later node must already be reproduced by it.
SchurState schur_coefficients(SchurState state);

struct TransferMatrix {
  Complex a, b, c, d;
};

/// Product of the first `count` factors evaluated at z.
TransferMatrix transfer_matrix(const SchurState& state, const Complex& z, std::size_t count);

using FreeFunction = std::function<Complex(const Complex&)>;

/// The constant free function t(z) = value.
FreeFunction constant_free_function(std::complex<double> value, PrecisionBits bits);

/// theta(z) for the full interpolant with free function `theta_free`.
Complex evaluate_theta(const SchurState& state, const FreeFunction& theta_free, const Complex& z);

/// NG(z) = h^-1(theta(z)).
Complex evaluate_ng(const SchurState& state, const FreeFunction& theta_free, const Complex& z);

struct EvaluationConfig {
  double eta = 1e-3;
  RealFrequencyGrid grid{-8.0, 8.0, 2001};
};

/// rho(omega) = Im NG(omega + i eta) / pi on every grid node. Grid nodes are
/// evaluated in parallel; the result does not depend on the thread count.
SpectralFunction extract_spectral(const SchurState& state, const FreeFunction& theta_free,
                                  const EvaluationConfig& cfg);

/// Single-threaded reference for extract_spectral.
SpectralFunction extract_spectral_serial(const SchurState& state, const FreeFunction& theta_free,
                                         const EvaluationConfig& cfg);

}  // namespace nevac
