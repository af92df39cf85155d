#include "nevac/nevanlinna.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace nevac {

namespace {

// |z| below this many ulps of `scale` counts as zero.
bool negligible(const Complex& z, const Real& scale, PrecisionBits bits) {
  return abs(z) <= Real(10.0 * ulp(bits), bits) * scale;
}

}  // namespace

Complex mobius(const Complex& w) {
  const PrecisionBits bits = w.precision();
  const Complex i = imaginary_unit(bits);
  const Complex den = w + i;
  if (den.re.is_zero() && den.im.is_zero()) throw PoleError("mobius: pole at w = -i");
  return (w - i) / den;
}

Complex inverse_mobius(const Complex& u) {
  const PrecisionBits bits = u.precision();
  const Complex one{Real(1.0, bits), Real(bits)};
  const Complex den = one - u;
  if (den.re.is_zero() && den.im.is_zero()) throw PoleError("inverse_mobius: pole at u = 1");
  return imaginary_unit(bits) * (one + u) / den;
}

SchurState SchurState::subset(const std::vector<std::size_t>& positions) const {
  SchurState out;
  out.precision_bits = precision_bits;
  for (std::size_t p : positions) {
    out.indices.push_back(indices.at(p));
    out.nodes.push_back(nodes.at(p));
    out.disk_values.push_back(disk_values.at(p));
  }
  return out;
}

SchurState disk_values(const MatsubaraData& data) {
  require_valid(data);
  if (data.statistics != Statistics::Fermionic) {
    throw std::invalid_argument("disk_values needs fermionic data; fermionize bosonic input first");
  }
  SchurState state;
  state.precision_bits = data.precision_bits;
  const PrecisionBits bits = data.precision_bits;
  Real beta(bits);
  beta = data.beta;
  mpfr_prec_round(beta.raw(), bits, MPFR_RNDN);
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data.indices[k] < 0) {
      throw std::invalid_argument("disk_values needs non-negative Matsubara indices, got " +
                                  std::to_string(data.indices[k]));
    }
    state.indices.push_back(data.indices[k]);
    state.nodes.emplace_back(Real(bits), frequency_of(data.indices[k], beta, Statistics::Fermionic));
    Complex ng = -data.values[k];
    mpfr_prec_round(ng.re.raw(), bits, MPFR_RNDN);
    mpfr_prec_round(ng.im.raw(), bits, MPFR_RNDN);
    state.disk_values.push_back(mobius(ng));
  }
  return state;
}

std::vector<Complex> pick_matrix(const SchurState& state) {
  const std::size_t m = state.size();
  const PrecisionBits bits = state.precision_bits;
  const Complex one{Real(1.0, bits), Real(bits)};
  std::vector<Complex> h;
  h.reserve(m);
  for (const auto& y : state.nodes) h.push_back(mobius(y));
  std::vector<Complex> p;
  p.reserve(m * m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      p.push_back((one - state.disk_values[j] * conj(state.disk_values[k])) / (one - h[j] * conj(h[k])));
    }
  }
  return p;
}

PickReport pick_select(const SchurState& state, double shift) {
  const std::size_t m = state.size();
  const PrecisionBits bits = state.precision_bits;
  const Real one(1.0, bits);
  const Real shift_x(shift, bits);
  const Real boundary_tol(10.0 * ulp(bits), bits);
  const std::vector<Complex> p = pick_matrix(state);

  PickReport report;
  // Rows of the lower Cholesky factor of the accepted principal submatrix.
  std::vector<std::vector<Complex>> chol;
  std::vector<Real> pivots;
  Real min_pivot(std::numeric_limits<double>::infinity(), bits);

  for (std::size_t j = 0; j < m; ++j) {
    const Real mag = abs(state.disk_values[j]);
    if (mag > one + boundary_tol) {
      report.dropped.push_back({state.indices[j], "disk violation"});
      continue;
    }
    const bool on_boundary = abs(mag - one) <= boundary_tol;

    // Solve L x = p(sel, j) by forward substitution; new pivot q - |x|^2.
    const std::size_t n = report.selected.size();
    std::vector<Complex> row;
    row.reserve(n + 1);
    Real pivot = p[j * m + j].re + shift_x;
    for (std::size_t r = 0; r < n; ++r) {
      Complex acc = p[report.selected[r] * m + j];
      for (std::size_t c = 0; c < r; ++c) acc -= chol[r][c] * conj(row[c]);
      // x_r = acc / L_rr; stored conjugated so that row * L^H reproduces p(j, sel).
      Complex x = acc;
      x.re /= chol[r][r].re;
      x.im /= chol[r][r].re;
      row.push_back(conj(x));
      pivot -= norm(x);
    }
    if (!(pivot.sign() > 0)) {
      report.dropped.push_back({state.indices[j], on_boundary ? "boundary value breaks factorization"
                                                               : "Pick matrix not positive semidefinite"});
      continue;
    }
    row.emplace_back(sqrt(pivot), Real(bits));
    chol.push_back(std::move(row));
    if (pivot < min_pivot) min_pivot = pivot;
    pivots.push_back(pivot);
    report.selected.push_back(j);
    report.selected_indices.push_back(state.indices[j]);
    if (on_boundary) report.boundary_flagged.push_back(state.indices[j]);
  }
  report.min_eigen_estimate = report.selected.empty() ? 0.0 : min_pivot.to_double();
  return report;
}

TransferMatrix transfer_matrix(const SchurState& state, const Complex& z, std::size_t count) {
  const PrecisionBits bits = state.precision_bits;
  TransferMatrix t{Complex{Real(1.0, bits), Real(bits)}, Complex(bits), Complex(bits),
                   Complex{Real(1.0, bits), Real(bits)}};
  for (std::size_t j = 0; j < count; ++j) {
    const Complex& y = state.nodes[j];
    const Complex& phi = state.phis[j];
    const Complex blaschke = (z - y) / (z - conj(y));
    const Complex phi_bar = conj(phi);
    // [a b; c d] * [B phi; conj(phi) B 1]
    Complex a = (t.a + t.b * phi_bar) * blaschke;
    Complex b = t.a * phi + t.b;
    Complex c = (t.c + t.d * phi_bar) * blaschke;
    Complex d = t.c * phi + t.d;
    t = {std::move(a), std::move(b), std::move(c), std::move(d)};
  }
  return t;
}

SchurState schur_coefficients(SchurState state) {
  const PrecisionBits bits = state.precision_bits;
  const Real limit(1.0 + 10.0 * ulp(bits), bits);
  const Real boundary_tol(std::sqrt(ulp(bits)), bits);
  const Real one(1.0, bits);
  state.phis.clear();
  state.phis.reserve(state.size());
  state.terminal.reset();
  for (std::size_t k = 0; k < state.size(); ++k) {
    const Complex& lambda = state.disk_values[k];
    if (state.terminal) {
      // The interpolant is already fixed; the node must lie on it.
      const TransferMatrix t = transfer_matrix(state, state.nodes[k], k);
      if (negligible(t.d, abs(t.b) + abs(t.d), bits) || abs(t.b / t.d - lambda) > boundary_tol) {
        throw CausalityError(k, "node " + std::to_string(k) + " (index " + std::to_string(state.indices[k]) +
                                    ") disagrees with the boundary interpolant fixed at node " +
                                    std::to_string(*state.terminal));
      }
      state.phis.emplace_back(bits);
      continue;
    }
    Complex phi(bits);
    if (k == 0) {
      phi = lambda;
    } else {
      const TransferMatrix t = transfer_matrix(state, state.nodes[k], k);
      const Complex den = t.a - lambda * t.c;
      if (negligible(den, abs(t.a) + abs(t.c), bits)) {
        throw CausalityError(k, "Schur recursion degenerate at node " + std::to_string(k) + " (index " +
                                    std::to_string(state.indices[k]) + ")");
      }
      phi = (lambda * t.d - t.b) / den;
    }
    const Real mag = abs(phi);
    if (abs(mag - one) <= boundary_tol) {
      phi.re /= mag;
      phi.im /= mag;
      state.terminal = k;
    } else if (mag > limit) {
      std::ostringstream msg;
      msg << "Schur parameter left the unit disk at node " << k << " (index " << state.indices[k]
          << ", |phi| = " << mag.to_string(20) << "); raise precision_bits or drop the node";
      throw CausalityError(k, msg.str());
    }
    state.phis.push_back(std::move(phi));
  }
  return state;
}

FreeFunction constant_free_function(std::complex<double> value, PrecisionBits bits) {
  return [c = Complex(value, bits)](const Complex&) { return c; };
}

Complex evaluate_theta(const SchurState& state, const FreeFunction& theta_free, const Complex& z) {
  if (!state.has_coefficients()) throw std::logic_error("evaluate_theta: Schur parameters not computed");
  const PrecisionBits bits = state.precision_bits;
  const Complex free = theta_free(z);
  if (state.size() == 0) return free;
  const TransferMatrix t = transfer_matrix(state, z, state.size());
  const Complex den = t.c * free + t.d;
  if (negligible(den, abs(t.c) + abs(t.d), bits)) throw PoleError("evaluate_theta: denominator vanishes");
  return (t.a * free + t.b) / den;
}

Complex evaluate_ng(const SchurState& state, const FreeFunction& theta_free, const Complex& z) {
  return inverse_mobius(evaluate_theta(state, theta_free, z));
}

namespace {

double spectral_value(const SchurState& state, const FreeFunction& theta_free, double omega, double eta,
                      const Real& inv_pi) {
  const PrecisionBits bits = state.precision_bits;
  const Complex z{Real(omega, bits), Real(eta, bits)};
  try {
    return (evaluate_ng(state, theta_free, z).im * inv_pi).to_double();
  } catch (const PoleError& e) {
    std::ostringstream msg;
    msg << e.what() << " at omega = " << omega;
    throw PoleError(msg.str());
  }
}

void check_eval_config(const EvaluationConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("eta must be positive");
}

}  // namespace

SpectralFunction extract_spectral(const SchurState& state, const FreeFunction& theta_free,
                                  const EvaluationConfig& cfg) {
  check_eval_config(cfg);
  const Real inv_pi = Real(1.0, state.precision_bits) / Real::pi(state.precision_bits);
  const auto& nodes = cfg.grid.nodes();
  const auto n = static_cast<long>(nodes.size());
  std::vector<double> values(nodes.size());
  std::exception_ptr failure;
  long failed_at = n;

#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    try {
      values[i] = spectral_value(state, theta_free, nodes[i], cfg.eta, inv_pi);
    } catch (...) {
#pragma omp critical(nevac_extract_failure)
      {
        // Report the lowest failing node so the error is thread-count independent.
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return SpectralFunction(cfg.grid, std::move(values), Statistics::Fermionic);
}

SpectralFunction extract_spectral_serial(const SchurState& state, const FreeFunction& theta_free,
                                         const EvaluationConfig& cfg) {
  check_eval_config(cfg);
  const Real inv_pi = Real(1.0, state.precision_bits) / Real::pi(state.precision_bits);
  std::vector<double> values;
  values.reserve(cfg.grid.count());
  for (double omega : cfg.grid.nodes()) values.push_back(spectral_value(state, theta_free, omega, cfg.eta, inv_pi));
  return SpectralFunction(cfg.grid, std::move(values), Statistics::Fermionic);
}

}  // namespace nevac
