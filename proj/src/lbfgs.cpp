#include "nevac/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nevac {

std::string to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::GradientConverged: return "gradient-converged";
    case LbfgsStatus::StepCollapsed: return "step-collapsed";
    case LbfgsStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> search_direction(const std::deque<CurvaturePair>& memory, const std::vector<double>& g) {
  std::vector<double> q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * dot(memory[i].s, q);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] -= alpha[i] * memory[i].y[k];
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * dot(memory[i].y, q);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += (alpha[i] - beta) * memory[i].s[k];
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double> x0, const LbfgsOptions& opts) {
  LbfgsResult result;
  std::vector<double> x = std::move(x0);
  std::vector<double> g(x.size(), 0.0);
  double f = objective(x, g);
  ++result.evaluations;
  if (!std::isfinite(f)) throw std::invalid_argument("lbfgs: starting point is infeasible");

  std::deque<CurvaturePair> memory;
  result.trace.push_back({0, f, inf_norm(g), 0.0});

  std::vector<double> x_new(x.size());
  std::vector<double> g_new(x.size());
  std::size_t iteration = 0;
  for (;;) {
    if (inf_norm(g) <= opts.gradient_tolerance * std::max(1.0, f)) {
      result.status = LbfgsStatus::GradientConverged;
      break;
    }
    if (iteration >= opts.max_iterations) {
      result.status = LbfgsStatus::MaxIterations;
      break;
    }
    ++iteration;

    std::vector<double> d = search_direction(memory, g);
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      memory.clear();
      d = g;
      for (double& v : d) v = -v;
      slope = dot(g, d);
    }
    const double d_norm = inf_norm(d);
    // Without curvature information, start with a unit step in the inf norm.
    double alpha = memory.empty() ? std::min(1.0, 1.0 / d_norm) : 1.0;

    bool accepted = false;
    double f_new = std::numeric_limits<double>::infinity();
    while (alpha * d_norm >= opts.min_step) {
      for (std::size_t k = 0; k < x.size(); ++k) x_new[k] = x[k] + alpha * d[k];
      f_new = objective(x_new, g_new);
      ++result.evaluations;
      if (std::isfinite(f_new) && f_new <= f + opts.armijo * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opts.shrink;
    }
    if (!accepted) {
      // Retry once along -g before giving up.
      if (!memory.empty()) {
        memory.clear();
        --iteration;
        continue;
      }
      result.status = LbfgsStatus::StepCollapsed;
      break;
    }

    CurvaturePair pair{std::vector<double>(x.size()), std::vector<double>(x.size()), 0.0};
    for (std::size_t k = 0; k < x.size(); ++k) {
      pair.s[k] = x_new[k] - x[k];
      pair.y[k] = g_new[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > opts.memory) memory.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    result.trace.push_back({iteration, f, inf_norm(g), alpha * d_norm});
  }
  result.x = std::move(x);
  result.cost = f;
  return result;
}

}  // namespace nevac
