#pragma once

// Limited-memory BFGS with Armijo backtracking.
//
// The objective may return +infinity to mark infeasible points; the line
// search treats those like any other failed Armijo test and keeps shrinking.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace nevac {

struct LbfgsOptions {
  std::size_t memory = 10;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;  // on ||g||_inf / max(1, F)
  double min_step = 1e-14;           // on alpha * ||d||_inf
  double armijo = 1e-4;
  double shrink = 0.5;
};

enum class LbfgsStatus { GradientConverged, StepCollapsed, MaxIterations };

std::string to_string(LbfgsStatus s);

struct TraceEntry {
  std::size_t iteration;
  double cost;
  double gradient_norm;  // infinity norm
  double step;           // alpha * ||d||_inf of the step that produced this iterate
};

struct LbfgsResult {
  std::vector<double> x;
  double cost = 0.0;
  std::vector<TraceEntry> trace;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  std::size_t evaluations = 0;
};

/// Returns F(x) and writes dF/dx into `grad`. Must return +inf (and may leave
/// `grad` untouched) when x is infeasible.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

/// Minimizes from x0, which must be feasible. The returned point is the best
/// one seen.
LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double> x0, const LbfgsOptions& opts = {});

}  // namespace nevac
