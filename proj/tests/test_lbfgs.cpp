#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nevac/lbfgs.hpp"

using namespace nevac;

namespace {

double rosenbrock(const std::vector<double>& x, std::vector<double>& g) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  g[0] = -2.0 * a - 400.0 * x[0] * b;
  g[1] = 200.0 * b;
  return a * a + 100.0 * b * b;
}

}  // namespace

TEST_CASE("minimizes the Rosenbrock function") {
  LbfgsOptions opts;
  opts.gradient_tolerance = 1e-10;
  const auto r = lbfgs_minimize(rosenbrock, {-1.2, 1.0}, opts);
  CHECK(r.status == LbfgsStatus::GradientConverged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.cost < 1e-12);
}

TEST_CASE("trace is non-increasing") {
  const auto r = lbfgs_minimize(rosenbrock, {-1.2, 1.0});
  REQUIRE(r.trace.size() > 2);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].cost <= r.trace[i - 1].cost);
  CHECK(r.trace.front().iteration == 0);
}

TEST_CASE("an optimal start returns unchanged") {
  const auto r = lbfgs_minimize(rosenbrock, {1.0, 1.0});
  CHECK(r.status == LbfgsStatus::GradientConverged);
  CHECK(r.trace.size() == 1);
  CHECK(r.evaluations == 1);
  CHECK(r.x == std::vector<double>{1.0, 1.0});
}

TEST_CASE("infinite sentinel keeps iterates feasible") {
  // Minimum of the smooth part lies at x = 2, outside the feasible x <= 1.
  std::size_t infeasible_calls = 0;
  auto f = [&](const std::vector<double>& x, std::vector<double>& g) {
    if (x[0] > 1.0) {
      ++infeasible_calls;
      return std::numeric_limits<double>::infinity();
    }
    g[0] = 2.0 * (x[0] - 2.0);
    return (x[0] - 2.0) * (x[0] - 2.0);
  };
  const auto r = lbfgs_minimize(f, {0.0});
  CHECK(r.x[0] <= 1.0);
  CHECK(r.x[0] > 0.99);
  CHECK(r.status == LbfgsStatus::StepCollapsed);
  CHECK(infeasible_calls > 0);
}

TEST_CASE("infeasible start is an error") {
  auto f = [](const std::vector<double>&, std::vector<double>&) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(lbfgs_minimize(f, {0.0}), std::invalid_argument);
}

TEST_CASE("iteration cap") {
  LbfgsOptions opts;
  opts.max_iterations = 3;
  const auto r = lbfgs_minimize(rosenbrock, {-1.2, 1.0}, opts);
  CHECK(r.status == LbfgsStatus::MaxIterations);
  CHECK(r.trace.back().iteration == 3);
}

TEST_CASE("status names") {
  CHECK(to_string(LbfgsStatus::GradientConverged) == "gradient-converged");
  CHECK(to_string(LbfgsStatus::StepCollapsed) == "step-collapsed");
  CHECK(to_string(LbfgsStatus::MaxIterations) == "max-iterations");
}
