#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "nevac/fermionize.hpp"
#include "nevac/oracle.hpp"
#include "support.hpp"

using namespace nevac;
using nevac::testing::fermionized_pole;
using nevac::testing::rel_error;

namespace {

// chi(tau) of a unit pole at w0 with the bosonic kernel.
ImaginaryTimeData single_pole_tau(double beta, double w0, std::size_t n) {
  ImaginaryTimeData d;
  d.beta = beta;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = beta * (i + 0.5) / n;
    d.taus.push_back(tau);
    d.values.emplace_back(-std::exp(-tau * w0) / (1.0 - std::exp(-beta * w0)), 0.0);
  }
  return d;
}

MatsubaraData bosonic_pole(double beta, double w0, long count) {
  MatsubaraData d;
  d.beta = Real(beta, 128);
  d.statistics = Statistics::Bosonic;
  d.precision_bits = 128;
  for (long n = 0; n < count; ++n) {
    d.indices.push_back(n);
    const double nu = frequency_of(n, beta, Statistics::Bosonic);
    d.values.emplace_back(1.0 / std::complex<double>(-w0, nu), 128);
  }
  return d;
}

double max_rel_error(const MatsubaraData& got, double beta, double w0) {
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    worst = std::max(worst, rel_error(got.values[k].to_complex(), fermionized_pole(got.indices[k], beta, w0)));
  }
  return worst;
}

FermionizeConfig low_targets(long count) {
  FermionizeConfig cfg;
  cfg.target_indices.clear();
  for (long n = 0; n < count; ++n) cfg.target_indices.push_back(n);
  return cfg;
}

}  // namespace

TEST_CASE("default target set") {
  const auto idx = default_target_indices();
  REQUIRE(idx.size() == 36);
  CHECK(idx.front() == 0);
  CHECK(idx.back() == 2188);
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
}

TEST_CASE("fermionize config validation") {
  FermionizeConfig cfg;
  cfg.target_indices = {3, 1};
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg.target_indices = {-1};
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg.target_indices = {};
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg = FermionizeConfig{};
  cfg.tikhonov_alpha = -1.0;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("tau path: single pole matches the fermionized closed form") {
  const auto cfg = low_targets(10);
  const auto got = fermionize_tau(single_pole_tau(2.0, 1.0, 2048), cfg);
  CHECK(got.statistics == Statistics::Fermionic);
  CHECK(got.indices == cfg.target_indices);
  CHECK(max_rel_error(got, 2.0, 1.0) < 1e-9);
}

TEST_CASE("tau path converges at fourth order") {
  const auto cfg = low_targets(4);
  const double coarse = max_rel_error(fermionize_tau(single_pole_tau(2.0, 1.0, 64), cfg), 2.0, 1.0);
  const double fine = max_rel_error(fermionize_tau(single_pole_tau(2.0, 1.0, 128), cfg), 2.0, 1.0);
  CHECK(coarse / fine > 12.0);
}

TEST_CASE("tau path: zero input gives zero output") {
  auto d = single_pole_tau(2.0, 1.0, 16);
  for (auto& v : d.values) v = 0.0;
  const auto got = fermionize_tau(d, FermionizeConfig{});
  for (const auto& v : got.values) CHECK(abs(v).is_zero());
}

TEST_CASE("tau path rejects bad grids") {
  ImaginaryTimeData d;
  d.beta = 2.0;
  CHECK_THROWS_AS(fermionize_tau(d, FermionizeConfig{}), std::invalid_argument);
  d = single_pole_tau(2.0, 1.0, 8);
  d.taus.back() = 2.5;
  CHECK_THROWS_AS(fermionize_tau(d, FermionizeConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(fermionize_tau(single_pole_tau(2.0, 1.0, 3), FermionizeConfig{}), std::invalid_argument);
}

TEST_CASE("frequency path: single pole matches the fermionized closed form") {
  // Truncated SVD alone: limited only by the fit grid.
  auto cfg = low_targets(10);
  cfg.tikhonov_alpha = 0.0;
  const auto fit = fermionize_freq(bosonic_pole(2.0, 1.0, 64), cfg);
  CHECK(fit.rank > 0);
  CHECK(max_rel_error(fit.fermionic, 2.0, 1.0) < 1e-6);
}

TEST_CASE("frequency path: default regularization biases a delta density slightly") {
  // At beta = 2 the kernel's singular values are small enough for alpha = 1e-12
  // to matter: the error sits at a few 1e-6 rather than below 1e-6.
  const auto fit = fermionize_freq(bosonic_pole(2.0, 1.0, 64), low_targets(10));
  const double err = max_rel_error(fit.fermionic, 2.0, 1.0);
  CHECK(err > 1e-6);
  CHECK(err < 1e-5);
}

TEST_CASE("frequency path: zero input gives zero density and output") {
  auto d = bosonic_pole(2.0, 1.0, 16);
  for (auto& v : d.values) v = Complex(128);
  const auto fit = fermionize_freq(d, FermionizeConfig{});
  for (double c : fit.density.values) CHECK(c == 0.0);
  for (const auto& v : fit.fermionic.values) CHECK(abs(v).is_zero());
}

TEST_CASE("frequency path is linear in the data") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto a = bosonic_pole(10.0, 1.5, 48);
  const auto b = bosonic_pole(10.0, -0.7, 48);
  const double s = u(rng);
  const double t = u(rng);
  auto mix = a;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    mix.values[k] = Complex(s * a.values[k].to_complex() + t * b.values[k].to_complex(), 128);
  }
  FermionizeConfig cfg;
  const auto fa = fermionize_freq(a, cfg).fermionic;
  const auto fb = fermionize_freq(b, cfg).fermionic;
  const auto fm = fermionize_freq(mix, cfg).fermionic;
  for (std::size_t k = 0; k < fm.size(); ++k) {
    const auto want = s * fa.values[k].to_complex() + t * fb.values[k].to_complex();
    CHECK(std::abs(fm.values[k].to_complex() - want) < 1e-10 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("frequency path rejects fermionic input") {
  auto d = bosonic_pole(2.0, 1.0, 8);
  d.statistics = Statistics::Fermionic;
  CHECK_THROWS_AS(fermionize_freq(d, FermionizeConfig{}), std::invalid_argument);
}

TEST_CASE("fit kernel has the finite limit at zero frequency") {
  const RealFrequencyGrid grid(-1.0, 1.0, 3);
  const double beta = 7.0;
  const auto k = bosonic_fit_kernel({0, 1}, beta, grid);
  // Column of omega = 0, row nu = 0 (real part).
  CHECK(k[1 * 4 + 0] == -0.5 * beta * grid.spacing());
  // nu = 0 at omega = 1: -tanh(beta / 2) / 1.
  CHECK(k[2 * 4 + 0] == doctest::Approx(-std::tanh(3.5) * grid.spacing()));
}

TEST_CASE("sum rule from tau endpoints") {
  SUBCASE("single pole gives coth(1)") {
    const auto rule = sum_rule_from_tau(single_pole_tau(2.0, 1.0, 400));
    CHECK(rule.source == SumRuleSource::TauEndpoints);
    CHECK(rule.value == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-8));
  }
  SUBCASE("zero data gives zero") {
    auto d = single_pole_tau(2.0, 1.0, 64);
    for (auto& v : d.values) v = 0.0;
    CHECK(sum_rule_from_tau(d).value == 0.0);
  }
  SUBCASE("insufficient coverage reports what was reached") {
    ImaginaryTimeData d;
    d.beta = 10.0;
    for (double t : {2.0, 3.0, 4.0, 5.0, 6.0}) {
      d.taus.push_back(t);
      d.values.emplace_back(-1.0, 0.0);
    }
    try {
      sum_rule_from_tau(d);
      FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
      CHECK(e.coverage_low() == doctest::Approx(0.2));
      CHECK(e.coverage_high() == doctest::Approx(0.6));
    }
  }
}

TEST_CASE("sum rule from the high-frequency tail") {
  SUBCASE("single pole out to n = 10000") {
    MatsubaraData d;
    d.beta = Real(2.0, 128);
    d.statistics = Statistics::Fermionic;
    d.precision_bits = 128;
    for (long n = 0; n <= 10000; n += 50) {
      d.indices.push_back(n);
      const double wn = frequency_of(n, 2.0, Statistics::Fermionic);
      d.values.emplace_back(1.0 / std::complex<double>(-1.0, wn), 128);
    }
    CHECK(std::abs(sum_rule_from_tail(d).value - 1.0) < 1e-3);
  }
  SUBCASE("pure 1/(i omega) tail is fitted exactly") {
    MatsubaraData d;
    d.beta = Real(5.0, 128);
    d.statistics = Statistics::Fermionic;
    d.precision_bits = 128;
    for (long n = 0; n < 40; ++n) {
      d.indices.push_back(n);
      const double wn = frequency_of(n, 5.0, Statistics::Fermionic);
      d.values.emplace_back(std::complex<double>(0.0, -2.0 / wn), 128);
    }
    const auto rule = sum_rule_from_tail(d);
    CHECK(rule.source == SumRuleSource::TailFit);
    CHECK(rule.value == doctest::Approx(2.0).epsilon(1e-13));
    for (auto& v : d.values) v = Complex(128);
    CHECK(sum_rule_from_tail(d).value == 0.0);
  }
  SUBCASE("too few points") {
    MatsubaraData d;
    d.beta = Real(5.0, 128);
    d.precision_bits = 128;
    d.indices = {0, 1, 2};
    d.values.assign(3, Complex(std::complex<double>(0.0, -1.0), 128));
    CHECK_THROWS_AS(sum_rule_from_tail(d), std::invalid_argument);
  }
}

TEST_CASE("tanh conversion") {
  const RealFrequencyGrid grid(-4.0, 4.0, 9);
  std::vector<double> flat(grid.count(), 1.0);
  const auto rho = tanh_convert(SpectralFunction(grid, flat, Statistics::Fermionic), 2.0);
  CHECK(rho.statistics == Statistics::Bosonic);
  CHECK(rho.values[4] == 0.0);
  CHECK(rho.values[6] == doctest::Approx(std::tanh(2.0)));

  std::vector<double> even;
  for (double w : grid.nodes()) even.push_back(std::exp(-w * w) + 1.0 / M_PI);
  const auto odd = tanh_convert(SpectralFunction(grid, even, Statistics::Fermionic), 3.0);
  for (std::size_t i = 0; i < grid.count(); ++i) {
    CHECK(odd.values[i] == -odd.values[grid.count() - 1 - i]);
    if (grid[i] != 0.0) CHECK(odd.values[i] / std::tanh(1.5 * grid[i]) == doctest::Approx(even[i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(tanh_convert(odd, 0.0), std::invalid_argument);
}
