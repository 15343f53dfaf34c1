// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>

#include "oracles/oracles.hpp"
#include "stonewalk/genealogy.hpp"
#include "stonewalk/walk_analytics.hpp"

using namespace stonewalk;
using dispersal::Family;

TEST_CASE("step distributions: trivial powers", "[walk]") {
  const auto q = dispersal::build_kernel(Family::bilateral_exponential, 100);
  const auto p0 = walk::step_distribution(q, 0);
  CHECK(p0.at(0) == 1.0);
  CHECK(p0.min_x() == 0);
  CHECK(p0.max_x() == 0);
  const auto p1 = walk::step_distribution(q, 1);
  for (std::int64_t z = -q.support_radius(); z <= q.support_radius(); ++z) REQUIRE(p1.at(z) == q.mass(z));
}

TEST_CASE("nearest-neighbor step distributions are binomial", "[walk]") {
  const auto q = dispersal::build_kernel(Family::nearest_neighbor, 1);
  CHECK(walk::step_distribution(q, 4).at(0) == 0.375);
  const auto p = walk::step_distribution(q, 20);
  for (int x = -20; x <= 20; ++x) {
    const double expect =
        (x + 20) % 2 == 0 ? boost::math::binomial_coefficient<double>(20, static_cast<unsigned>((x + 20) / 2)) /
                                std::ldexp(1.0, 20)
                          : 0.0;
    CHECK(std::fabs(p.at(x) - expect) < 1e-15);
  }
}

TEST_CASE("doubling is bit-for-bit consistent", "[walk]") {
  const auto q = dispersal::build_kernel(Family::discrete_normal, 400);
  const auto p4 = walk::step_distribution(q, 4);
  const auto p8 = walk::step_distribution(q, 8);
  const auto p44 = walk::convolve(p4, p4);
  REQUIRE(p8.offset == p44.offset);
  REQUIRE(p8.mass.size() == p44.mass.size());
  for (std::size_t i = 0; i < p8.mass.size(); ++i) REQUIRE(p8.mass[i] == p44.mass[i]);
}

TEST_CASE("step distributions conserve mass up to the tracked truncation", "[walk]") {
  const auto q = dispersal::build_kernel(Family::bilateral_exponential, 400);
  for (std::uint64_t k : {1ULL, 3ULL, 16ULL, 50ULL, 128ULL}) {
    const auto p = walk::step_distribution(q, k);
    INFO("k = " << k);
    CHECK(std::fabs(p.total() + p.truncated - 1.0) < 1e-12);
    CHECK(p.truncated < 1e-12);
  }
  CHECK_THROWS_AS(walk::step_distribution(q, 1000, 1000), NumericalError);
}

TEST_CASE("normal density rho", "[walk]") {
  const double s2 = 0.4;
  const double ell = 250.0;
  CHECK(walk::rho(s2, ell, 0.0) == Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * s2 * ell)));
  double total = 0.0;
  const double h = 0.01;
  for (double x = -200.0; x <= 200.0; x += h) total += walk::rho(s2, ell, x) * h;
  CHECK(std::fabs(total - 1.0) < 1e-8);
  CHECK(walk::rho(s2, ell, 7.5) == walk::rho(s2, ell, -7.5));
  CHECK_THROWS_AS(walk::rho(s2, 0.0, 1.0), DomainError);
}

TEST_CASE("local CLT audit", "[walk]") {
  const auto q = dispersal::build_kernel(Family::uniform, 400);
  const auto audit = walk::lclt_error_audit(q, walk::k_range(1, 64));
  REQUIRE(audit.normalized.size() == 64);
  CHECK(std::isfinite(audit.cStar));
  CHECK(audit.cStar > 0.0);
  // k = 1 is the kernel itself.
  double sup = 0.0;
  for (std::int64_t x = -q.support_radius(); x <= q.support_radius(); ++x) {
    sup = std::max(sup, std::fabs(q.mass(x) - walk::rho(q, 400.0, static_cast<double>(x))));
  }
  CHECK(audit.normalized[0] == Catch::Approx(20.0 * sup).epsilon(1e-12));
  CHECK_THROWS_AS(walk::lclt_error_audit(dispersal::build_kernel(Family::nearest_neighbor, 1), {1}),
                  ConfigError);
}

TEST_CASE("potential kernel against a Fourier oracle", "[walk]") {
  const auto q = dispersal::build_kernel(Family::uniform, 100);
  const auto a = walk::potential_kernel(q, 60, 1e-3);
  CHECK(a(0) == 0.0);
  CHECK(a.tailBound <= 1e-3 + 1e-12);
  for (std::int64_t x = 1; x <= 60; ++x) REQUIRE(a(x) == a(-x));
  for (std::int64_t x : {1, 2, 5, 10, 23, 40, 60}) {
    const double ref = oracle::potential_kernel_fourier(q, x, 40000);
    INFO("x = " << x << " table " << a(x) << " oracle " << ref);
    CHECK(std::fabs(a(x) - ref) <= a.tailBound);
    // The Gaussian remainder makes the table far better than its certificate.
    CHECK(std::fabs(a(x) - ref) <= 1e-6);
  }
}

TEST_CASE("potential kernel is harmonic off the origin", "[walk]") {
  const auto q = dispersal::build_kernel(Family::bilateral_exponential, 16);
  const std::int64_t R = q.support_radius();
  const auto a = walk::potential_kernel(q, 3 * R, 1e-3);
  for (std::int64_t x = 0; x <= R; ++x) {
    double pa = 0.0;
    for (std::int64_t z = -R; z <= R; ++z) pa += q.mass(z) * a(x + z);
    const double expect = a(x) - (x == 0 ? 1.0 : 0.0);
    INFO("x = " << x);
    CHECK(std::fabs(pa - expect) <= 2.0 * a.tailBound);
  }
  std::ostringstream os;
  a.write_csv(os);
  CHECK(os.str().rfind("x,value,certified_bound\n", 0) == 0);
}

TEST_CASE("gambler's-ruin Green's function on [-2, 2]", "[walk]") {
  const auto q = dispersal::build_kernel(Family::nearest_neighbor, 1);
  const walk::IntervalProblem I{&q, 2};
  CHECK(std::fabs(walk::green_exact(I, 0, 0) - 3.0) < 1e-12);
  CHECK(std::fabs(walk::green_exact(I, 1, 0) - 2.0) < 1e-12);
  CHECK(std::fabs(walk::hitting_prob(I, 1) - 2.0 / 3.0) < 1e-12);
  for (std::int64_t x = -2; x <= 2; ++x) {
    // Hit 0 before leaving [-2, 2] is gambler's ruin on [0, 3] from |x|.
    const std::int64_t ax = std::llabs(x);
    CHECK(std::fabs(walk::hitting_prob(I, x) - oracle::gamblers_ruin(ax, 0, 3)) < 1e-12);
  }
  CHECK(walk::hitting_prob(I, 0) == 1.0);
}

TEST_CASE("Green's function is symmetric for symmetric kernels", "[walk]") {
  const auto q = dispersal::build_kernel(Family::bilateral_exponential, 25);
  const walk::IntervalProblem I{&q, 40};
  walk::GreenSolver s(I);
  const auto g3 = s.column(3);
  const auto g17 = s.column(-17);
  const auto at = [&](const std::vector<double>& g, std::int64_t x) { return g[static_cast<std::size_t>(x + 40)]; };
  CHECK(at(g3, -17) == Catch::Approx(at(g17, 3)).epsilon(1e-12));
  CHECK(s.residual() < 1e-10);
  CHECK(walk::green_exact(I, 5, -8) == Catch::Approx(walk::green_exact(I, -8, 5)).epsilon(1e-12));
}

TEST_CASE("Green asymptotics: boundary and origin values", "[walk]") {
  const auto q = dispersal::build_kernel(Family::uniform, 400);
  const auto I = walk::IntervalProblem::standard(q);
  CHECK(I.Mhalf == static_cast<std::int64_t>(std::ceil(2.0 * std::pow(400.0, 5.0 / 6.0))));
  const double M = static_cast<double>(I.Mhalf);
  CHECK(walk::green_asymptotic(I, I.Mhalf, 7) == Catch::Approx(0.0).margin(1e-12));
  CHECK(walk::green_asymptotic(I, -I.Mhalf, 7) == Catch::Approx(0.0).margin(1e-12));
  CHECK(walk::green_asymptotic(I, I.Mhalf, I.Mhalf) == Catch::Approx(1.0).margin(1e-12));
  CHECK(walk::green_asymptotic(I, 0, 0) == Catch::Approx(1.0 + M / q.variance()).epsilon(1e-14));
  CHECK(walk::hitting_prob_asymptotic(400, 1.0) == Catch::Approx(std::pow(400.0, -1.0 / 6.0)));
}

TEST_CASE("exact Green's function tracks its asymptotic form at N = 400", "[walk]") {
  const auto q = dispersal::build_kernel(Family::uniform, 400);
  const auto I = walk::IntervalProblem::standard(q);
  std::vector<std::pair<std::int64_t, std::int64_t>> probes;
  for (std::int64_t x = -I.Mhalf; x <= I.Mhalf; x += 7) {
    for (std::int64_t y : {-I.Mhalf / 2, 0L, 13L, I.Mhalf - 3}) probes.emplace_back(x, y);
  }
  const auto cmp = walk::green_comparison(I, probes);
  INFO("max error " << cmp.maxError << " = " << cmp.c << " N^{-1/3} log N");
  CHECK(std::isfinite(cmp.c));
  CHECK(cmp.residual < 1e-8);
  // Relative to G(0,0) = 1 + M/sigma^2 N the error is modest.
  CHECK(cmp.maxError < 0.25 * walk::green_asymptotic(I, 0, 0));

  std::vector<std::int64_t> xs;
  for (std::int64_t x = 1; x <= I.Mhalf; ++x) {
    xs.push_back(x);
    xs.push_back(-x);
  }
  const auto bound = walk::hitting_prob_bound_check(I, xs, cmp.c);
  CHECK(bound.passed);
}

TEST_CASE("hitting-probability bound near the origin and the boundary at N = 1600", "[walk]") {
  const auto q = dispersal::build_kernel(Family::uniform, 1600);
  const auto I = walk::IntervalProblem::standard(q);
  const std::int64_t edge = static_cast<std::int64_t>(std::ceil(2.0 * std::pow(1600.0, 5.0 / 6.0))) - 1;
  const auto check = walk::hitting_prob_bound_check(I, {1, -1, edge, -edge}, 1.0);
  CHECK(check.passed);
  CHECK(walk::hitting_prob(I, edge) < walk::hitting_prob(I, 1));
  CHECK_THROWS_AS(walk::hitting_prob_bound_check(I, {0}, 1.0), DomainError);
}

namespace {
struct ExitSample {
  std::int64_t exit = 0;
  bool right = false;
};

ExitSample run_to_exit(const dispersal::Kernel& q, std::int64_t M, std::int64_t x, Stream& rng) {
  while (std::llabs(x) <= M) x += q.sample(rng);
  return {x, x > M};
}
}  // namespace

TEST_CASE("Green's function equals the potential-kernel exit identity", "[walk]") {
  const auto q = dispersal::build_kernel(Family::uniform, 100);
  const std::int64_t M = 20;
  const walk::IntervalProblem I{&q, M};
  const auto a = walk::potential_kernel(q, 2 * M + q.support_radius() + 1, 1e-4);
  const SeedPlan plan(2024, 100000);
  for (auto [x, y] : {std::pair<std::int64_t, std::int64_t>{3, -5}, {0, 0}, {-12, 7}}) {
    double s = 0.0;
    double s2 = 0.0;
    for (std::uint64_t r = 0; r < plan.replica_count(); ++r) {
      Stream rng = make_stream(plan, r);
      const auto e = run_to_exit(q, M, x, rng);
      const double v = a(x - y) - a(e.exit - y);
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(plan.replica_count());
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / (n - 1.0));
    const double g = walk::green_exact(I, x, y);
    INFO("x=" << x << " y=" << y << " G=" << g << " MC=" << mean << " se=" << se);
    CHECK(std::fabs(mean - g) <= 4.0 * se + 2.0 * a.tailBound);
  }
}

TEST_CASE("exit side probabilities fall in the overshoot bracket", "[walk]") {
  const auto q = dispersal::build_kernel(Family::bilateral_exponential, 100);
  const auto I = walk::IntervalProblem::standard(q);
  const double M = static_cast<double>(I.Mhalf);
  const double R = static_cast<double>(q.truncation_radius());
  const SeedPlan plan(77, 20000);
  for (std::int64_t x : {-60L, 0L, 45L}) {
    double right = 0.0;
    for (std::uint64_t r = 0; r < plan.replica_count(); ++r) {
      Stream rng = make_stream(plan, r);
      right += run_to_exit(q, I.Mhalf, x, rng).right ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(plan.replica_count());
    const double p = right / n;
    const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
    const double xd = static_cast<double>(x);
    INFO("x=" << x << " p=" << p);
    CHECK(p >= (M + xd) / (2.0 * M + R) - 4.0 * se);
    CHECK(p <= (M + xd + R) / (2.0 * M + R) + 4.0 * se);
  }
}
