// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "stonewalk/cycles.hpp"
#include "stonewalk/genealogy.hpp"
#include "stonewalk/replicas.hpp"

using namespace stonewalk;
using dispersal::Family;

// N = 64 gives thresholds N^{5/6} = 32 and 2 N^{5/6} = 64.
TEST_CASE("hand-traced stopping times", "[cycles]") {
  const std::vector<std::int64_t> path = {100, 70, 60, 80};
  const auto d = cycles::cycle_decompose(path, 64.0);
  CHECK(d.th.inner == Catch::Approx(32.0));
  CHECK(d.th.outer == Catch::Approx(64.0));
  REQUIRE(d.records.size() == 2);
  CHECK(d.records[0].S == 0);
  CHECK(d.records[0].T == -1);
  CHECK(d.records[1].T == 2);  // 60 < 100 - 32
  CHECK(d.records[1].S == 3);  // 80 > 64
  CHECK(d.records[1].eta == 1);
  CHECK_FALSE(d.prePhase);
}

TEST_CASE("a path that never re-enters has one record", "[cycles]") {
  std::vector<std::int64_t> path;
  for (std::int64_t x = 100; x < 200; ++x) path.push_back(x);
  const auto d = cycles::cycle_decompose(path, 64.0);
  REQUIRE(d.records.size() == 1);
  CHECK(d.records[0].S == 0);
  CHECK_FALSE(d.pendingT.has_value());
  CHECK(cycles::crossing_local_time(d, 64.0, 1.0) == 0.0);
}

TEST_CASE("first zero falls inside window J", "[cycles]") {
  const std::vector<std::int64_t> path = {100, 60, 30, 0, 70};
  const auto d = cycles::cycle_decompose(path, 64.0);
  REQUIRE(d.J.has_value());
  REQUIRE(d.zeroTime.has_value());
  CHECK(*d.J == 1);
  const auto& w = d.records[*d.J];
  CHECK(w.T <= *d.zeroTime);
  CHECK(*d.zeroTime <= w.S);

  // Truncated before the next exit: J points at the pending window.
  const std::vector<std::int64_t> cut = {100, 60, 30, 0};
  const auto e = cycles::cycle_decompose(cut, 64.0);
  CHECK(e.J == 1);
  CHECK(e.pendingT == 1);
}

TEST_CASE("zig-zag path crosses the strip three times", "[cycles]") {
  const std::vector<std::int64_t> path = {100, -40, -70, 0, 70, 10, -80, -100};
  const auto d = cycles::cycle_decompose(path, 64.0);
  REQUIRE(d.records.size() == 4);
  CHECK(d.crossings(7) == 3);
  CHECK(d.cycles_completed(7) == 3);
  CHECK(d.cycles_completed(3) == 1);
  const double expect = 2.0 * 3.0 / std::pow(64.0, 1.0 / 6.0);
  CHECK(cycles::crossing_local_time(d, 64.0, 1.0) == Catch::Approx(expect));
  CHECK(cycles::crossing_local_time(std::span<const std::int64_t>(path), 64.0, 1.0) == Catch::Approx(expect));

  // S = 0, 2, 4, 6 and T = -1, 1, 3, 5.
  CHECK(d.B(0) == 1);  // S_0 - T_0 = S_0 + 1
  CHECK(d.B(3) == 1 + 1 + 1 + 1);
  CHECK(d.A(0) == -1);
  CHECK(d.A(3) == -1 + (1 - 0) + (3 - 2) + (5 - 4));
  CHECK_THROWS_AS(d.A(4), DomainError);

  std::ostringstream os;
  d.write_csv(os);
  CHECK(os.str().rfind("m,S,T,eta,crossed,posS,posT\n0,0,-1,1,0,100,100\n", 0) == 0);
}

TEST_CASE("start inside the strip uses the pre-phase rule", "[cycles]") {
  const std::vector<std::int64_t> path = {10, 30, 70, 20};
  const auto d = cycles::cycle_decompose(path, 64.0);
  CHECK(d.prePhase);
  REQUIRE(d.records.size() == 1);
  CHECK(d.records[0].S == 2);
  CHECK(d.records[0].eta == 3);
  CHECK(d.pendingT == 3);
}

TEST_CASE("single-cycle moments", "[cycles]") {
  const auto k = dispersal::build_kernel(Family::uniform, 64);
  const std::vector<std::int64_t> path = {10, 30, 70, 90};
  const std::vector<cycles::CycleDecomposition> ds = {cycles::cycle_decompose(path, 64.0)};
  const auto m = cycles::cycle_moment_diagnostics(ds, k);
  CHECK(m.cycles == 1);
  CHECK(m.meanEta == 3.0);
  CHECK(m.meanEta2 == 9.0);
  CHECK(m.insufficient);
}

TEST_CASE("cycle records of kernel walks respect the stopping-time ordering", "[cycles]") {
  const auto q = dispersal::build_kernel(Family::bilateral_exponential, 400);
  const double N = 400.0;
  const auto th = cycles::Thresholds::for_scale(N);
  const auto R = static_cast<double>(q.truncation_radius());
  const SeedPlan plan(101, 200);
  for (std::uint64_t r = 0; r < plan.replica_count(); ++r) {
    Stream rng = make_stream(plan, r);
    const auto path = genealogy::kernel_walk_path(q, static_cast<std::int64_t>(th.outer) + 5, 200000, rng);
    const auto d = cycles::cycle_decompose(path, N);
    for (std::size_t m = 0; m < d.records.size(); ++m) {
      const auto& c = d.records[m];
      REQUIRE(c.T < c.S);
      REQUIRE(c.eta >= 1);
      const double a = std::fabs(static_cast<double>(c.posS));
      REQUIRE(a > th.outer);
      REQUIRE(a <= th.outer + R);
      if (m + 1 < d.records.size()) REQUIRE(c.S < d.records[m + 1].T);
    }
  }
}

TEST_CASE("the window holding the first zero is geometric across cycles", "[cycles]") {
  const std::uint64_t Nn = 6400;
  const double N = static_cast<double>(Nn);
  const auto q = dispersal::build_kernel(Family::uniform, Nn);
  const std::int64_t start = genealogy::separation_for(q, 1.0);
  const std::uint64_t cap = 2'000'000;
  const SeedPlan plan(111, 4000);
  struct Outcome {
    std::int64_t J = -1;         // -1 when censored
    std::int64_t atRisk = 0;     // windows observed without a zero
  };
  const auto out = run_replicas(plan, resolve_threads(std::nullopt), [&](std::uint64_t, Stream& rng) {
    std::vector<std::int64_t> path{start};
    path.reserve(1 << 16);
    while (path.size() < cap && path.back() != 0) path.push_back(path.back() + q.sample(rng));
    const auto d = cycles::cycle_decompose(path, N);
    Outcome o;
    if (d.J) {
      o.J = static_cast<std::int64_t>(*d.J);
    } else {
      o.atRisk = static_cast<std::int64_t>(d.records.size());
    }
    return o;
  });

  // Hazard table: at window j, how many paths were still looking and how many hit 0.
  // Window 1 opens N^{5/6} below the start rather than below the outer threshold,
  // so its hazard depends on x0; homogeneity is tested over P(J = j+1 | J > j), j = 1..10.
  const int jMin = 2;
  const int jMax = 11;
  std::vector<double> risk(jMax + 1, 0.0);
  std::vector<double> hit(jMax + 1, 0.0);
  for (const auto& o : out) {
    REQUIRE(o.J != 0);  // the start lies outside the strip
    const std::int64_t last = o.J >= 0 ? std::min<std::int64_t>(o.J, jMax) : std::min<std::int64_t>(o.atRisk - 1, jMax);
    for (std::int64_t j = 1; j <= last; ++j) risk[static_cast<std::size_t>(j)] += 1.0;
    if (o.J >= 1 && o.J <= jMax) hit[static_cast<std::size_t>(o.J)] += 1.0;
  }
  // Homogeneity of hazards over windows with at least 5 expected events and non-events.
  double H = 0.0;
  double Rtot = 0.0;
  for (int j = jMin; j <= jMax; ++j) {
    H += hit[static_cast<std::size_t>(j)];
    Rtot += risk[static_cast<std::size_t>(j)];
  }
  const double h = H / Rtot;
  double chi2 = 0.0;
  int cells = 0;
  for (int j = jMin; j <= jMax; ++j) {
    const double n = risk[static_cast<std::size_t>(j)];
    if (n * h < 5.0 || n * (1.0 - h) < 5.0) continue;
    const double e = n * h;
    const double o = hit[static_cast<std::size_t>(j)];
    chi2 += (o - e) * (o - e) / (n * h * (1.0 - h));
    ++cells;
  }
  REQUIRE(cells >= 3);
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), chi2));
  INFO("pooled hazard " << h << ", chi2 " << chi2 << " on " << cells - 1 << " dof, p " << p);
  CHECK(p > 1e-4);
}
