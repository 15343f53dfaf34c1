// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "oracles/oracles.hpp"
#include "stonewalk/limit_law.hpp"
#include "stonewalk/pde.hpp"

using namespace stonewalk;

TEST_CASE("no killing leaves u identically 1", "[pde]") {
  const auto sol = pde::survival_pde(0.0, pde::reference_grid(1.0, 1.0));
  for (const auto& row : sol.values) {
    for (double v : row) REQUIRE(std::fabs(v - 1.0) < 1e-10);
  }
}

TEST_CASE("PDE route matches quadrature at (1, 1, 1)", "[pde]") {
  const auto sol = pde::survival_pde(1.0, pde::reference_grid(1.0, 1.0));
  const double q = limit::survival_quadrature(1.0, 1.0, 1.0);
  CHECK(std::fabs(sol.at(1.0, 1.0) - q) < 1e-4);
  CHECK(sol.residual < 1e-10);

  // The full-line integral of the joint density is the same number.
  double mass = 0.0;
  const double dz = 1e-3;
  for (double z = -11.0 + 0.5 * dz; z < 11.0; z += dz) mass += limit::killed_joint_density(1.0, 1.0, z, 1.0) * dz;
  CHECK(std::fabs(mass - sol.at(1.0, 1.0)) < 1e-4);
}

TEST_CASE("strong killing reproduces absorption at 0", "[pde]") {
  const auto sol = pde::survival_pde(1e4, pde::reference_grid(1.0, 1.0));
  const double absorbed = static_cast<double>(oracle::erf_series(1.0L / std::sqrt(2.0L)));
  CHECK(std::fabs(sol.at(1.0, 1.0) - absorbed) < 5e-3);
}

TEST_CASE("grid solution is a monotone survival surface", "[pde]") {
  for (double lambda : {0.5, 2.0, 5.0}) {
    const auto sol = pde::survival_pde(lambda, pde::reference_grid(2.0, 3.0));
    for (std::size_t s = 0; s < sol.times.size(); ++s) {
      const auto& v = sol.values[s];
      for (std::size_t j = 0; j < v.size(); ++j) {
        REQUIRE(v[j] >= 0.0);
        REQUIRE(v[j] <= 1.0 + 1e-10);
        if (j > 0) REQUIRE(v[j] >= v[j - 1] - 1e-10);
        if (s > 0) REQUIRE(v[j] <= sol.values[s - 1][j] + 1e-10);
      }
    }
  }
}

TEST_CASE("PDE agrees with the first-passage oracle on a coarse sweep", "[pde]") {
  for (double lambda : {0.5, 5.0}) {
    const auto sol = pde::survival_pde(lambda, pde::reference_grid(2.0, 3.0));
    for (double t : {0.1, 0.7, 2.0}) {
      for (double x : {0.0, 0.4, 1.0, 3.0}) {
        INFO("lambda=" << lambda << " t=" << t << " x=" << x);
        CHECK(std::fabs(sol.at(t, x) - oracle::survival_first_passage(t, x, lambda)) < 1e-4);
      }
    }
  }
}

TEST_CASE("boundary difference converges at first order", "[pde]") {
  double defect[3];
  double dx = 1.0 / 50.0;
  for (int i = 0; i < 3; ++i) {
    pde::Grid g = pde::reference_grid(0.5, 0.0);
    g.dx = dx;
    g.dt = dx / 2.0;
    const auto sol = pde::survival_pde(1.0, g);
    defect[i] = std::fabs(sol.boundary_defect(sol.times.size() - 1));
    dx /= 2.0;
  }
  const double r1 = defect[0] / defect[1];
  const double r2 = defect[1] / defect[2];
  INFO("defects " << defect[0] << ", " << defect[1] << ", " << defect[2]);
  CHECK(r1 > 1.7);
  CHECK(r1 < 2.3);
  CHECK(r2 > 1.7);
  CHECK(r2 < 2.3);
}

TEST_CASE("mesh validation", "[pde]") {
  pde::Grid g;
  g.xProbe = 1.0;  // needs xMax >= 7 at tMax = 1
  CHECK_THROWS_AS(pde::survival_pde(1.0, g), ConfigError);
  g.xMax = 7.0;
  CHECK_NOTHROW(pde::survival_pde(1.0, g));
  g.dx = 0.0;
  CHECK_THROWS_AS(pde::survival_pde(1.0, g), ConfigError);
  CHECK(pde::reference_grid(4.0, 1.0).xMax == 13.0);
  CHECK(pde::reference_grid(0.01, 0.0).xMax == 3.0);
}

TEST_CASE("grid CSV export", "[pde]") {
  pde::Grid g;
  g.dx = 0.5;
  g.dt = 0.5;
  g.xMax = 6.0;
  const auto sol = pde::survival_pde(1.0, g);
  std::ostringstream os;
  sol.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("t,x,u\n", 0) == 0);
  // 3 snapshots (t = 0, 0.5, 1) x 13 nodes, plus the header.
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 3 * 13);
}
