// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

#include "oracles/oracles.hpp"
#include "stonewalk/special.hpp"

using namespace stonewalk;

TEST_CASE("normal upper tail: fixed points", "[special]") {
  CHECK(special::normal_upper_tail(0.0) == 0.5);
  CHECK(std::fabs(special::normal_upper_tail(-38.0) - 1.0) < 1e-14);
  CHECK(special::normal_upper_tail(40.0) >= 0.0);
  CHECK(special::normal_upper_tail(40.0) < 1e-300);
}

TEST_CASE("normal upper tail at the 97.5% quantile", "[special]") {
  const double y = 1.959963985;
  const auto ref = oracle::normal_tail_series(y);
  CHECK(std::fabs(static_cast<double>(ref) - 0.025) < 1e-9);
  CHECK(std::fabs(special::normal_upper_tail(y) - 0.025) < 1e-9);
  CHECK(std::fabs(special::normal_upper_tail(y) - static_cast<double>(ref)) < 1e-15);
}

TEST_CASE("erf family agrees with a long-double series", "[special]") {
  for (double x = -3.0; x <= 3.0; x += 0.0625) {
    const auto s = oracle::erf_series(x);
    INFO("x = " << x);
    CHECK(std::fabs(special::erf(x) - static_cast<double>(s)) < 2e-16);
    CHECK(std::fabs(special::erfc(x) - static_cast<double>(1.0L - s)) < 4e-16);
    CHECK(std::fabs(special::normal_upper_tail(x) - static_cast<double>(oracle::normal_tail_series(x))) <
          1e-15);
  }
}

TEST_CASE("erfc and erfcx agree with Boost in relative error", "[special]") {
  for (double x = -5.0; x <= 26.0; x += 0.173) {
    INFO("x = " << x);
    const double e = boost::math::erfc(x);
    CHECK(std::fabs(special::erfc(x) - e) <= 1e-14 * e);
    if (x < 25.0) {
      const double ex = std::exp(x * x) * e;
      CHECK(std::fabs(special::erfcx(x) - ex) <= 2e-13 * ex);
    }
  }
  // erfcx(x) ~ 1/(x sqrt(pi)) for large x, where erfc itself underflows.
  const double big = 1e6;
  CHECK(std::fabs(special::erfcx(big) * big * std::sqrt(M_PI) - 1.0) < 1e-11);
}

TEST_CASE("normal cdf is the mirrored tail", "[special]") {
  for (double y : {-4.0, -1.0, 0.3, 2.5}) {
    CHECK(special::normal_cdf(y) + special::normal_upper_tail(y) == Catch::Approx(1.0).epsilon(1e-15));
  }
}
