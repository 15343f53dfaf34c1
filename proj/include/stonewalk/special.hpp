// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Error-function family after W. J. Cody, "Rational Chebyshev approximations
// for the error function", Math. Comp. 23 (1969), using the coefficient set of
// the CALERF routine. Relative accuracy is near double precision everywhere.
#pragma once

#include <cmath>
#include <limits>

namespace stonewalk::special {

namespace detail {

enum class ErfKind { erf, erfc, erfcx };

inline double exp_neg_square(double y) {
  // exp(-y*y) split so the rounding of y*y does not leak into the result.
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del);
}

inline double calerf(double x, ErfKind kind) {
  static constexpr double a[5] = {3.1611237438705656, 113.864154151050156, 377.485237685302021,
                                  3209.37758913846947, .185777706184603153};
  static constexpr double b[4] = {23.6012909523441209, 244.024637934444173, 1282.61652607737228,
                                  2844.23683343917062};
  static constexpr double c[9] = {.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                                  298.635138197400131, 881.95222124176909,  1712.04761263407058,
                                  2051.07837782607147, 1230.33935479799725, 2.15311535474403846e-8};
  static constexpr double d[8] = {15.7449261107098347, 117.693950891312499, 537.181101862009858,
                                  1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
                                  3439.36767414372164, 1230.33935480374942};
  static constexpr double p[6] = {.305326634961232344,   .360344899949804439,
                                  .125781726111229246,   .0160837851487422766,
                                  6.58749161529837803e-4, .0163153871373020978};
  static constexpr double q[5] = {2.56852019228982242, 1.87295284992346047, .527905102951428412,
                                  .0605183413124413191, .00233520497626869185};
  constexpr double kSqrtPiInv = 0.56418958354775628695;
  constexpr double kThresh = 0.46875;
  constexpr double kXSmall = 1.11e-16;
  constexpr double kXBig = 26.543;
  constexpr double kXHuge = 6.71e7;
  constexpr double kXMax = 2.53e307;
  constexpr double kXNeg = -26.628;

  const double y = std::fabs(x);
  double result = 0.0;

  if (y <= kThresh) {
    const double ysq = y > kXSmall ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    result = x * (xnum + a[3]) / (xden + b[3]);
    if (kind != ErfKind::erf) result = 1.0 - result;
    if (kind == ErfKind::erfcx) result *= std::exp(ysq);
    return result;
  }

  if (y <= 4.0) {
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    if (kind != ErfKind::erfcx) result *= exp_neg_square(y);
  } else if (y >= kXBig && (kind != ErfKind::erfcx || y >= kXMax)) {
    result = 0.0;
  } else if (y >= kXBig && y >= kXHuge) {
    result = kSqrtPiInv / y;
  } else {
    const double ysq = 1.0 / (y * y);
    double xnum = p[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + p[i]) * ysq;
      xden = (xden + q[i]) * ysq;
    }
    result = ysq * (xnum + p[4]) / (xden + q[4]);
    result = (kSqrtPiInv - result) / y;
    if (kind != ErfKind::erfcx) result *= exp_neg_square(y);
  }

  switch (kind) {
    case ErfKind::erf:
      result = (0.5 - result) + 0.5;
      return x < 0.0 ? -result : result;
    case ErfKind::erfc:
      return x < 0.0 ? 2.0 - result : result;
    case ErfKind::erfcx:
      if (x >= 0.0) return result;
      if (x < kXNeg) return std::numeric_limits<double>::infinity();
      {
        const double ysq = std::trunc(x * 16.0) / 16.0;
        const double del = (x - ysq) * (x + ysq);
        const double e = std::exp(ysq * ysq) * std::exp(del);
        return (e + e) - result;
      }
  }
  return result;
}

}  // namespace detail

/// erf(x) = 2/sqrt(pi) * int_0^x exp(-s^2) ds.
inline double erf(double x) { return detail::calerf(x, detail::ErfKind::erf); }

/// Complementary error function, 1 - erf(x), in the classical 2/sqrt(pi) normalization.
inline double erfc(double x) { return detail::calerf(x, detail::ErfKind::erfc); }

/// Scaled complement exp(x^2) * erfc(x). Finite and smooth for large positive x.
inline double erfcx(double x) { return detail::calerf(x, detail::ErfKind::erfcx); }

/// Upper tail of the standard normal, P(Z > y).
inline double normal_upper_tail(double y) {
  return 0.5 * erfc(y * 0.70710678118654752440);
}

/// Standard normal CDF, P(Z <= y).
inline double normal_cdf(double y) { return normal_upper_tail(-y); }

}  // namespace stonewalk::special
