// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// u(t, x) = E_x exp(-lambda * l0(t)) for standard Brownian motion, where l0 is
// the semimartingale local time at 0 (|W| - l0 is a martingale).
//
// The joint law of (l0(t), W_t) has density in z
//
//   (2 pi t)^{-1/2} exp(-(z-x)^2 / 2t)
//     - (lambda/2) exp(lambda a + lambda^2 t / 2) erfc(lambda sqrt(t/2) + a / sqrt(2t)),
//
// a = |z| + |x|, with erfc the classical complementary error function. The
// second term is evaluated as (lambda/2) exp(-a^2 / 2t) erfcx(w) to avoid
// overflow for large lambda.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "stonewalk/error.hpp"
#include "stonewalk/quadrature.hpp"
#include "stonewalk/special.hpp"

namespace stonewalk::limit {

/// Meaning of "Erfc" inside the joint density.
enum class ErfcConvention {
  classical,     ///< 2/sqrt(pi) int_y^inf exp(-s^2) ds. Reproduces the heat-equation route.
  normal_tail,   ///< P(Z > y), Z standard normal. Kept as a diagnostic; does not match.
};

/// Density in z of E_x[exp(-lambda l0(t)); W_t in dz]. Throws DomainError for t <= 0.
inline double killed_joint_density(double t, double x, double z, double lambda,
                                ErfcConvention conv = ErfcConvention::classical) {
  detail::require_domain(t > 0.0, "joint density requires t > 0");
  const double d = z - x;
  const double gauss = std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
  if (lambda == 0.0) return gauss;
  const double a = std::fabs(z) + std::fabs(x);
  const double w = lambda * std::sqrt(t / 2.0) + a / std::sqrt(2.0 * t);
  double killed = 0.0;
  if (conv == ErfcConvention::classical) {
    // exp(lambda a + lambda^2 t/2 - w^2) = exp(-a^2 / 2t)
    killed = 0.5 * lambda * std::exp(-a * a / (2.0 * t)) * special::erfcx(w);
  } else {
    // P(Z > w) = erfc(w / sqrt 2) / 2; exponent rewritten around (w/sqrt2)^2.
    const double v = w / std::numbers::sqrt2;
    const double expo = lambda * a + 0.5 * lambda * lambda * t - v * v;
    killed = 0.5 * lambda * std::exp(expo) * 0.5 * special::erfcx(v);
  }
  return gauss - killed;
}

struct SurvivalOptions {
  double cutoffSigmas = 12.0;
  double absTol = 1e-8;
  ErfcConvention convention = ErfcConvention::classical;
};

/// u(t, x) by adaptive quadrature of the joint density over |z| <= |x| + 12 sqrt(t).
inline double survival_quadrature(double t, double x, double lambda,
                                  const SurvivalOptions& opt = {}) {
  detail::require_domain(t >= 0.0, "survival requires t >= 0");
  detail::require_domain(lambda >= 0.0, "survival requires lambda >= 0");
  if (t == 0.0 || lambda == 0.0) return 1.0;
  const double r = std::fabs(x) + opt.cutoffSigmas * std::sqrt(t);
  const double sd = std::sqrt(t);
  // Panels: kink at 0, Gaussian peak at x resolved at the sqrt(t) scale out to
  // the cutoff, so no panel is much wider than sqrt(t) where the integrand lives.
  std::vector<double> pts = {-r, r, 0.0};
  const double c = opt.cutoffSigmas;
  for (double k : {-c, -8.0, -4.0, -1.0, 1.0, 4.0, 8.0, c}) {
    const double p = x + k * sd;
    if (p > -r && p < r) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto f = [&](double z) { return killed_joint_density(t, x, z, lambda, opt.convention); };
  quad::Options qo;
  qo.absTol = opt.absTol * 1e-2;
  qo.relTol = 0.0;
  const quad::Result res = quad::integrate(f, std::span<const double>(pts), qo);
  return res.value;
}

/// Survival of the stepping-stone limit: u(t, 1) with lambda = 1/alpha.
inline double stepping_stone_limit_survival(double t, double alpha) {
  detail::require_domain(alpha > 0.0, "alpha must be > 0");
  detail::require_domain(t >= 0.0, "t must be >= 0");
  return survival_quadrature(t, 1.0, 1.0 / alpha);
}

/// Survival of the long-range voter limit started at x0: u(t, x0) with lambda = 1/sigma.
///
/// The rate is 1/sigma, not 2/sigma: the voter limit is the inverse of the
/// half-normalized local time (semimartingale local time / 2) at sigma*xi/2,
/// which equals the inverse of the semimartingale local time at sigma*xi.
inline double voter_limit_survival(double t, double sigma, double x0) {
  detail::require_domain(sigma > 0.0, "sigma must be > 0");
  detail::require_domain(t >= 0.0, "t must be >= 0");
  return survival_quadrature(t, x0, 1.0 / sigma);
}

/// E_0 exp(-lambda t0 / (L^2/nu)) in the ring limit: (1 + 4 alpha sqrt(lambda))^{-1}.
inline double ring_limit_laplace(double alpha, double lambda) {
  detail::require_domain(lambda >= 0.0, "lambda must be >= 0");
  return 1.0 / (1.0 + 4.0 * alpha * std::sqrt(lambda));
}

struct RingIdentity {
  double I0 = 0.0;
  double f0 = 0.0;
  double error = 0.0;  // quadrature error estimate on I0
  bool converged = false;
};

/// I0 = (1/pi) int_0^pi g^2 / (1 - (1-u)^2 g^2) dtheta, g = 1 - m(1 - cos theta),
/// and f0 = (1-u)^2 / ((1-u)^2 + 2 dipSize / I0).
///
/// The integrand peaks in a region of width ~ sqrt(2u/m) at theta = 0; panels
/// are graded geometrically from that width.
inline RingIdentity ring_identity_by_descent(double u, double m, double dipSize) {
  detail::require_domain(u > 0.0 && u < 1.0, "mutation probability u must lie in (0, 1)");
  detail::require_domain(m > 0.0 && m < 1.0, "migration probability m must lie in (0, 1)");
  detail::require_domain(dipSize > 0.0, "dipSize must be > 0");
  const double v = (1.0 - u) * (1.0 - u);
  const double oneMinusV = u * (2.0 - u);
  auto f = [m, v, oneMinusV](double theta) {
    // 1 - g = m(1 - cos theta) = 2 m sin^2(theta/2), kept exact near theta = 0.
    const double s = std::sin(0.5 * theta);
    const double e = 2.0 * m * s * s;
    const double g = 1.0 - e;
    return g * g / (oneMinusV + v * e * (2.0 - e));
  };
  std::vector<double> pts = {0.0};
  for (double w = std::sqrt(2.0 * u / m) / 8.0; w < std::numbers::pi; w *= 2.0) pts.push_back(w);
  pts.push_back(std::numbers::pi);
  quad::Options qo;
  qo.absTol = 0.0;
  qo.relTol = 1e-12;
  qo.maxIntervals = 20000;
  const quad::Result r = quad::integrate(f, std::span<const double>(pts), qo);
  RingIdentity out;
  out.I0 = r.value / std::numbers::pi;
  out.error = r.error / std::numbers::pi;
  out.converged = r.converged;
  out.f0 = v / (v + 2.0 * dipSize / out.I0);
  return out;
}

}  // namespace stonewalk::limit
