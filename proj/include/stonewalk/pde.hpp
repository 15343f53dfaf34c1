// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// u_t = u_xx / 2 on x > 0 with u_x(t, 0+) = lambda u(t, 0), u(0, x) = 1 and
// u(t, xMax) = 1. Crank–Nicolson in time with a ghost-point Robin condition;
// the first steps are replaced by backward-Euler half steps (Rannacher
// start-up) to damp the incompatibility between the initial and boundary data.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "stonewalk/error.hpp"

namespace stonewalk::pde {

struct Grid {
  double dx = 1.0 / 400.0;
  double dt = 1.0 / 800.0;
  double xMax = 3.0;
  double tMax = 1.0;
  double xProbe = 0.0;     // largest |x| the caller will read
  int snapshotEvery = 1;   // store every k-th time level
  int startupSteps = 2;    // time steps done as two backward-Euler half steps each
};

/// Reference mesh: dx = 1/400, dt = 1/800, xMax = max(3, xProbe + 6 sqrt(tMax)).
inline Grid reference_grid(double tMax, double xProbe) {
  Grid g;
  g.tMax = tMax;
  g.xProbe = xProbe;
  g.xMax = std::max(3.0, xProbe + 6.0 * std::sqrt(tMax));
  return g;
}

class GridSolution {
 public:
  double dx = 0.0;
  double dt = 0.0;
  double xMax = 0.0;
  double tMax = 0.0;
  double lambda = 0.0;
  std::vector<double> times;               // snapshot times, ascending, times[0] = 0
  std::vector<std::vector<double>> values; // values[s][j] = u(times[s], j dx), j = 0..J
  double residual = 0.0;                   // max-norm residual over all tridiagonal solves

  std::size_t nodes() const { return values.empty() ? 0 : values.front().size(); }

  /// u at snapshot s and |x|, cubic Lagrange interpolation in x.
  double at_snapshot(std::size_t s, double x) const {
    const std::vector<double>& v = values.at(s);
    const double ax = std::fabs(x);
    if (ax >= xMax) return 1.0;
    const double pos = ax / dx;
    const auto n = static_cast<long>(v.size());
    long j = static_cast<long>(std::floor(pos));
    const double frac = pos - static_cast<double>(j);
    if (frac == 0.0) return v[static_cast<std::size_t>(j)];
    long j0 = std::clamp(j - 1, 0L, n - 4);
    double out = 0.0;
    for (long a = 0; a < 4; ++a) {
      double w = 1.0;
      for (long b = 0; b < 4; ++b) {
        if (b != a) w *= (pos - static_cast<double>(j0 + b)) / static_cast<double>(a - b);
      }
      out += w * v[static_cast<std::size_t>(j0 + a)];
    }
    return out;
  }

  /// u(t, x). Linear in t between stored snapshots; exact at snapshot times.
  double at(double t, double x) const {
    if (t <= 0.0) return 1.0;
    if (t > tMax * (1.0 + 1e-12)) throw DomainError("t beyond the solved horizon");
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12 * std::max(1.0, t));
    std::size_t hi = static_cast<std::size_t>(it - times.begin());
    if (hi >= times.size()) hi = times.size() - 1;
    if (std::fabs(times[hi] - t) <= 1e-12 * std::max(1.0, t)) return at_snapshot(hi, x);
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * at_snapshot(lo, x) + w * at_snapshot(hi, x);
  }

  /// One-sided boundary difference (u(dx) - u(0)) / dx minus lambda u(0) at snapshot s.
  double boundary_defect(std::size_t s) const {
    const std::vector<double>& v = values.at(s);
    return (v[1] - v[0]) / dx - lambda * v[0];
  }

  /// CSV rows "t,x,u" for every stored snapshot and node.
  void write_csv(std::ostream& os) const {
    os << "t,x,u\n";
    char buf[96];
    for (std::size_t s = 0; s < times.size(); ++s) {
      for (std::size_t j = 0; j < values[s].size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", times[s],
                      static_cast<double>(j) * dx, values[s][j]);
        os << buf;
      }
    }
  }
};

namespace detail {

// Tridiagonal system with constant coefficients: sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1].
struct Tridiagonal {
  std::vector<double> sub, diag, sup;
  std::vector<double> cPrime, denomInv;  // Thomas factorization

  void factor() {
    const std::size_t n = diag.size();
    cPrime.assign(n, 0.0);
    denomInv.assign(n, 0.0);
    double prevC = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double den = diag[i] - (i > 0 ? sub[i] * prevC : 0.0);
      if (den == 0.0) throw NumericalError("tridiagonal pivot vanished");
      denomInv[i] = 1.0 / den;
      cPrime[i] = (i + 1 < n ? sup[i] : 0.0) * denomInv[i];
      prevC = cPrime[i];
    }
  }

  void solve(const std::vector<double>& rhs, std::vector<double>& x) const {
    const std::size_t n = diag.size();
    x.resize(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      prev = (rhs[i] - (i > 0 ? sub[i] * prev : 0.0)) * denomInv[i];
      x[i] = prev;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cPrime[i] * x[i + 1];
  }

  double residual(const std::vector<double>& x, const std::vector<double>& rhs) const {
    const std::size_t n = diag.size();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = diag[i] * x[i];
      if (i > 0) ax += sub[i] * x[i - 1];
      if (i + 1 < n) ax += sup[i] * x[i + 1];
      r = std::max(r, std::fabs(ax - rhs[i]));
    }
    return r;
  }
};

// Spatial operator A (u_xx / 2 with the Robin row) on unknowns j = 0..n-1;
// u_n = 1 enters as the constant vector b.
struct Operator {
  std::size_t n;
  double row0Diag, row0Sup, off, diag;  // interior: off, diag, off
  double bLast;                         // contribution of u_n = 1 to row n-1
};

inline Operator make_operator(std::size_t n, double dx, double lambda) {
  const double h2 = dx * dx;
  return {n, -(1.0 + lambda * dx) / h2, 1.0 / h2, 0.5 / h2, -1.0 / h2, 0.5 / h2};
}

// (I - theta k A)
inline Tridiagonal implicit_matrix(const Operator& A, double theta, double k) {
  Tridiagonal M;
  M.sub.assign(A.n, -theta * k * A.off);
  M.sup.assign(A.n, -theta * k * A.off);
  M.diag.assign(A.n, 1.0 - theta * k * A.diag);
  M.diag[0] = 1.0 - theta * k * A.row0Diag;
  M.sup[0] = -theta * k * A.row0Sup;
  M.sub[0] = 0.0;
  M.factor();
  return M;
}

// rhs = (I + (1-theta) k A) u + k b
inline void explicit_part(const Operator& A, double theta, double k, const std::vector<double>& u,
                          std::vector<double>& rhs) {
  const std::size_t n = A.n;
  const double e = (1.0 - theta) * k;
  rhs.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double au = 0.0;
    if (j == 0) {
      au = A.row0Diag * u[0] + (n > 1 ? A.row0Sup * u[1] : A.row0Sup * 1.0);
    } else {
      const double right = j + 1 < n ? u[j + 1] : 0.0;
      au = A.off * u[j - 1] + A.diag * u[j] + A.off * right;
    }
    rhs[j] = u[j] + e * au;
  }
  if (n > 1) rhs[n - 1] += k * A.bLast;
}

}  // namespace detail

/// Solves the Robin problem on [0, xMax] x [0, tMax].
///
/// Throws ConfigError for non-positive widths and when xMax < xProbe + 6 sqrt(tMax)
/// (the Dirichlet far field would then be felt at the probe points).
inline GridSolution survival_pde(double lambda, const Grid& g) {
  if (!(g.dx > 0.0) || !(g.dt > 0.0)) throw ConfigError("dx and dt must be > 0");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(g.tMax >= 0.0)) throw ConfigError("tMax must be >= 0");
  if (g.snapshotEvery < 1) throw ConfigError("snapshotEvery must be >= 1");
  if (g.xMax < g.xProbe + 6.0 * std::sqrt(g.tMax)) {
    throw ConfigError("xMax too small: far-field boundary within 6 sqrt(tMax) of the probe range");
  }
  const auto J = static_cast<std::size_t>(std::llround(g.xMax / g.dx));
  if (J < 2) throw ConfigError("mesh has fewer than two cells");
  const auto steps = static_cast<std::size_t>(std::llround(g.tMax / g.dt));

  GridSolution out;
  out.dx = g.dx;
  out.dt = g.dt;
  out.xMax = static_cast<double>(J) * g.dx;
  out.tMax = static_cast<double>(steps) * g.dt;
  out.lambda = lambda;

  const std::size_t n = J;  // unknowns j = 0..J-1, node J fixed at 1
  std::vector<double> u(n, 1.0);
  auto store = [&](double t) {
    out.times.push_back(t);
    std::vector<double> full(u);
    full.push_back(1.0);
    out.values.push_back(std::move(full));
  };
  store(0.0);
  if (steps == 0) return out;

  const detail::Operator A = detail::make_operator(n, g.dx, lambda);
  const detail::Tridiagonal cn = detail::implicit_matrix(A, 0.5, g.dt);
  const detail::Tridiagonal be = detail::implicit_matrix(A, 1.0, 0.5 * g.dt);
  std::vector<double> rhs;
  std::vector<double> next;
  auto advance = [&](const detail::Tridiagonal& M, double theta, double k) {
    detail::explicit_part(A, theta, k, u, rhs);
    M.solve(rhs, next);
    out.residual = std::max(out.residual, M.residual(next, rhs));
    u.swap(next);
  };

  for (std::size_t s = 1; s <= steps; ++s) {
    if (s <= static_cast<std::size_t>(g.startupSteps)) {
      advance(be, 1.0, 0.5 * g.dt);
      advance(be, 1.0, 0.5 * g.dt);
    } else {
      advance(cn, 0.5, g.dt);
    }
    if (s % static_cast<std::size_t>(g.snapshotEvery) == 0 || s == steps) {
      store(static_cast<double>(s) * g.dt);
    }
  }
  return out;
}

}  // namespace stonewalk::pde
