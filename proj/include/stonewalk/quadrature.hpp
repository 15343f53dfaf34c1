// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
// The error estimate follows QUADPACK's QK15 heuristic.
#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace stonewalk::quad {

struct Options {
  double absTol = 1e-10;
  double relTol = 1e-12;
  int maxIntervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::fabs(resk);
  double fv1[7];
  double fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  }
  const double value = resk * half;
  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, value, err};
}

}  // namespace detail

/// Integrates f over consecutive panels [pts[0],pts[1]], [pts[1],pts[2]], ...
/// Breakpoints let callers place kinks and narrow peaks on panel edges.
template <class F>
Result integrate(F&& f, std::span<const double> pts, const Options& opt = {}) {
  Result out;
  std::priority_queue<detail::Piece> heap;
  double total = 0.0;
  double totalErr = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] == pts[i]) continue;
    const detail::Piece p = detail::kronrod15(f, pts[i], pts[i + 1]);
    out.evaluations += 15;
    total += p.value;
    totalErr += p.error;
    heap.push(p);
  }
  while (!heap.empty() && totalErr > std::max(opt.absTol, opt.relTol * std::fabs(total)) &&
         static_cast<int>(heap.size()) < opt.maxIntervals) {
    const detail::Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Piece left = detail::kronrod15(f, worst.a, mid);
    const detail::Piece right = detail::kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    totalErr += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the leaves to shed the drift of the running updates.
  total = 0.0;
  totalErr = 0.0;
  out.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    total += heap.top().value;
    totalErr += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = totalErr;
  out.converged = totalErr <= std::max(opt.absTol, opt.relTol * std::fabs(total));
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  const double pts[2] = {a, b};
  return integrate(f, std::span<const double>(pts, 2), opt);
}

template <class F>
Result integrate(F&& f, std::initializer_list<double> pts, const Options& opt = {}) {
  const std::vector<double> v(pts);
  return integrate(f, std::span<const double>(v), opt);
}

}  // namespace stonewalk::quad
