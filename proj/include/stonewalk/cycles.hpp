// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Excursion cycles of a walk around the strip |x| <= 2 N^{5/6}.
//
//   T_0 = -1,
//   S_m     = inf{k > T_m : |X_k| > 2 N^{5/6}},
//   T_{m+1} = inf{k > S_m : |X_k| < |X_{S_m}| - N^{5/6}}.
//
// Cycle m is crossed when X(S_{m-1}) and X(S_m) have opposite signs. Thresholds
// are real-valued and compared strictly against integer positions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "stonewalk/dispersal.hpp"
#include "stonewalk/error.hpp"

namespace stonewalk::cycles {

struct CycleRecord {
  std::uint64_t m = 0;
  std::int64_t S = 0;
  std::int64_t T = -1;
  std::int64_t eta = 0;  // S - T
  bool crossed = false;
  std::int64_t posS = 0;
  std::int64_t posT = 0;  // X(T_m); X(0) for m = 0
};

struct Thresholds {
  double inner = 0.0;  // N^{5/6}
  double outer = 0.0;  // 2 N^{5/6}
  static Thresholds for_scale(double N) {
    const double a = std::pow(N, 5.0 / 6.0);
    return {a, 2.0 * a};
  }
};

struct CycleDecomposition {
  Thresholds th;
  std::vector<CycleRecord> records;      // complete cycles (S known)
  std::optional<std::int64_t> pendingT;  // last re-entry without a later exit
  bool prePhase = false;                 // path(0) started inside the strip
  std::optional<std::uint64_t> J;        // first cycle whose [T_m, S_m] window hits 0
  std::optional<std::int64_t> zeroTime;  // first k with X_k = 0

  /// M(n) = sup{m : S_m <= n}; -1 when no cycle has completed by n.
  std::int64_t cycles_completed(std::int64_t n) const {
    std::int64_t out = -1;
    for (const auto& r : records) {
      if (r.S <= n) out = static_cast<std::int64_t>(r.m);
    }
    return out;
  }

  /// L(n): crossed cycles with S_m <= n.
  std::uint64_t crossings(std::int64_t n) const {
    std::uint64_t c = 0;
    for (const auto& r : records) {
      if (r.S <= n && r.crossed) ++c;
    }
    return c;
  }

  /// A_j = T_0 + sum_{m=1..j} (T_m - S_{m-1}): time spent outside the windows.
  std::int64_t A(std::uint64_t j) const {
    if (j >= records.size()) throw DomainError("A_j needs j complete cycles");
    std::int64_t a = records[0].T;
    for (std::uint64_t m = 1; m <= j; ++m) a += records[m].T - records[m - 1].S;
    return a;
  }

  /// B_j = sum_{m=0..j} (S_m - T_m): time spent inside the windows (B_0 includes S_0 + 1).
  std::int64_t B(std::uint64_t j) const {
    if (j >= records.size()) throw DomainError("B_j needs j complete cycles");
    std::int64_t b = 0;
    for (std::uint64_t m = 0; m <= j; ++m) b += records[m].eta;
    return b;
  }

  void write_csv(std::ostream& os, bool header = true) const {
    if (header) os << "m,S,T,eta,crossed,posS,posT\n";
    for (const auto& r : records) {
      os << r.m << ',' << r.S << ',' << r.T << ',' << r.eta << ',' << (r.crossed ? 1 : 0) << ','
         << r.posS << ',' << r.posT << '\n';
    }
  }
};

/// Decomposes a path into cycles. Paths starting inside the strip are flagged
/// (prePhase) and S_0 is their first exit; truncated paths yield partial records.
inline CycleDecomposition cycle_decompose(std::span<const std::int64_t> path, double N) {
  if (path.empty()) throw DomainError("empty path");
  if (!(N >= 1.0)) throw DomainError("N must be >= 1");
  CycleDecomposition out;
  out.th = Thresholds::for_scale(N);
  const double inner = out.th.inner;
  const double outer = out.th.outer;
  const auto n = static_cast<std::int64_t>(path.size());
  auto absAt = [&](std::int64_t k) {
    return std::fabs(static_cast<double>(path[static_cast<std::size_t>(k)]));
  };
  out.prePhase = absAt(0) <= outer;

  for (std::int64_t k = 0; k < n; ++k) {
    if (path[static_cast<std::size_t>(k)] == 0) {
      out.zeroTime = k;
      break;
    }
  }

  std::int64_t T = -1;
  std::uint64_t m = 0;
  for (;;) {
    std::int64_t k = T + 1;
    while (k < n && !(absAt(k) > outer)) ++k;
    if (k >= n) {
      if (T >= 0) out.pendingT = T;
      break;
    }
    CycleRecord r;
    r.m = m;
    r.S = k;
    r.T = T;
    r.eta = k - T;
    r.posS = path[static_cast<std::size_t>(k)];
    r.posT = path[static_cast<std::size_t>(T >= 0 ? T : 0)];
    if (m >= 1) {
      const std::int64_t prev = out.records.back().posS;
      r.crossed = (prev < 0 && r.posS > 0) || (prev > 0 && r.posS < 0);
    }
    out.records.push_back(r);

    const double reentry = std::fabs(static_cast<double>(r.posS)) - inner;
    k = r.S + 1;
    while (k < n && !(absAt(k) < reentry)) ++k;
    if (k >= n) break;
    T = k;
    ++m;
  }

  // J: the cycle whose window [T_m, S_m] contains the first zero.
  if (out.zeroTime) {
    const std::int64_t z = *out.zeroTime;
    for (const auto& r : out.records) {
      if (r.T <= z && z <= r.S) {
        out.J = r.m;
        break;
      }
    }
    if (!out.J && out.pendingT && *out.pendingT <= z) out.J = out.records.size();
  }
  return out;
}

/// 2 L(floor(N t)) / N^{1/6}. Converges to sigma * l0(t) with l0 the semimartingale
/// local time halved, i.e. to sigma * l(t) / 2 in the |W| - l martingale normalization.
inline double crossing_local_time(const CycleDecomposition& d, double N, double t) {
  const auto n = static_cast<std::int64_t>(std::floor(N * t));
  return 2.0 * static_cast<double>(d.crossings(n)) / std::pow(N, 1.0 / 6.0);
}

inline double crossing_local_time(std::span<const std::int64_t> path, double N, double t) {
  return crossing_local_time(cycle_decompose(path, N), N, t);
}

struct CycleMoments {
  std::uint64_t cycles = 0;        // cycles with m >= 1 used for the moments
  double meanEta = 0.0;
  double seMeanEta = 0.0;
  double meanEta2 = 0.0;
  double seMeanEta2 = 0.0;
  double predictedMean = 0.0;      // 3 N^{2/3} / sigma^2
  double predictedSecond = 0.0;    // 19 N^{4/3} / sigma^4
  std::uint64_t tailEligible = 0;  // decompositions with at least j* + 1 cycles
  std::uint64_t tailHits = 0;      // of which B_{j*} > 2 N^{17/18}
  double tailFrequency = 0.0;
  std::uint64_t jStar = 0;         // floor(N^{2/9})
  bool insufficient = false;       // fewer than 1000 cycles
};

/// Moments of eta over complete cycles m >= 1 (m = 0 carries the T_0 = -1
/// convention and is excluded) and the frequency of {B_{j*} > 2 N^{17/18}}.
/// A decomposition with a single cycle contributes that cycle (m = 0 is used
/// only when no m >= 1 cycle exists anywhere).
inline CycleMoments cycle_moment_diagnostics(std::span<const CycleDecomposition> samples,
                                             const dispersal::Kernel& kernel) {
  CycleMoments out;
  const double N = static_cast<double>(kernel.N());
  const double s2 = kernel.sigma_n2();
  out.predictedMean = 3.0 * std::pow(N, 2.0 / 3.0) / s2;
  out.predictedSecond = 19.0 * std::pow(N, 4.0 / 3.0) / (s2 * s2);
  out.jStar = static_cast<std::uint64_t>(std::floor(std::pow(N, 2.0 / 9.0)));
  const double tailLevel = 2.0 * std::pow(N, 17.0 / 18.0);

  bool anyLater = false;
  for (const auto& d : samples) anyLater = anyLater || d.records.size() > 1;
  const std::uint64_t firstM = anyLater ? 1 : 0;

  double s1 = 0.0;
  double s2sum = 0.0;
  double s4 = 0.0;
  for (const auto& d : samples) {
    for (const auto& r : d.records) {
      if (r.m < firstM) continue;
      const double e = static_cast<double>(r.eta);
      s1 += e;
      s2sum += e * e;
      s4 += e * e * e * e;
      ++out.cycles;
    }
    if (d.records.size() > out.jStar) {
      ++out.tailEligible;
      if (static_cast<double>(d.B(out.jStar)) > tailLevel) ++out.tailHits;
    }
  }
  out.insufficient = out.cycles < 1000;
  if (out.cycles > 0) {
    const double n = static_cast<double>(out.cycles);
    out.meanEta = s1 / n;
    out.meanEta2 = s2sum / n;
    if (out.cycles > 1) {
      out.seMeanEta = std::sqrt(std::max(0.0, (s2sum / n - out.meanEta * out.meanEta)) / (n - 1.0));
      out.seMeanEta2 =
          std::sqrt(std::max(0.0, (s4 / n - out.meanEta2 * out.meanEta2)) / (n - 1.0));
    }
  }
  if (out.tailEligible > 0) {
    out.tailFrequency = static_cast<double>(out.tailHits) / static_cast<double>(out.tailEligible);
  }
  return out;
}

}  // namespace stonewalk::cycles
