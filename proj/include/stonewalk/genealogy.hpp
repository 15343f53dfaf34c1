// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pairwise-lineage coalescence for the stepping stone model on Z, the ring
// (diploid colonies as 2*dipSize genes) and the long-range voter model.
//
// Simulation strategy. Each lineage has replacement events at rate 1. While
// the lineages sit in different colonies only migration events can matter, so
// the apart phase is the rate-2nu migration chain (exact thinning). While they
// share a colony, events arrive at rate 2 and each one either coalesces,
// migrates, or changes nothing; the run of "nothing" events is drawn as one
// geometric batch. Holding times are not drawn per event: the total time is
// Gamma(nApart)/(2nu) + Gamma(nTogether)/2, which has the same law as the sum
// of the individual exponential clocks. With a finite horizon the aggregate
// phase stops once the apart count makes crossing the horizon overwhelmingly
// likely; if the drawn time still falls short, the run continues with
// per-event exponential clocks, so censoring is exact.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "stonewalk/dispersal.hpp"
#include "stonewalk/error.hpp"
#include "stonewalk/random.hpp"

namespace stonewalk::genealogy {

inline constexpr std::uint64_t kDefaultMaxSteps = 1'000'000'000;

struct SteppingStoneConfig {
  std::uint64_t M = 1;   // haploid individuals per colony
  double nu = 0.1;       // migration probability per event
  std::int64_t L = 1;    // initial separation in colonies

  double alpha() const { return static_cast<double>(M) * nu / static_cast<double>(L); }

  /// scaledTime = rawTime * time_scale() = 2 rawTime / (L^2 / nu). L = 0 uses L = 1.
  double time_scale() const {
    const double l = static_cast<double>(L > 0 ? L : 1);
    return 2.0 * nu / (l * l);
  }

  void validate() const {
    detail::require(M >= 1, "M must be >= 1");
    detail::require(nu > 0.0 && nu < 1.0, "nu must lie in (0, 1)");
    detail::require(L >= 0, "L must be >= 0");
    detail::require(!(M == 1 && L == 0), "L must be >= 1 when M = 1");
  }
};

struct RingConfig {
  std::int64_t colonies = 3;    // ring size
  std::uint64_t dipSize = 1;    // diploid individuals per colony (2*dipSize genes)
  double m = 0.1;               // migration probability
  double u = 0.0;               // mutation probability (not used by the pair simulation)
  std::int64_t i = 0;           // separation of the sampled colonies
  std::int64_t scaleLength = 0; // L in the time scaling; 0 means L = colonies

  std::uint64_t genes() const { return 2 * dipSize; }
  double length() const {
    return static_cast<double>(scaleLength > 0 ? scaleLength : colonies);
  }
  /// scaledTime = rawTime * time_scale() = rawTime / (L^2 / m).
  double time_scale() const { return m / (length() * length()); }

  void validate() const {
    detail::require(colonies >= 3, "ring needs at least 3 colonies");
    detail::require(dipSize >= 1, "dipSize must be >= 1");
    detail::require(m > 0.0 && m < 1.0, "m must lie in (0, 1)");
    detail::require(u >= 0.0 && u < 1.0, "u must lie in [0, 1)");
    detail::require(i >= 0 && i < colonies, "i must lie in [0, colonies)");
    detail::require(scaleLength >= 0, "scaleLength must be >= 0");
  }
};

struct VoterConfig {
  const dispersal::Kernel* kernel = nullptr;
  std::int64_t L = 0;
  std::uint64_t maxSteps = kDefaultMaxSteps;

  /// scaledTime = 2 rawTime / N.
  double time_scale() const { return 2.0 / static_cast<double>(kernel->N()); }

  void validate() const {
    detail::require(kernel != nullptr, "voter config needs a kernel");
    detail::require(L >= 0, "L must be >= 0");
    detail::require(maxSteps >= 1, "maxSteps must be >= 1");
  }
};

/// Initial separation for a target x0 = L / (sigma N): L = ceil(x0 sigma_N N).
inline std::int64_t separation_for(const dispersal::Kernel& k, double x0) {
  return static_cast<std::int64_t>(
      std::ceil(x0 * k.sigma_n() * static_cast<double>(k.N()) - 1e-9));
}

struct CoalescenceSample {
  std::uint64_t replicaId = 0;
  double rawTime = 0.0;
  double scaledTime = 0.0;
  bool coalesced = false;
  std::uint64_t events = 0;  // simulated events (apart migrations + together events), or jumps
};

struct Limits {
  std::uint64_t maxSteps = kDefaultMaxSteps;
  /// Censor once scaled time provably exceeds this. Infinite means run to coalescence.
  double horizon = std::numeric_limits<double>::infinity();
  /// Override of the aggregate-phase cap (0 = derive from the horizon). For tests.
  std::uint64_t aggregateCap = 0;
};

namespace detail {

inline std::uint64_t aggregate_cap(double meanCount) {
  if (!std::isfinite(meanCount)) return std::numeric_limits<std::uint64_t>::max();
  const double cap = meanCount + 10.0 * std::sqrt(meanCount) + 10.0;
  if (cap >= 9.0e18) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(cap);
}

// Colony-pair dynamics shared by the line and the ring. ringSize = 0 means Z.
struct ColonyPair {
  std::uint64_t genes;
  double nu;
  std::int64_t ringSize;
  double timeScale;

  std::int64_t wrap(std::int64_t x) const {
    if (ringSize == 0) return x;
    x %= ringSize;
    return x < 0 ? x + ringSize : x;
  }

  CoalescenceSample run(std::int64_t a, std::int64_t b, Stream& rng, const Limits& lim,
                        std::uint64_t replicaId) const {
    CoalescenceSample out;
    out.replicaId = replicaId;
    a = wrap(a);
    b = wrap(b);
    const double pCoal = (1.0 - nu) / static_cast<double>(genes);
    const double pDecisive = pCoal + nu;
    const double coalGivenDecisive = pCoal / pDecisive;
    const double apartRate = 2.0 * nu;

    std::uint64_t nApart = 0;
    std::uint64_t nTogether = 0;
    std::uint64_t events = 0;
    const std::uint64_t cap =
        lim.aggregateCap > 0 ? lim.aggregateCap : aggregate_cap(lim.horizon * apartRate / timeScale);

    auto finish = [&](double raw, bool coalesced) {
      out.rawTime = raw;
      out.scaledTime = raw * timeScale;
      out.coalesced = coalesced;
      out.events = events;
      return out;
    };
    auto aggregate_time = [&]() {
      return rng.erlang(nApart, apartRate) + rng.erlang(nTogether, 2.0);
    };
    // Migration of one lineage; returns true if it lands on the other and coalesces.
    auto migrate = [&](bool& together) {
      const bool first = rng.bit();
      const std::int64_t step = rng.bit() ? 1 : -1;
      std::int64_t& mover = first ? a : b;
      mover = wrap(mover + step);
      together = (a == b);
      return together && rng.below(genes) == 0;
    };

    bool together = (a == b);
    // Aggregate phase.
    for (;;) {
      if (events >= lim.maxSteps) return finish(aggregate_time(), false);
      if (nApart >= cap) break;
      if (together) {
        std::uint64_t k = rng.geometric_failures(pDecisive) + 1;
        if (k > lim.maxSteps - events) {
          nTogether += lim.maxSteps - events;
          events = lim.maxSteps;
          return finish(aggregate_time(), false);
        }
        nTogether += k;
        events += k;
        if (rng.uniform() < coalGivenDecisive) return finish(aggregate_time(), true);
        const bool first = rng.bit();
        const std::int64_t step = rng.bit() ? 1 : -1;
        (first ? a : b) = wrap((first ? a : b) + step);
        together = (a == b);  // only possible on rings of size < 3
      } else {
        ++nApart;
        ++events;
        if (migrate(together)) return finish(aggregate_time(), true);
      }
    }
    double t = aggregate_time();
    if (t * timeScale > lim.horizon) return finish(t, false);

    // Per-event continuation below the horizon.
    for (;;) {
      if (events >= lim.maxSteps) return finish(t, false);
      ++events;
      if (together) {
        t += rng.exponential(2.0);
        if (t * timeScale > lim.horizon) return finish(t, false);
        const double v = rng.uniform();
        if (v < pCoal) return finish(t, true);
        if (v < pDecisive) {
          const bool first = rng.bit();
          const std::int64_t step = rng.bit() ? 1 : -1;
          (first ? a : b) = wrap((first ? a : b) + step);
          together = (a == b);
        }
      } else {
        t += rng.exponential(apartRate);
        if (t * timeScale > lim.horizon) return finish(t, false);
        if (migrate(together)) return finish(t, true);
      }
    }
  }
};

}  // namespace detail

/// One stepping-stone replica: lineages start in colonies 0 and L.
inline CoalescenceSample simulate_stepping_pair(const SteppingStoneConfig& cfg, Stream& rng,
                                                const Limits& lim = {},
                                                std::uint64_t replicaId = 0) {
  cfg.validate();
  const detail::ColonyPair model{cfg.M, cfg.nu, 0, cfg.time_scale()};
  return model.run(0, cfg.L, rng, lim, replicaId);
}

/// One ring replica: lineages start in colonies 0 and i, colonies hold 2*dipSize genes.
inline CoalescenceSample simulate_ring_pair(const RingConfig& cfg, Stream& rng,
                                            const Limits& lim = {}, std::uint64_t replicaId = 0) {
  cfg.validate();
  const detail::ColonyPair model{cfg.genes(), cfg.m, cfg.colonies, cfg.time_scale()};
  return model.run(0, cfg.i, rng, lim, replicaId);
}

/// One voter replica: the difference walk jumps at rate 2 with kernel steps until it hits 0.
inline CoalescenceSample simulate_voter_pair(const VoterConfig& cfg, Stream& rng,
                                             const Limits& lim = {}, std::uint64_t replicaId = 0) {
  cfg.validate();
  const dispersal::Kernel& q = *cfg.kernel;
  const double scale = cfg.time_scale();
  const std::uint64_t maxSteps = std::min(cfg.maxSteps, lim.maxSteps);
  CoalescenceSample out;
  out.replicaId = replicaId;
  auto finish = [&](double raw, bool coalesced, std::uint64_t jumps) {
    out.rawTime = raw;
    out.scaledTime = raw * scale;
    out.coalesced = coalesced;
    out.events = jumps;
    return out;
  };
  std::int64_t d = cfg.L;
  if (d == 0) return finish(0.0, true, 0);
  const std::uint64_t cap =
      lim.aggregateCap > 0 ? lim.aggregateCap : detail::aggregate_cap(lim.horizon * 2.0 / scale);
  std::uint64_t jumps = 0;
  for (;;) {
    if (jumps >= maxSteps) return finish(rng.erlang(jumps, 2.0), false, jumps);
    if (jumps >= cap) break;
    d += q.sample(rng);
    ++jumps;
    if (d == 0) return finish(rng.erlang(jumps, 2.0), true, jumps);
  }
  double t = rng.erlang(jumps, 2.0);
  for (;;) {
    if (t * scale > lim.horizon || jumps >= maxSteps) return finish(t, false, jumps);
    t += rng.exponential(2.0);
    if (t * scale > lim.horizon) return finish(t, false, jumps);
    d += q.sample(rng);
    ++jumps;
    if (d == 0) return finish(t, true, jumps);
  }
}

// ---------------------------------------------------------------------------
// Paths

/// Embedded jump chain of the stepping-stone difference process: a simple
/// random walk from `start`. Returns steps+1 positions.
inline std::vector<std::int64_t> srw_path(std::int64_t start, std::uint64_t steps, Stream& rng) {
  std::vector<std::int64_t> p;
  p.reserve(steps + 1);
  p.push_back(start);
  for (std::uint64_t k = 0; k < steps; ++k) p.push_back(p.back() + (rng.bit() ? 1 : -1));
  return p;
}

/// Discrete-time walk with kernel steps from `start`. Returns steps+1 positions.
inline std::vector<std::int64_t> kernel_walk_path(const dispersal::Kernel& q, std::int64_t start,
                                                  std::uint64_t steps, Stream& rng) {
  std::vector<std::int64_t> p;
  p.reserve(steps + 1);
  p.push_back(start);
  for (std::uint64_t k = 0; k < steps; ++k) p.push_back(p.back() + q.sample(rng));
  return p;
}

/// V_m = #{1 <= k <= m : path[k] = 0} for m = 0..horizon (horizon <= path.size() - 1).
inline std::vector<std::uint64_t> count_zero_visits(std::span<const std::int64_t> path,
                                                    std::uint64_t horizon) {
  if (path.empty()) throw DomainError("empty path");
  if (horizon + 1 > path.size()) throw DomainError("horizon exceeds the path length");
  std::vector<std::uint64_t> v(horizon + 1, 0);
  for (std::uint64_t m = 1; m <= horizon; ++m) v[m] = v[m - 1] + (path[m] == 0 ? 1 : 0);
  return v;
}

/// V at `horizon` for a simple random walk from L, without storing the path.
inline std::uint64_t srw_zero_visits(std::int64_t L, std::uint64_t horizon, Stream& rng) {
  std::int64_t y = L;
  std::uint64_t v = 0;
  for (std::uint64_t k = 0; k < horizon; ++k) {
    y += rng.bit() ? 1 : -1;
    v += (y == 0);
  }
  return v;
}

}  // namespace stonewalk::genealogy
