// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dispersal kernels: symmetric integer-displacement laws q^N with a uniform
// floor near the origin, exponential tails and hard truncation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stonewalk/error.hpp"
#include "stonewalk/random.hpp"

namespace stonewalk::dispersal {

enum class Family { uniform, bilateral_exponential, discrete_normal, nearest_neighbor };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::uniform: return "uniform";
    case Family::bilateral_exponential: return "bilateral-exponential";
    case Family::discrete_normal: return "discrete-normal";
    case Family::nearest_neighbor: return "nearest-neighbor";
  }
  return "unknown";
}

/// Accepts both the long names and the CLI short names (bexp, dnormal, nn).
inline Family parse_family(std::string_view s) {
  if (s == "uniform") return Family::uniform;
  if (s == "bilateral-exponential" || s == "bexp") return Family::bilateral_exponential;
  if (s == "discrete-normal" || s == "dnormal") return Family::discrete_normal;
  if (s == "nearest-neighbor" || s == "nn") return Family::nearest_neighbor;
  throw ConfigError("unknown kernel family: " + std::string(s));
}

inline constexpr double kDefaultMix = 0.1;
inline constexpr double kDefaultB = 8.0;

/// Immutable dispersal law. Masses are stored densely for z in [-radius, radius].
///
/// Sampling uses a Vose alias table over the same dense index range. One draw
/// consumes two 64-bit words: the first selects column floor(w * n) (128-bit
/// multiply-high), the second is a 53-bit uniform compared against the column's
/// acceptance probability. Table construction is deterministic.
class Kernel {
 public:
  /// Builds a kernel from explicit masses for z = -radius..radius. No assumption
  /// is enforced here; use verify_assumptions() to audit.
  Kernel(Family family, std::uint64_t N, double mix, double B, std::vector<double> masses,
         bool exempt)
      : family_(family), N_(N), mix_(mix), B_(B), exempt_(exempt), mass_(std::move(masses)) {
    if (N_ == 0) throw ConfigError("kernel scale N must be >= 1");
    if (mass_.empty() || mass_.size() % 2 == 0) {
      throw ConfigError("kernel mass array must have odd length 2*radius+1");
    }
    radius_ = static_cast<std::int64_t>(mass_.size() / 2);
    // Trim exact-zero tails so radius is the true support radius.
    while (radius_ > 0 && mass_.front() == 0.0 && mass_.back() == 0.0) {
      mass_.erase(mass_.begin());
      mass_.pop_back();
      --radius_;
    }
    for (double m : mass_) {
      if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("kernel masses must be finite and >= 0");
    }
    double second = 0.0;
    double fourth = 0.0;
    for (std::int64_t z = -radius_; z <= radius_; ++z) {
      const double m = mass(z);
      const double z2 = static_cast<double>(z) * static_cast<double>(z);
      second += z2 * m;
      fourth += z2 * z2 * m;
    }
    variance_ = second;
    fourth_ = fourth;
    build_alias();
  }

  Family family() const noexcept { return family_; }
  std::uint64_t N() const noexcept { return N_; }
  double mix() const noexcept { return mix_; }
  double B() const noexcept { return B_; }
  bool exempt() const noexcept { return exempt_; }

  /// max |z| with positive mass.
  std::int64_t support_radius() const noexcept { return radius_; }

  /// ceil(B * sqrt(N) * log N), at least floor(sqrt(N)) and at least 1.
  std::int64_t truncation_radius() const noexcept { return truncation_radius_for(N_, B_); }

  static std::int64_t truncation_radius_for(std::uint64_t N, double B) {
    const double n = static_cast<double>(N);
    const auto r = static_cast<std::int64_t>(std::ceil(B * std::sqrt(n) * std::log(n)));
    return std::max<std::int64_t>({r, floor_sqrt(N), 1});
  }

  static std::int64_t floor_sqrt(std::uint64_t N) {
    auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(N)));
    while (s * s > static_cast<std::int64_t>(N)) --s;
    while ((s + 1) * (s + 1) <= static_cast<std::int64_t>(N)) ++s;
    return s;
  }

  double mass(std::int64_t z) const noexcept {
    if (z < -radius_ || z > radius_) return 0.0;
    return mass_[static_cast<std::size_t>(z + radius_)];
  }

  /// Masses for z = -support_radius()..support_radius().
  std::span<const double> masses() const noexcept { return mass_; }

  /// Sum z^2 q(z) = sigma_N^2 * N.
  double variance() const noexcept { return variance_; }
  /// Sum z^4 q(z).
  double fourth_moment() const noexcept { return fourth_; }
  double sigma_n() const noexcept { return std::sqrt(variance_ / static_cast<double>(N_)); }
  double sigma_n2() const noexcept { return variance_ / static_cast<double>(N_); }

  /// min over |z| <= sqrt(N) of sqrt(N) * q(z).
  double floor_constant() const noexcept {
    const std::int64_t s = floor_sqrt(N_);
    double h = std::numeric_limits<double>::infinity();
    for (std::int64_t z = -s; z <= s; ++z) h = std::min(h, mass(z));
    return h * std::sqrt(static_cast<double>(N_));
  }

  std::int64_t sample(Stream& rng) const noexcept {
    const auto n = static_cast<std::uint64_t>(prob_.size());
    const auto col = static_cast<std::size_t>(
        (static_cast<uint128>(rng.next()) * n) >> 64);
    const double u = rng.uniform();
    const std::size_t idx = u < prob_[col] ? col : alias_[col];
    return static_cast<std::int64_t>(idx) - radius_;
  }

  /// phi(theta) = sum q(z) cos(z theta). Summed symmetrically, so exactly even in theta.
  double char_fn(double theta) const noexcept {
    double s = 0.0;
    for (std::int64_t z = radius_; z >= 1; --z) {
      const double m = mass(z);
      if (m != 0.0) s += m * std::cos(static_cast<double>(z) * theta);
    }
    return mass(0) + 2.0 * s;
  }

  std::span<const double> alias_probabilities() const noexcept { return prob_; }
  std::span<const std::uint32_t> alias_indices() const noexcept { return alias_; }

 private:
  void build_alias() {
    const std::size_t n = mass_.size();
    double total = 0.0;
    for (double m : mass_) total += m;
    if (!(total > 0.0)) throw ConfigError("kernel has zero total mass");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = mass_[i] / total * static_cast<double>(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < n; ++i) {
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::uint32_t i : large) {
      prob_[i] = 1.0;
      alias_[i] = i;
    }
    for (std::uint32_t i : small) {  // round-off leftovers
      prob_[i] = 1.0;
      alias_[i] = i;
    }
  }

  Family family_;
  std::uint64_t N_;
  double mix_;
  double B_;
  bool exempt_;
  std::vector<double> mass_;
  std::int64_t radius_ = 0;
  double variance_ = 0.0;
  double fourth_ = 0.0;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

namespace detail {

// Unnormalized family shape at displacement z with scale s = sqrt(N).
inline double shape_weight(Family f, double z, double s) {
  switch (f) {
    case Family::uniform: return std::fabs(z) <= s ? 1.0 : 0.0;
    case Family::bilateral_exponential: return std::exp(-std::fabs(z) / s);
    case Family::discrete_normal: return std::exp(-z * z / (2.0 * s * s));
    case Family::nearest_neighbor: return std::fabs(z) == 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

// Variance of the normalized shape restricted to |z| <= r.
inline double shape_variance(Family f, std::int64_t r, double s) {
  double w = 0.0;
  double v = 0.0;
  for (std::int64_t z = r; z >= 1; --z) {
    const double x = static_cast<double>(z);
    const double q = shape_weight(f, x, s);
    w += 2.0 * q;
    v += 2.0 * q * x * x;
  }
  w += shape_weight(f, 0.0, s);
  return v / w;
}

}  // namespace detail

/// Builds mix * uniform[-sqrt N, sqrt N] + (1 - mix) * shape, truncated at
/// ceil(B sqrt(N) log N) and renormalized.
///
/// Throws ConfigError for N = 0, mix outside [0, 1], or when truncation moves
/// the shape's variance by more than 1% (B too small for this N).
inline Kernel build_kernel(Family family, std::uint64_t N, double mix = kDefaultMix,
                           double B = kDefaultB) {
  if (N == 0) throw ConfigError("kernel scale N must be >= 1");
  if (!(mix >= 0.0 && mix <= 1.0)) throw ConfigError("mix must lie in [0, 1]");
  if (!(B > 0.0)) throw ConfigError("truncation constant B must be > 0");

  if (family == Family::nearest_neighbor) {
    return Kernel(family, N, mix, B, {0.5, 0.0, 0.5}, /*exempt=*/true);
  }

  const double s = std::sqrt(static_cast<double>(N));
  const std::int64_t R = Kernel::truncation_radius_for(N, B);
  const std::int64_t sFloor = Kernel::floor_sqrt(N);

  if (family != Family::uniform) {
    // Compare against a support wide enough that the shape has underflowed.
    const double truncated = detail::shape_variance(family, R, s);
    const auto wide = static_cast<std::int64_t>(std::ceil(60.0 * s)) + R;
    const double full = detail::shape_variance(family, wide, s);
    if (std::fabs(truncated - full) > 0.01 * full) {
      throw ConfigError("truncation shifts the kernel variance by more than 1%; increase B");
    }
  }

  const std::size_t n = static_cast<std::size_t>(2 * R + 1);
  std::vector<double> shape(n, 0.0);
  double shapeTotal = 0.0;
  for (std::int64_t z = R; z >= 1; --z) {
    const double w = detail::shape_weight(family, static_cast<double>(z), s);
    shape[static_cast<std::size_t>(R + z)] = w;
    shape[static_cast<std::size_t>(R - z)] = w;
    shapeTotal += 2.0 * w;
  }
  shape[static_cast<std::size_t>(R)] = detail::shape_weight(family, 0.0, s);
  shapeTotal += shape[static_cast<std::size_t>(R)];

  const double floorMass = 1.0 / static_cast<double>(2 * sFloor + 1);
  std::vector<double> mass(n, 0.0);
  for (std::int64_t z = -R; z <= R; ++z) {
    const auto i = static_cast<std::size_t>(z + R);
    const double uniformPart = (z >= -sFloor && z <= sFloor) ? floorMass : 0.0;
    mass[i] = mix * uniformPart + (1.0 - mix) * (shape[i] / shapeTotal);
  }
  return Kernel(family, N, mix, B, std::move(mass), /*exempt=*/false);
}

// ---------------------------------------------------------------------------
// Audit

struct Check {
  std::string name;
  bool passed = true;
  bool skipped = false;
  std::string detail;
  std::optional<std::int64_t> witness;  // violating displacement, if any
};

struct Audit {
  bool exempt = false;
  std::vector<Check> checks;  // normalization, symmetry, variance, floor, tails, truncation
  double h = 0.0;             // floor constant
  double c = 0.0;             // fitted tail rate with C = 1
  double C = 1.0;
  double a = 0.0;             // |phi| <= 1 - a away from the origin
  double b = 0.0;             // |phi| <= 1 - b N theta^2 near the origin
  double maxPhiAway = 0.0;    // max |phi| over grid points with theta > 0.1/sqrt(N)
  std::optional<double> witnessTheta;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.skipped && !c.passed) return false;
    }
    return true;
  }
  const Check* first_failure() const {
    for (const auto& c : checks) {
      if (!c.skipped && !c.passed) return &c;
    }
    return nullptr;
  }
};

struct AuditOptions {
  double minFloor = 0.01;       // required h
  double minTailRate = 0.5;     // required c
  int thetaGrid = 10000;        // points in (0, pi]
};

/// Audits the kernel invariants and fits the characteristic-function bound
/// |phi(theta)| <= max(1 - b N theta^2, 1 - a) on a uniform theta grid.
inline Audit verify_assumptions(const Kernel& k, const AuditOptions& opt = {}) {
  Audit out;
  out.exempt = k.exempt();
  const double N = static_cast<double>(k.N());
  const double sqrtN = std::sqrt(N);
  const std::int64_t R = k.support_radius();

  Check norm;
  norm.name = "normalization";
  double total = 0.0;
  for (std::int64_t z = -R; z <= R; ++z) total += k.mass(z);
  norm.passed = std::fabs(total - 1.0) <= 1e-12;
  norm.detail = "total mass " + std::to_string(total);
  out.checks.push_back(norm);

  Check sym;
  sym.name = "symmetry";
  for (std::int64_t z = 1; z <= R; ++z) {
    if (std::fabs(k.mass(z) - k.mass(-z)) > 1e-15) {
      sym.passed = false;
      sym.witness = z;
      sym.detail = "q(z) != q(-z)";
      break;
    }
  }
  out.checks.push_back(sym);

  Check var;
  var.name = "variance";
  var.passed = k.variance() > 0.0 && std::isfinite(k.variance());
  var.detail = "sigma_N^2 = " + std::to_string(k.sigma_n2());
  out.checks.push_back(var);

  Check fl;
  fl.name = "floor";
  Check tails;
  tails.name = "exponential-tails";
  Check trunc;
  trunc.name = "truncation";
  if (k.exempt()) {
    fl.skipped = tails.skipped = trunc.skipped = true;
    fl.detail = tails.detail = trunc.detail = "exempt kernel";
  } else {
    const std::int64_t s = Kernel::floor_sqrt(k.N());
    out.h = k.floor_constant();
    for (std::int64_t z = -s; z <= s; ++z) {
      if (k.mass(z) * sqrtN < opt.minFloor) {
        fl.passed = false;
        fl.witness = z;
        fl.detail = "q(z) below h/sqrt(N)";
        break;
      }
    }
    if (fl.passed) fl.detail = "h = " + std::to_string(out.h);

    // Largest c with q(z) <= exp(-c |z| / sqrt N) for all z != 0.
    double c = std::numeric_limits<double>::infinity();
    std::optional<std::int64_t> cw;
    for (std::int64_t z = 1; z <= R; ++z) {
      const double m = k.mass(z);
      if (m <= 0.0) continue;
      const double rate = std::log(1.0 / m) * sqrtN / static_cast<double>(z);
      if (rate < c) {
        c = rate;
        cw = z;
      }
    }
    out.c = c;
    out.C = 1.0;
    tails.passed = k.mass(0) <= 1.0 && c >= opt.minTailRate;
    if (!tails.passed) tails.witness = cw;
    tails.detail = "c = " + std::to_string(c) + " with C = 1";

    trunc.passed = R <= k.truncation_radius();
    if (!trunc.passed) trunc.witness = R;
    trunc.detail = "support radius " + std::to_string(R) + ", limit " +
                   std::to_string(k.truncation_radius());
  }
  out.checks.push_back(fl);
  out.checks.push_back(tails);
  out.checks.push_back(trunc);

  // Characteristic-function fit.
  if (!k.exempt()) {
    const double L = std::floor(sqrtN);
    const double thetaStar = 4.0 / (2.0 * L + 1.0);
    double a = std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();
    const double away = 0.1 / sqrtN;
    for (int i = 1; i <= opt.thetaGrid; ++i) {
      const double theta = std::numbers::pi * i / opt.thetaGrid;
      const double phi = std::fabs(k.char_fn(theta));
      if (theta > away) out.maxPhiAway = std::max(out.maxPhiAway, phi);
      if (theta <= thetaStar) {
        const double bi = (1.0 - phi) / (N * theta * theta);
        if (bi < b) b = bi;
        if (bi <= 0.0 && !out.witnessTheta) out.witnessTheta = theta;
      } else {
        const double ai = 1.0 - phi;
        if (ai < a) a = ai;
        if (ai <= 0.0 && !out.witnessTheta) out.witnessTheta = theta;
      }
    }
    out.a = std::isfinite(a) ? a : 1.0;
    out.b = std::isfinite(b) ? b : 1.0;
  }
  return out;
}

/// 64-bit FNV-1a over family, N and the mass bytes. Identifies a kernel in run manifests.
inline std::uint64_t kernel_hash(const Kernel& k) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const auto fam = static_cast<int>(k.family());
  const std::uint64_t N = k.N();
  feed(&fam, sizeof fam);
  feed(&N, sizeof N);
  for (double m : k.masses()) feed(&m, sizeof m);
  return h;
}

}  // namespace stonewalk::dispersal
