// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic potential theory for a dispersal kernel: k-step laws, local
// CLT audit, the recurrent potential kernel a(x) = sum_k (p_k(x) - p_k(0)),
// and Green's functions of the walk killed on leaving [-M, M].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "stonewalk/dispersal.hpp"
#include "stonewalk/error.hpp"
#include "stonewalk/special.hpp"

namespace stonewalk::walk {

using dispersal::Kernel;

/// Law of the walk after k steps, stored densely on [offset, offset + size).
struct StepDistribution {
  std::uint64_t k = 0;
  std::int64_t offset = 0;
  std::vector<double> mass;
  double truncated = 0.0;  // total mass dropped by the 1e-16 trimming rule

  double at(std::int64_t x) const {
    const std::int64_t i = x - offset;
    if (i < 0 || i >= static_cast<std::int64_t>(mass.size())) return 0.0;
    return mass[static_cast<std::size_t>(i)];
  }
  std::int64_t min_x() const { return offset; }
  std::int64_t max_x() const { return offset + static_cast<std::int64_t>(mass.size()) - 1; }
  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }

  static StepDistribution delta() { return {0, 0, {1.0}, 0.0}; }

  static StepDistribution from_kernel(const Kernel& q) {
    StepDistribution d;
    d.k = 1;
    d.offset = -q.support_radius();
    d.mass.assign(q.masses().begin(), q.masses().end());
    return d;
  }
};

inline constexpr double kTrimThreshold = 1e-16;

/// a * b with the trimming rule: entries below 1e-16 are removed pairwise from
/// both ends while both end entries are below the threshold.
inline StepDistribution convolve(const StepDistribution& a, const StepDistribution& b) {
  if (a.mass.size() == 1 && a.mass[0] == 1.0 && a.offset == 0) {
    StepDistribution out = b;
    out.k = a.k + b.k;
    out.truncated = a.truncated + b.truncated;
    return out;
  }
  if (b.mass.size() == 1 && b.mass[0] == 1.0 && b.offset == 0) return convolve(b, a);

  const std::size_t na = a.mass.size();
  const std::size_t nb = b.mass.size();
  StepDistribution out;
  out.k = a.k + b.k;
  out.offset = a.offset + b.offset;
  out.mass.assign(na + nb - 1, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    const double ai = a.mass[i];
    if (ai == 0.0) continue;
    double* dst = out.mass.data() + i;
    const double* src = b.mass.data();
    for (std::size_t j = 0; j < nb; ++j) dst[j] += ai * src[j];
  }
  out.truncated = a.truncated + b.truncated;
  std::size_t lo = 0;
  std::size_t hi = out.mass.size();
  while (hi - lo > 1 && out.mass[lo] < kTrimThreshold && out.mass[hi - 1] < kTrimThreshold) {
    out.truncated += out.mass[lo] + out.mass[hi - 1];
    ++lo;
    --hi;
  }
  if (lo > 0) {
    out.mass.erase(out.mass.begin() + static_cast<std::ptrdiff_t>(hi), out.mass.end());
    out.mass.erase(out.mass.begin(), out.mass.begin() + static_cast<std::ptrdiff_t>(lo));
    out.offset += static_cast<std::int64_t>(lo);
  }
  return out;
}

/// Memory guard for step_distribution: k * support radius may not exceed this.
inline constexpr std::uint64_t kDefaultStepCap = 50'000'000;

/// p_k by binary powering (repeated doubling p_{2j} = p_j * p_j).
inline StepDistribution step_distribution(const Kernel& q, std::uint64_t k,
                                          std::uint64_t cap = kDefaultStepCap) {
  if (k > 0 && k * static_cast<std::uint64_t>(q.support_radius()) > cap) {
    throw NumericalError("step_distribution: k * support radius exceeds the configured cap");
  }
  StepDistribution result = StepDistribution::delta();
  StepDistribution base = StepDistribution::from_kernel(q);
  while (k > 0) {
    if (k & 1U) result = convolve(result, base);
    k >>= 1U;
    if (k > 0) base = convolve(base, base);
  }
  return result;
}

/// Normal density with variance ell * sigma2 at x.
inline double rho(double sigma2, double ell, double x) {
  if (!(ell > 0.0)) throw DomainError("rho requires ell > 0");
  const double v = sigma2 * ell;
  return std::exp(-x * x / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

/// rho_{ell}(x) with the kernel's sigma_N^2.
inline double rho(const Kernel& q, double ell, double x) { return rho(q.sigma_n2(), ell, x); }

struct LcltAudit {
  std::vector<std::uint64_t> k;
  std::vector<double> normalized;  // sqrt(N) k^{3/2} sup_x |p_k(x) - rho_{kN}(x)|
  double cStar = 0.0;              // max of normalized
  double truncated = 0.0;          // truncation budget of the largest k
};

/// Normalized local-CLT errors for each k in kSet (evaluated by sequential convolution).
inline LcltAudit lclt_error_audit(const Kernel& q, std::vector<std::uint64_t> kSet) {
  if (q.exempt()) throw ConfigError("local CLT audit needs a non-exempt (aperiodic) kernel");
  std::sort(kSet.begin(), kSet.end());
  kSet.erase(std::unique(kSet.begin(), kSet.end()), kSet.end());
  LcltAudit out;
  const double N = static_cast<double>(q.N());
  const StepDistribution step = StepDistribution::from_kernel(q);
  StepDistribution p = StepDistribution::delta();
  for (std::uint64_t k : kSet) {
    if (k == 0) throw DomainError("local CLT audit requires k >= 1");
    while (p.k < k) p = convolve(p, step);
    double sup = 0.0;
    const double ell = static_cast<double>(k) * N;
    for (std::int64_t x = p.min_x(); x <= p.max_x(); ++x) {
      sup = std::max(sup, std::fabs(p.at(x) - rho(q, ell, static_cast<double>(x))));
    }
    const double kd = static_cast<double>(k);
    out.k.push_back(k);
    out.normalized.push_back(std::sqrt(N) * kd * std::sqrt(kd) * sup);
    out.cStar = std::max(out.cStar, out.normalized.back());
    out.truncated = p.truncated;
  }
  return out;
}

inline std::vector<std::uint64_t> k_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

// ---------------------------------------------------------------------------
// Potential kernel

struct PotentialKernelTable {
  std::int64_t xMax = 0;
  std::vector<double> values;  // a(x) for x = 0..xMax; a(-x) = a(x)
  std::uint64_t seriesDepth = 0;
  double tailBound = 0.0;      // certified bound on |a_table(x) - a(x)|
  double cStar = 0.0;

  double operator()(std::int64_t x) const {
    const std::int64_t ax = x < 0 ? -x : x;
    if (ax > xMax) throw DomainError("potential kernel queried beyond its table");
    return values[static_cast<std::size_t>(ax)];
  }

  void write_csv(std::ostream& os) const {
    os << "x,value,certified_bound\n";
    char buf[96];
    for (std::int64_t x = -xMax; x <= xMax; ++x) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(x), (*this)(x),
                    tailBound);
      os << buf;
    }
  }
};

struct PotentialOptions {
  std::optional<double> cStar;       // local-CLT constant; audited over k = 1..64 when absent
  std::uint64_t maxDepth = 200'000;  // series cap
  double maxXOverVariance = 64.0;    // xMax <= this * sigma^2 N
};

namespace detail {

// sum_{k >= a} A k^{-1/2} (exp(-c/k) - 1) by Euler–Maclaurin with two correction terms.
inline double gaussian_tail_sum(double A, double c, double a) {
  if (c == 0.0) return 0.0;
  const double b = c / a;
  const double sb = std::sqrt(b);
  const double integral =
      A * std::sqrt(c) *
      (2.0 * (-std::expm1(-b)) / sb - 2.0 * std::sqrt(std::numbers::pi) * special::erf(sb));
  const double ea = std::exp(-c / a);
  const double fa = A * (ea - 1.0) / std::sqrt(a);
  const double dfa = A * (-0.5 * (ea - 1.0) / (a * std::sqrt(a)) + ea * c / (a * a * std::sqrt(a)));
  return integral + 0.5 * fa - dfa / 12.0;
}

}  // namespace detail

/// a(x) = sum_{k=0}^{K} (p_k(x) - p_k(0)) plus the Gaussian remainder
/// sum_{k>K} (rho_{kN}(x) - rho_{kN}(0)). The local-CLT envelope bounds the
/// error of the remainder by 4 C* / sqrt(N K); K is the smallest depth that
/// brings this below epsilon, capped at maxDepth.
inline PotentialKernelTable potential_kernel(const Kernel& q, std::int64_t xMax, double epsilon,
                                             const PotentialOptions& opt = {}) {
  if (q.exempt()) throw ConfigError("potential kernel expansion needs a non-exempt kernel");
  if (xMax < 0) throw DomainError("xMax must be >= 0");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  const double N = static_cast<double>(q.N());
  if (static_cast<double>(xMax) > opt.maxXOverVariance * q.variance()) {
    throw DomainError("xMax exceeds the configured multiple of sigma^2 N");
  }
  PotentialKernelTable out;
  out.xMax = xMax;
  out.cStar = opt.cStar ? *opt.cStar : lclt_error_audit(q, k_range(1, 64)).cStar;

  // The envelope alone fixes a first guess; the loop then runs until the
  // envelope plus twice the trimmed mass is strictly below epsilon.
  const auto bound_at = [&](std::uint64_t k, double trunc) {
    return 4.0 * out.cStar / std::sqrt(N * static_cast<double>(k)) + 2.0 * trunc;
  };

  std::vector<double> acc(static_cast<std::size_t>(xMax) + 1, 0.0);
  // k = 0: delta(x) - 1.
  for (std::int64_t x = 1; x <= xMax; ++x) acc[static_cast<std::size_t>(x)] = -1.0;
  const StepDistribution step = StepDistribution::from_kernel(q);
  StepDistribution p = StepDistribution::delta();
  double truncatedSum = 0.0;
  std::uint64_t K = 0;
  while (K < std::max<std::uint64_t>(1, opt.maxDepth)) {
    p = convolve(p, step);
    ++K;
    const double p0 = p.at(0);
    for (std::int64_t x = 1; x <= xMax; ++x) acc[static_cast<std::size_t>(x)] += p.at(x) - p0;
    truncatedSum = p.truncated;
    if (bound_at(K, truncatedSum) < epsilon) break;
  }
  out.seriesDepth = K;
  const double A = 1.0 / std::sqrt(2.0 * std::numbers::pi * q.variance());
  for (std::int64_t x = 1; x <= xMax; ++x) {
    const double xd = static_cast<double>(x);
    const double c = xd * xd / (2.0 * q.variance());
    acc[static_cast<std::size_t>(x)] += detail::gaussian_tail_sum(A, c, static_cast<double>(K + 1));
  }
  out.values = std::move(acc);
  out.tailBound = bound_at(K, truncatedSum);
  return out;
}

// ---------------------------------------------------------------------------
// Killed walk on an interval

struct IntervalProblem {
  const Kernel* kernel = nullptr;
  std::int64_t Mhalf = 1;  // I = [-Mhalf, Mhalf]; exit when |X| > Mhalf

  static std::int64_t default_half_width(std::uint64_t N) {
    return static_cast<std::int64_t>(std::ceil(2.0 * std::pow(static_cast<double>(N), 5.0 / 6.0)));
  }
  static IntervalProblem standard(const Kernel& q) { return {&q, default_half_width(q.N())}; }

  std::int64_t size() const { return 2 * Mhalf + 1; }
  bool contains(std::int64_t x) const { return x >= -Mhalf && x <= Mhalf; }
};

/// Banded LU factorization of Id - P_I (no pivoting; the matrix is diagonally dominant).
class GreenSolver {
 public:
  explicit GreenSolver(const IntervalProblem& prob) : prob_(prob) {
    if (prob.kernel == nullptr) throw ConfigError("interval problem has no kernel");
    if (prob.Mhalf < 1) throw ConfigError("Mhalf must be >= 1");
    if (prob.size() > 200'001) throw ConfigError("interval too large for the banded solve");
    const Kernel& q = *prob.kernel;
    n_ = static_cast<std::size_t>(prob.size());
    w_ = static_cast<std::size_t>(std::min<std::int64_t>(q.support_radius(), prob.size() - 1));
    width_ = 2 * w_ + 1;
    band_.assign(n_ * width_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i >= w_ ? i - w_ : 0;
      const std::size_t jhi = std::min(n_ - 1, i + w_);
      for (std::size_t j = jlo; j <= jhi; ++j) {
        const auto z = static_cast<std::int64_t>(j) - static_cast<std::int64_t>(i);
        ref(i, j) = (i == j ? 1.0 : 0.0) - q.mass(z);
      }
    }
    original_ = band_;
    // In-place LU: L unit lower (stored below diagonal), U upper.
    for (std::size_t k = 0; k < n_; ++k) {
      const double piv = ref(k, k);
      if (piv == 0.0) throw NumericalError("zero pivot in Green's function solve");
      const std::size_t iend = std::min(n_ - 1, k + w_);
      for (std::size_t i = k + 1; i <= iend; ++i) {
        double& lik = ref(i, k);
        if (lik == 0.0) continue;
        lik /= piv;
        const std::size_t jend = std::min(n_ - 1, k + w_);
        for (std::size_t j = k + 1; j <= jend; ++j) ref(i, j) -= lik * ref(k, j);
      }
    }
  }

  const IntervalProblem& problem() const { return prob_; }

  /// g(x) = G_I(x, y) for all x in I (index x + Mhalf).
  std::vector<double> column(std::int64_t y) {
    if (!prob_.contains(y)) throw DomainError("y outside the interval");
    std::vector<double> b(n_, 0.0);
    b[static_cast<std::size_t>(y + prob_.Mhalf)] = 1.0;
    std::vector<double> x = b;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i >= w_ ? i - w_ : 0;
      double s = x[i];
      for (std::size_t j = jlo; j < i; ++j) s -= ref(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t jhi = std::min(n_ - 1, i + w_);
      double s = x[i];
      for (std::size_t j = i + 1; j <= jhi; ++j) s -= ref(i, j) * x[j];
      x[i] = s / ref(i, i);
    }
    // Residual against the unfactored matrix.
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i >= w_ ? i - w_ : 0;
      const std::size_t jhi = std::min(n_ - 1, i + w_);
      double s = 0.0;
      for (std::size_t j = jlo; j <= jhi; ++j) s += orig(i, j) * x[j];
      residual_ = std::max(residual_, std::fabs(s - b[i]));
    }
    return x;
  }

  double residual() const { return residual_; }

 private:
  double& ref(std::size_t i, std::size_t j) { return band_[i * width_ + (j + w_ - i)]; }
  double orig(std::size_t i, std::size_t j) const { return original_[i * width_ + (j + w_ - i)]; }

  IntervalProblem prob_;
  std::size_t n_ = 0;
  std::size_t w_ = 0;
  std::size_t width_ = 0;
  std::vector<double> band_;
  std::vector<double> original_;
  double residual_ = 0.0;
};

/// Expected visits to y from x before leaving I.
inline double green_exact(const IntervalProblem& prob, std::int64_t x, std::int64_t y) {
  if (!prob.contains(x)) throw DomainError("x outside the interval");
  GreenSolver s(prob);
  return s.column(y)[static_cast<std::size_t>(x + prob.Mhalf)];
}

/// delta(x,y) + (M / sigma^2 N) [-|x-y|/M + (1 - x y / M^2)].
inline double green_asymptotic(const IntervalProblem& prob, std::int64_t x, std::int64_t y) {
  const double M = static_cast<double>(prob.Mhalf);
  const double xd = static_cast<double>(x);
  const double yd = static_cast<double>(y);
  const double s2N = prob.kernel->variance();
  const double bracket = -std::fabs(xd - yd) / M + (1.0 - xd * yd / (M * M));
  return (x == y ? 1.0 : 0.0) + M / s2N * bracket;
}

/// P_x(hit 0 before leaving I) = G(x,0) / G(0,0).
inline double hitting_prob(const IntervalProblem& prob, std::int64_t x) {
  GreenSolver s(prob);
  const std::vector<double> g = s.column(0);
  return g[static_cast<std::size_t>(x + prob.Mhalf)] / g[static_cast<std::size_t>(prob.Mhalf)];
}

inline double hitting_prob_asymptotic(std::uint64_t N, double sigma) {
  return 1.0 / (sigma * sigma * std::pow(static_cast<double>(N), 1.0 / 6.0));
}

/// N^{-1/3} log N, the error scale shared by the Green's function comparisons.
inline double green_error_scale(std::uint64_t N) {
  const double n = static_cast<double>(N);
  return std::pow(n, -1.0 / 3.0) * std::log(n);
}

struct GreenComparison {
  double maxError = 0.0;
  double scale = 0.0;  // N^{-1/3} log N
  double c = 0.0;      // maxError / scale
  std::int64_t worstX = 0;
  std::int64_t worstY = 0;
  double residual = 0.0;
};

/// max |green_exact - green_asymptotic| over probe pairs (x, y).
inline GreenComparison green_comparison(const IntervalProblem& prob,
                                        const std::vector<std::pair<std::int64_t, std::int64_t>>& probes) {
  GreenComparison out;
  out.scale = green_error_scale(prob.kernel->N());
  GreenSolver s(prob);
  std::vector<std::int64_t> ys;
  for (const auto& pr : probes) ys.push_back(pr.second);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  for (std::int64_t y : ys) {
    const std::vector<double> g = s.column(y);
    for (const auto& [x, yy] : probes) {
      if (yy != y) continue;
      const double err =
          std::fabs(g[static_cast<std::size_t>(x + prob.Mhalf)] - green_asymptotic(prob, x, y));
      if (err > out.maxError) {
        out.maxError = err;
        out.worstX = x;
        out.worstY = y;
      }
    }
  }
  out.c = out.maxError / out.scale;
  out.residual = s.residual();
  return out;
}

struct BoundCheck {
  bool passed = true;
  std::optional<std::int64_t> violatingX;
  double maxRatio = 0.0;  // max H / bound
};

/// H_I(x,0) <= 2/(sigma^2 N^{1/6}) + c N^{-1/3} log N for every probe.
inline BoundCheck hitting_prob_bound_check(const IntervalProblem& prob,
                                           const std::vector<std::int64_t>& xs, double c) {
  const Kernel& q = *prob.kernel;
  const double bound = 2.0 * hitting_prob_asymptotic(q.N(), q.sigma_n()) +
                       c * green_error_scale(q.N());
  GreenSolver s(prob);
  const std::vector<double> g = s.column(0);
  const double g00 = g[static_cast<std::size_t>(prob.Mhalf)];
  BoundCheck out;
  for (std::int64_t x : xs) {
    if (x == 0 || !prob.contains(x)) throw DomainError("probe must satisfy 0 < |x| <= Mhalf");
    const double h = g[static_cast<std::size_t>(x + prob.Mhalf)] / g00;
    out.maxRatio = std::max(out.maxRatio, h / bound);
    if (h > bound && out.passed) {
      out.passed = false;
      out.violatingX = x;
    }
  }
  return out;
}

}  // namespace stonewalk::walk
