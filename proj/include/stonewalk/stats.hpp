// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Empirical CDFs with right-censoring, Kolmogorov–Smirnov distance and
// Laplace-transform estimates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stonewalk/error.hpp"
#include "stonewalk/genealogy.hpp"

namespace stonewalk::stats {

/// Sorted uncensored values plus a count of right-censored observations.
/// evaluate(t) is the fraction of all n observations known to be <= t, which
/// is exact for t below validUpTo (the smallest censoring time).
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution from_values(std::vector<double> values) {
    if (values.empty()) throw DomainError("empirical distribution needs at least one sample");
    EmpiricalDistribution d;
    std::sort(values.begin(), values.end());
    d.values_ = std::move(values);
    d.n_ = d.values_.size();
    return d;
  }

  /// Coalesced samples contribute scaledTime; censored ones only their count.
  static EmpiricalDistribution from_samples(std::span<const genealogy::CoalescenceSample> s) {
    if (s.empty()) throw DomainError("empirical distribution needs at least one sample");
    EmpiricalDistribution d;
    d.n_ = s.size();
    for (const auto& x : s) {
      if (x.coalesced) {
        d.values_.push_back(x.scaledTime);
      } else {
        ++d.censored_;
        d.validUpTo_ = std::min(d.validUpTo_, x.scaledTime);
      }
    }
    std::sort(d.values_.begin(), d.values_.end());
    return d;
  }

  std::span<const double> values() const { return values_; }
  std::uint64_t size() const { return n_; }
  std::uint64_t censored() const { return censored_; }
  double valid_up_to() const { return validUpTo_; }
  bool has_censoring() const { return censored_ > 0; }

  double evaluate(double t) const {
    if (t >= validUpTo_) throw DomainError("ecdf evaluated at or beyond the censoring horizon");
    const auto k = std::upper_bound(values_.begin(), values_.end(), t) - values_.begin();
    return static_cast<double>(k) / static_cast<double>(n_);
  }

 private:
  std::vector<double> values_;
  std::uint64_t n_ = 0;
  std::uint64_t censored_ = 0;
  double validUpTo_ = std::numeric_limits<double>::infinity();
};

inline EmpiricalDistribution ecdf(std::vector<double> values) {
  return EmpiricalDistribution::from_values(std::move(values));
}
inline EmpiricalDistribution ecdf(std::span<const genealogy::CoalescenceSample> s) {
  return EmpiricalDistribution::from_samples(s);
}

/// sup_t |F_n(t) - F(t)| over t <= min(tMax, censoring horizon), both step sides.
template <class Cdf>
double ks_distance(const EmpiricalDistribution& d, Cdf&& cdf,
                   double tMax = std::numeric_limits<double>::infinity()) {
  const double lim = std::min(tMax, d.valid_up_to());
  const auto v = d.values();
  const double n = static_cast<double>(d.size());
  double D = 0.0;
  std::size_t i = 0;
  while (i < v.size() && v[i] <= lim) {
    const double x = v[i];
    std::size_t j = i;
    while (j < v.size() && v[j] == x) ++j;
    // Left limits against left limits, so step-function references compare exactly.
    const double F = cdf(x);
    const double Fleft = cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    D = std::max({D, std::fabs(static_cast<double>(i) / n - Fleft),
                  std::fabs(static_cast<double>(j) / n - F)});
    i = j;
  }
  if (std::isfinite(lim)) {
    const double atLim = (lim == d.valid_up_to()) ? std::nextafter(lim, 0.0) : lim;
    D = std::max(D, std::fabs(static_cast<double>(i) / n - cdf(atLim)));
  }
  return D;
}

struct LaplaceEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};

/// Mean of exp(-lambda x) and its standard error sd / sqrt(n).
inline LaplaceEstimate laplace_estimate(std::span<const double> xs, double lambda) {
  if (xs.empty()) throw DomainError("laplace estimate needs samples");
  LaplaceEstimate out;
  out.n = xs.size();
  if (lambda == 0.0) {
    out.mean = 1.0;
    return out;
  }
  double s = 0.0;
  double s2 = 0.0;
  for (double x : xs) {
    const double e = std::exp(-lambda * x);
    s += e;
    s2 += e * e;
  }
  const double n = static_cast<double>(xs.size());
  out.mean = s / n;
  if (xs.size() > 1) {
    const double var = std::max(0.0, (s2 - n * out.mean * out.mean) / (n - 1.0));
    out.se = std::sqrt(var / n);
  }
  return out;
}

/// Laplace estimate of scaledTime; throws if any sample is censored.
inline LaplaceEstimate laplace_estimate(std::span<const genealogy::CoalescenceSample> s,
                                        double lambda) {
  std::vector<double> xs;
  xs.reserve(s.size());
  for (const auto& x : s) {
    if (!x.coalesced) throw DomainError("laplace estimate rejects censored samples");
    xs.push_back(x.scaledTime);
  }
  return laplace_estimate(xs, lambda);
}

/// One comparison outcome, serialized as {"metric","value","n","tolerance","pass"}.
struct Report {
  std::string metric;
  double value = 0.0;
  std::uint64_t n = 0;
  double tolerance = 0.0;
  bool pass = false;
};

}  // namespace stonewalk::stats
