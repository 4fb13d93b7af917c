#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "riss/error.hpp"

namespace riss::stats {

/// Mean computed as an offset from the first element, so a sample of
/// identical values yields that value exactly.
inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  const double origin = x[0];
  double acc = 0.0;
  for (double v : x) acc += v - origin;
  return origin + acc / static_cast<double>(x.size());
}

enum class StdKind { Population, Sample };

inline double stddev(std::span<const double> x, StdKind kind = StdKind::Population) {
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  if (kind == StdKind::Population) return std::sqrt(ss / static_cast<double>(x.size()));
  if (x.size() < 2) throw DomainError("sample standard deviation needs at least two values");
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Two-sided p-value of a t statistic with the given degrees of freedom.
inline double two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Sample Pearson correlation; the p-value uses t = r sqrt(n−2) / sqrt(1−r²).
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
  if (x.size() < 3) throw DomainError("pearson: need at least 3 observations");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: zero variance");
  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(c.n - 2);
  const double denom = 1.0 - c.r * c.r;
  c.p_value = denom <= 0.0 ? 0.0 : two_sided_p(c.r * std::sqrt(dof / denom), dof);
  return c;
}

struct TTest {
  double t = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Paired t-test over d = a − b with n − 1 degrees of freedom.
inline TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("paired_t_test: length mismatch");
  if (a.size() < 2) throw DomainError("paired_t_test: need at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = stddev(d, StdKind::Sample);
  if (sd == 0.0) throw DomainError("paired_t_test: differences have zero variance");
  TTest out;
  out.n = d.size();
  out.t = mean(d) / (sd / std::sqrt(static_cast<double>(out.n)));
  out.p_value = two_sided_p(out.t, static_cast<double>(out.n - 1));
  return out;
}

}  // namespace riss::stats
