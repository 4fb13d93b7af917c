#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riss/statistics.hpp"

using namespace riss;

namespace {

// Textbook sum-of-products forms.
double brute_r(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

double brute_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d;
    ss += d * d;
  }
  const double var = (ss - s * s / n) / (n - 1);
  return (s / n) / std::sqrt(var / n);
}

}  // namespace

TEST(Stats, MeanAndStd) {
  const std::vector<double> x{0.4, 0.6};
  EXPECT_NEAR(stats::mean(x), 0.5, 1e-15);
  EXPECT_NEAR(stats::stddev(x), 0.1, 1e-15);
  EXPECT_NEAR(stats::stddev(x, stats::StdKind::Sample), std::sqrt(0.02), 1e-15);
  const std::vector<double> same(7, 0.3);
  EXPECT_EQ(stats::mean(same), 0.3);
  EXPECT_EQ(stats::stddev(same), 0.0);
  EXPECT_THROW(stats::mean(std::vector<double>{}), DomainError);
  EXPECT_THROW(stats::stddev(std::vector<double>{1.0}, stats::StdKind::Sample), DomainError);
}

TEST(Stats, PearsonFixture) {
  const auto c = stats::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2});
  EXPECT_NEAR(c.r, 0.5, 1e-12);
  EXPECT_EQ(c.n, 3u);
  EXPECT_NEAR(c.p_value, oracle::t_two_sided(0.5 * std::sqrt(1.0 / 0.75), 1.0), 1e-9);
}

TEST(Stats, PearsonPerfectAndErrors) {
  const auto c = stats::pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 4, 6, 8});
  EXPECT_NEAR(c.r, 1.0, 1e-12);
  EXPECT_NEAR(c.p_value, 0.0, 1e-12);
  EXPECT_THROW(stats::pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(stats::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(stats::pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
}

TEST(Stats, PairedTFixture) {
  const auto t = stats::paired_t_test(std::vector<double>{2, 4, 6}, std::vector<double>{1, 2, 3});
  EXPECT_NEAR(t.t, 3.4641, 1e-4);
  EXPECT_NEAR(t.t, 2.0 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(t.p_value, oracle::t_two_sided(2.0 * std::sqrt(3.0), 2.0), 1e-9);
  EXPECT_THROW(stats::paired_t_test(std::vector<double>{1}, std::vector<double>{0}), Error);
  EXPECT_THROW(stats::paired_t_test(std::vector<double>{1, 2}, std::vector<double>{0}), Error);
}

TEST(Stats, TabulatedCriticalValues) {
  // Two-sided 5% critical values.
  EXPECT_NEAR(stats::two_sided_p(12.706204736174705, 1), 0.05, 1e-9);
  EXPECT_NEAR(stats::two_sided_p(2.570581835636314, 5), 0.05, 1e-9);
  EXPECT_NEAR(stats::two_sided_p(2.2281388519862744, 10), 0.05, 1e-9);
  EXPECT_NEAR(stats::two_sided_p(2.8453397097860739, 20), 0.01, 1e-9);
  EXPECT_NEAR(stats::two_sided_p(0.0, 7), 1.0, 1e-12);
}

TEST(Stats, OracleAgreesWithTable) {
  EXPECT_NEAR(oracle::t_two_sided(2.2281388519862744, 10), 0.05, 1e-9);
  EXPECT_NEAR(oracle::t_two_sided(12.706204736174705, 1), 0.05, 1e-9);
}

TEST(Stats, RandomAgainstBruteForce) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + rng() % 60;
    std::vector<double> x(n), y(n);
    const double rho = g(rng) * 0.5;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = rho * x[i] + g(rng);
    }
    const auto c = stats::pearson(x, y);
    const double r = brute_r(x, y);
    EXPECT_NEAR(c.r, r, 1e-9);
    EXPECT_NEAR(c.p_value, oracle::t_two_sided(r * std::sqrt((n - 2) / (1 - r * r)), double(n - 2)), 1e-9);

    const auto t = stats::paired_t_test(x, y);
    const double bt = brute_t(x, y);
    EXPECT_NEAR(t.t, bt, 1e-9 * std::max(1.0, std::fabs(bt)));
    EXPECT_NEAR(t.p_value, oracle::t_two_sided(bt, double(n - 1)), 1e-9);
  }
}
