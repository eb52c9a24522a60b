#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "obsgram/metrics.hpp"

using namespace obsgram;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v[i++] = x;
  return v.asDiagonal();
}

Eigen::MatrixXd random_spd(int m, unsigned seed) {
  std::srand(seed);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(m, m);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(m, m);
}

}  // namespace

TEST(Metrics, Identity) {
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_DOUBLE_EQ(unobservability_index(i), 1.0);
  EXPECT_DOUBLE_EQ(condition_number(i), 1.0);
  EXPECT_DOUBLE_EQ(det_root(i), 1.0);
}

TEST(Metrics, Diagonal) {
  const Eigen::MatrixXd w = diag({4, 1});
  EXPECT_DOUBLE_EQ(unobservability_index(w), 1.0);
  EXPECT_DOUBLE_EQ(condition_number(w), 4.0);
  EXPECT_NEAR(det_root(w), 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(combined_cost(w, 2.0), 6.0);
  const MetricReport r = evaluate_metrics(w, 2.0);
  EXPECT_EQ(r.m, 2);
  EXPECT_DOUBLE_EQ(r.combined, 6.0);
  EXPECT_DOUBLE_EQ(r.lambda_max, 4.0);
}

TEST(Metrics, Singular) {
  const Eigen::MatrixXd w = diag({4, 0});
  EXPECT_TRUE(is_singular(w));
  EXPECT_TRUE(std::isinf(unobservability_index(w)));
  EXPECT_TRUE(std::isinf(condition_number(w)));
  EXPECT_EQ(det_root(w), 0.0);
  EXPECT_TRUE(std::isinf(combined_cost(w, 0.0)));
  EXPECT_TRUE(is_singular(diag({1, 1e-11})));
  EXPECT_FALSE(is_singular(diag({1, 1e-9})));
}

TEST(Metrics, ScaleLaws) {
  for (unsigned s = 1; s <= 5; ++s) {
    const Eigen::MatrixXd w = random_spd(4, s);
    const double a = 3.7;
    EXPECT_NEAR(condition_number(a * w) / condition_number(w), 1.0, 1e-10);
    EXPECT_NEAR(unobservability_index(a * w) * a / unobservability_index(w), 1.0, 1e-10);
    EXPECT_NEAR(det_root(a * w) / (a * det_root(w)), 1.0, 1e-10);
    const Eigen::VectorXd ev = symmetric_eigenvalues(w);
    EXPECT_NEAR(det_root(w), std::pow(w.determinant(), 0.25), 1e-9 * det_root(w));
    EXPECT_NEAR(unobservability_index(w), 1.0 / ev[0], 1e-9 / ev[0]);
  }
}

TEST(Metrics, InverseDetRootMetric) {
  EXPECT_NEAR(Metric::inverse_det_root()(diag({4, 1})), 0.5, 1e-14);
  EXPECT_TRUE(std::isinf(Metric::inverse_det_root()(diag({4, 0}))));
  EXPECT_DOUBLE_EQ(Metric::nu()(diag({4, 2})), 0.5);
  EXPECT_DOUBLE_EQ(Metric::kappa()(diag({4, 2})), 2.0);
}

TEST(MonteCarlo, Mean) {
  const std::vector<Eigen::MatrixXd> ws = {diag({1}), diag({0.5}), diag({1.0 / 3.0})};
  const MonteCarloCost c = monte_carlo_cost(ws, Metric::nu());
  EXPECT_NEAR(c.mean, 2.0, 1e-14);
  EXPECT_EQ(c.samples.size(), 3u);
  EXPECT_FALSE(c.infinite());
}

TEST(MonteCarlo, InfiniteSampleDominates) {
  const MonteCarloCost c = monte_carlo_cost(std::vector<double>{1.0, kInf, 3.0});
  EXPECT_TRUE(c.infinite());
  EXPECT_TRUE(std::isinf(c.mean));
  EXPECT_EQ(c.samples[2], 3.0);
}

TEST(Statistics, Basics) {
  const std::vector<double> v = {3, 1, 2, 10};
  EXPECT_DOUBLE_EQ(mean(v), 4.0);
  EXPECT_DOUBLE_EQ(median(v), 2.5);
  EXPECT_DOUBLE_EQ(variance(std::vector<double>{1, 2, 3}), 1.0);
  EXPECT_EQ(variance(std::vector<double>{5}), 0.0);
}

TEST(Statistics, Correlations) {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> b = {2, 4, 6, 8, 10};
  const std::vector<double> c = {1, 4, 9, 16, 25};
  const std::vector<double> d = {5, 4, 3, 2, 1};
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-14);
  EXPECT_LT(pearson(a, c), 1.0);
  EXPECT_NEAR(spearman(a, c), 1.0, 1e-14);
  EXPECT_NEAR(spearman(a, d), -1.0, 1e-14);
  const std::vector<double> with_inf = {1, 2, 3, 4, kInf};
  EXPECT_NEAR(spearman(a, with_inf), 1.0, 1e-14);
  const std::vector<double> ties = {1, 1, 2, 2, 3};
  EXPECT_GT(spearman(a, ties), 0.9);
}
