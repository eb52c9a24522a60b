#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "obsgram/errors.hpp"
#include "obsgram/gramian.hpp"
#include "obsgram/matrix_io.hpp"
#include "obsgram/metrics.hpp"
#include "obsgram/uav.hpp"

using namespace obsgram;

namespace {

DynamicalSystem decay_system() {
  DynamicalSystem s;
  s.n_states = 1;
  s.n_outputs = 1;
  s.drift = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
    return Eigen::VectorXd(-x);
  };
  s.noise_map = Eigen::MatrixXd::Ones(1, 1);
  s.output_map = [](std::span<const Eigen::VectorXd> w, double) { return w.back(); };
  return s;
}

PerturbationPlan decay_plan(double eps) {
  PerturbationPlan p;
  p.epsilon = eps;
  p.t1 = 1.0;
  p.dt = 1e-3;
  p.x0 = Eigen::VectorXd::Ones(1);
  p.input = InputSignal::zero(0);
  return p;
}

PerturbationPlan uav_plan() {
  PerturbationPlan p;
  p.epsilon = 1e-3;
  p.t1 = 20.0;
  p.dt = 0.01;
  p.x0 = uav_default_initial_state();
  p.input = InputSignal::zero(1);
  return p;
}

}  // namespace

TEST(Gramian, ScalarDecay) {
  // Integral of exp(-2t) over [0, 1].
  const double expected = (1.0 - std::exp(-2.0)) / 2.0;
  for (double eps : {1e-3, 1e-1}) {
    const GramianSample g = empirical_gramian(decay_system(), decay_plan(eps));
    ASSERT_EQ(g.dimension(), 1);
    EXPECT_NEAR(g.w(0, 0), expected, 1e-6);
    EXPECT_FALSE(g.stochastic);
    EXPECT_EQ(g.integrator, "rk4");
  }
}

TEST(Gramian, ConstantOutputIsZero) {
  DynamicalSystem s = decay_system();
  s.output_map = [](std::span<const Eigen::VectorXd>, double) {
    return Eigen::VectorXd::Zero(1).eval();
  };
  const GramianSample g = empirical_gramian(s, decay_plan(1e-2));
  EXPECT_EQ(g.w(0, 0), 0.0);
  EXPECT_TRUE(std::isinf(unobservability_index(g.w)));
}

TEST(Gramian, UavWindUnobservable) {
  const GramianSample g = empirical_gramian(uav_system({}), uav_plan());
  ASSERT_EQ(g.dimension(), 5);
  EXPECT_TRUE(g.w.isApprox(g.w.transpose(), 0.0));
  EXPECT_LT(numerical_rank(g.w, 1e-9), 5);
  EXPECT_TRUE(is_singular(g.w));
}

TEST(Gramian, ZeroNoiseMatchesDeterministic) {
  const DynamicalSystem s = uav_system({});
  const GramianSample a = empirical_gramian(s, uav_plan());
  const GramianSample b =
      stochastic_gramian_sample(s, uav_plan(), Eigen::Vector2d::Zero(), 9, 3);
  EXPECT_EQ(a.w, b.w);
}

TEST(Gramian, StochasticSamplesDifferAndArePsd) {
  const DynamicalSystem s = uav_system({});
  const Eigen::Vector2d q(0.1, 0.1);
  const GramianSample a = stochastic_gramian_sample(s, uav_plan(), q, 9, 0);
  const GramianSample b = stochastic_gramian_sample(s, uav_plan(), q, 9, 1);
  const GramianSample a2 = stochastic_gramian_sample(s, uav_plan(), q, 9, 0);
  EXPECT_TRUE(a.stochastic);
  EXPECT_EQ(a.integrator, "euler-maruyama");
  EXPECT_EQ(a.w, a2.w);
  EXPECT_FALSE(a.w.isApprox(b.w, 1e-6));
  for (const auto* g : {&a, &b}) {
    EXPECT_TRUE(g->w.isApprox(g->w.transpose(), 0.0));
    const Eigen::VectorXd ev = symmetric_eigenvalues(g->w);
    EXPECT_GE(ev[0], -1e-10 * g->w.trace());
  }
}

TEST(Gramian, SubsetOfStates) {
  PerturbationPlan p = uav_plan();
  p.perturbed_indices = {2, 3, 4};
  const GramianSample g = empirical_gramian(uav_system({}), p);
  EXPECT_EQ(g.dimension(), 3);
  EXPECT_EQ(g.perturbed_indices, (std::vector<int>{2, 3, 4}));
  p.perturbed_indices = {7};
  EXPECT_THROW(empirical_gramian(uav_system({}), p), ConfigError);
}

TEST(Gramian, RejectsBadEpsilon) {
  PerturbationPlan p = decay_plan(0.0);
  EXPECT_THROW(empirical_gramian(decay_system(), p), ConfigError);
}

TEST(LinearGramian, Examples) {
  Eigen::MatrixXd a(1, 1), c(1, 1);
  a << 0.5;
  c << 1.0;
  EXPECT_NEAR(linear_gramian(a, c, 100)(0, 0), 4.0 / 3.0, 1e-7);

  Eigen::MatrixXd a2(2, 2), c2(1, 2);
  a2 << 1, 1, 0, 1;
  c2 << 1, 0;
  Eigen::MatrixXd o(2, 2);
  o << 1, 0, 1, 1;
  EXPECT_EQ(observability_matrix(a2, c2, 2), o);
  EXPECT_EQ(numerical_rank(observability_matrix(a2, c2, 2), 1e-9), 2);

  Eigen::MatrixXd c3(1, 2);
  c3 << 0, 1;
  EXPECT_EQ(numerical_rank(observability_matrix(a2, c3, 4), 1e-9), 1);
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Identity(3, 3), 1e-9), 3);
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Zero(3, 3), 1e-9), 0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m.diagonal() << 1.0, 1e-12;
  EXPECT_EQ(numerical_rank(m, 1e-9), 1);
}

TEST(MatrixIo, RoundTrip) {
  GramianSample g;
  g.w = Eigen::MatrixXd::Random(3, 3);
  g.w = (g.w * g.w.transpose()).eval();
  g.w(0, 1) = g.w(1, 0) = 1.0 / 3.0;
  g.epsilon = 1e-3;
  g.run_index = 7;
  g.perturbed_indices = {2, 3, 4};
  g.master_seed = 12345;
  g.stochastic = true;
  g.integrator = "euler-maruyama";
  std::stringstream ss;
  write_matrix_file(ss, to_matrix_file(g));
  const MatrixFile f = read_matrix_file(ss);
  EXPECT_EQ(f.data, g.w);
  EXPECT_EQ(f.kind, "gramian");
  EXPECT_EQ(f.field("perturbed"), "2,3,4");
  EXPECT_EQ(f.field("run_index"), "7");
  EXPECT_EQ(f.field("master_seed"), "12345");
  EXPECT_EQ(f.field("missing"), "");
}

TEST(MatrixIo, RejectsTruncated) {
  std::stringstream ss("# obsgram-matrix v1\n# kind=x\n2 2\n1 2\n3\n");
  EXPECT_THROW(read_matrix_file(ss), ConfigError);
}

TEST(LinearGramian, RankMatchesObservabilityMatrix) {
  std::srand(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const Eigen::MatrixXd a = 0.4 * Eigen::MatrixXd::Random(n, n);
    const Eigen::MatrixXd c = Eigen::MatrixXd::Random(1, n);
    EXPECT_EQ(numerical_rank(observability_matrix(a, c, n), 1e-9),
              numerical_rank(linear_gramian(a, c, 10 * n), 1e-9));
  }
  EXPECT_TRUE(observability_matrix(Eigen::MatrixXd::Identity(2, 2),
                                   Eigen::MatrixXd::Zero(1, 2), 3).isZero(0.0));
  Eigen::MatrixXd c(1, 3);
  c << 1, 0, 0;
  EXPECT_EQ(numerical_rank(observability_matrix(Eigen::MatrixXd::Identity(3, 3), c, 3), 1e-9), 1);
}
