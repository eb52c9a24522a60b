#include <cmath>

#include <gtest/gtest.h>

#include "obsgram/errors.hpp"
#include "obsgram/integrate.hpp"
#include "obsgram/system.hpp"
#include "obsgram/uav.hpp"

using namespace obsgram;

namespace {

DynamicalSystem scalar_system(double a, int n_noise = 0) {
  DynamicalSystem s;
  s.n_states = 1;
  s.n_outputs = 1;
  s.drift = [a](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
    return Eigen::VectorXd(a * x);
  };
  s.noise_map = Eigen::MatrixXd::Ones(1, n_noise);
  s.output_map = [](std::span<const Eigen::VectorXd> w, double) { return w.back(); };
  return s;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

}  // namespace

TEST(Integrate, ConstantSolution) {
  const Trajectory t = integrate_deterministic(scalar_system(0.0), vec({3.0}),
                                               InputSignal::zero(0), 1.0, 0.1);
  ASSERT_EQ(t.size(), 11u);
  for (const auto& x : t.states) EXPECT_EQ(x[0], 3.0);
}

TEST(Integrate, ExponentialDecay) {
  const Trajectory t = integrate_deterministic(scalar_system(-1.0), vec({1.0}),
                                               InputSignal::zero(0), 1.0, 1e-3);
  EXPECT_NEAR(t.states.back()[0], 0.3678794, 1e-6);
  EXPECT_NEAR(t.times.back(), 1.0, 1e-12);
  for (std::size_t k = 1; k < t.size(); ++k) {
    EXPECT_NEAR(t.times[k] - t.times[k - 1], 1e-3, 1e-15);
  }
}

TEST(Integrate, Rk4FourthOrder) {
  auto err = [](double dt) {
    const Trajectory t = integrate_deterministic(scalar_system(-1.0), vec({1.0}),
                                                 InputSignal::zero(0), 1.0, dt);
    return std::abs(t.states.back()[0] - std::exp(-1.0));
  };
  EXPECT_GE(err(0.1) / err(0.05), 12.0);
}

TEST(Integrate, UavDriftAtStart) {
  const DynamicalSystem uav = uav_system({});
  const Eigen::VectorXd dx =
      uav.drift(vec({0, 0, 0, 1, 2}), Eigen::VectorXd::Zero(1), 0.0);
  EXPECT_TRUE(dx.isApprox(vec({11, 2, 0, 0, 0})));
}

TEST(Integrate, StepCountMustBeInteger) {
  EXPECT_EQ(step_count(1.0, 0.1), 10u);
  EXPECT_THROW(step_count(1.0, 0.3), ConfigError);
  EXPECT_THROW(step_count(-1.0, 0.1), ConfigError);
}

TEST(Integrate, DivergenceNamesStep) {
  DynamicalSystem s = scalar_system(0.0);
  s.drift = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double t) {
    return Eigen::VectorXd(t > 0.45 ? x * std::numeric_limits<double>::infinity() : x * 0.0);
  };
  try {
    integrate_deterministic(s, vec({1.0}), InputSignal::zero(0), 1.0, 0.1);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 4u);
    EXPECT_LE(e.step(), 6u);
  }
}

TEST(Integrate, NoiseNeedsEuler) {
  NoiseSpec n{vec({1.0}), 1, {}};
  EXPECT_THROW(simulate(scalar_system(0.0, 1), vec({0.0}), InputSignal::zero(0),
                        1.0, 0.1, Scheme::kRk4, &n),
               ConfigError);
}

TEST(Stochastic, ZeroNoiseEqualsEuler) {
  const DynamicalSystem s = scalar_system(-2.0, 1);
  NoiseSpec n{vec({0.0}), 9, {1, 2, 1, 0}};
  const Trajectory a = integrate_stochastic(s, vec({1.0}), InputSignal::zero(0), n, 1.0, 0.01);
  const Trajectory b = integrate_deterministic(s, vec({1.0}), InputSignal::zero(0), 1.0,
                                               0.01, Scheme::kEuler);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.states[k][0], b.states[k][0]);
}

TEST(Stochastic, BrownianVariance) {
  const DynamicalSystem s = scalar_system(0.0, 1);
  const double q = 0.3, t1 = 1.0;
  const int runs = 10000;
  double sum = 0, sum2 = 0;
  for (int r = 0; r < runs; ++r) {
    NoiseSpec n{vec({q}), 3, {static_cast<std::uint32_t>(r), 0, 0, 0}};
    const double x = integrate_stochastic(s, vec({0.0}), InputSignal::zero(0), n, t1, 0.1)
                         .states.back()[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / runs;
  const double var = (sum2 - runs * mean * mean) / (runs - 1);
  // Standard error of a Gaussian sample variance: sigma^2 sqrt(2/(n-1)).
  const double se = q * t1 * std::sqrt(2.0 / (runs - 1));
  EXPECT_NEAR(var, q * t1, 3.0 * se);
}

TEST(Stochastic, Reproducible) {
  const DynamicalSystem s = scalar_system(-1.0, 1);
  NoiseSpec n{vec({1.0}), 77, {4, 0, -1, 0}};
  const Trajectory a = integrate_stochastic(s, vec({1.0}), InputSignal::zero(0), n, 1.0, 0.01);
  const Trajectory b = integrate_stochastic(s, vec({1.0}), InputSignal::zero(0), n, 1.0, 0.01);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.states[k][0], b.states[k][0]);
}

TEST(SampleNoise, ZeroCovariance) {
  NoiseSpec n{vec({0.0, 0.0}), 1, {}};
  EXPECT_TRUE(sample_noise(n, 50).isZero(0.0));
}

TEST(SampleNoise, ChannelVariances) {
  NoiseSpec n{vec({1.0, 1e-4}), 2024, {}};
  const Eigen::MatrixXd w = sample_noise(n, 1000000);
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd c = w.col(j);
    const double m = c.mean();
    const double var = (c.array() - m).square().sum() / (c.size() - 1);
    EXPECT_NEAR(var / n.q_diagonal[j], 1.0, 0.01);
  }
}

TEST(SampleNoise, StreamsIndependent) {
  NoiseSpec a{vec({1.0}), 5, {0, 0, 1, 0}};
  NoiseSpec b{vec({1.0}), 5, {0, 0, -1, 0}};
  const Eigen::VectorXd x = sample_noise(a, 100000).col(0);
  const Eigen::VectorXd y = sample_noise(b, 100000).col(0);
  const double corr = ((x.array() - x.mean()) * (y.array() - y.mean())).sum() /
                      std::sqrt((x.array() - x.mean()).square().sum() *
                                (y.array() - y.mean()).square().sum());
  EXPECT_LT(std::abs(corr), 0.01);
}

TEST(InputSignal, ZeroOrderHold) {
  const InputSignal u = InputSignal::zero_order_hold({0.0, 1.0, 2.0},
                                                    {vec({1}), vec({2}), vec({3})});
  EXPECT_EQ(u(0.5)[0], 1.0);
  EXPECT_EQ(u(1.0)[0], 2.0);
  EXPECT_EQ(u(7.0)[0], 3.0);
}

TEST(Integrate, DelayedOutputsNotReady) {
  DynamicalSystem s = scalar_system(0.0);
  s.output_delay = 0.3;
  s.output_map = [](std::span<const Eigen::VectorXd> w, double) {
    return Eigen::VectorXd::Constant(1, static_cast<double>(w.size()));
  };
  const Trajectory t = integrate_deterministic(s, vec({1.0}), InputSignal::zero(0), 1.0, 0.1);
  EXPECT_EQ(t.first_ready, 3u);
  EXPECT_TRUE(std::isnan(t.outputs[2][0]));
  EXPECT_EQ(t.outputs[3][0], 4.0);
}

TEST(Integrate, KickShiftsState) {
  StateKick kick{0.5, vec({2.0})};
  const Trajectory t = simulate(scalar_system(0.0), vec({1.0}), InputSignal::zero(0),
                                1.0, 0.1, Scheme::kRk4, nullptr, &kick);
  EXPECT_EQ(t.states[4][0], 1.0);
  EXPECT_EQ(t.states[5][0], 3.0);
  EXPECT_EQ(t.outputs[5][0], 3.0);
}
