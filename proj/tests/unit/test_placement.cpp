#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "obsgram/errors.hpp"
#include "obsgram/optimize.hpp"
#include "obsgram/placement.hpp"

using namespace obsgram;

namespace {

// Rank-one sensors on a 2-D plate: a sensor at (x, y) sees the state
// direction (cos(a), sin(a)) with a depending on position, scaled by gain.
class ToyField : public SensorField {
 public:
  explicit ToyField(int runs = 1) : runs_(runs) {}
  int runs() const override { return runs_; }
  int dimension() const override { return 2; }
  Locus lower() const override { return {-5.0, -1.25}; }
  Locus upper() const override { return {0.0, 1.25}; }
  Eigen::MatrixXd gramian(const Locus& l, int run) const override {
    const double a = 0.6 * l.x + 1.1 * l.y + 0.1 * run;
    const double gain = 1.0 + 0.2 * l.x * l.x + 0.3 * run;
    const Eigen::Vector2d v(std::cos(a), std::sin(a));
    return gain * v * v.transpose() + 1e-3 * Eigen::Matrix2d::Identity();
  }

 private:
  int runs_;
};

Eigen::MatrixXd diag(double a, double b) { return Eigen::Vector2d(a, b).asDiagonal(); }

}  // namespace

TEST(Placement, PenaltyBelowMinimumDistance) {
  ToyField field;
  PlacementProblem p;
  p.r = 2;
  EXPECT_EQ(evaluate_placement({{-1.0, 0.0}, {-1.05, 0.0}}, p, field), 1e5);
  EXPECT_LT(evaluate_placement({{-1.0, 0.0}, {-1.0, 0.5}}, p, field), 1e5);
  EXPECT_THROW(evaluate_placement({{-1.0, 0.0}}, p, field), ConfigError);
  EXPECT_THROW(evaluate_placement({{1.0, 0.0}, {-1.0, 0.5}}, p, field), ConfigError);
}

TEST(Placement, PermutationInvariant) {
  ToyField field(3);
  PlacementProblem p;
  p.r = 3;
  p.metric = Metric::combined(0.5);
  const std::vector<Locus> a = {{-1.0, 0.2}, {-3.3, -0.7}, {-4.1, 1.0}};
  const std::vector<Locus> b = {a[2], a[0], a[1]};
  EXPECT_EQ(evaluate_placement(a, p, field), evaluate_placement(b, p, field));
}

TEST(Placement, SingleSensorSingleRun) {
  ToyField field;
  PlacementProblem p;
  p.metric = Metric::kappa();
  const Locus l{-2.0, 0.3};
  EXPECT_EQ(evaluate_placement({l}, p, field), condition_number(field.gramian(l, 0)));
}

TEST(Placement, MeanOverRuns) {
  ToyField field(4);
  PlacementProblem p;
  p.r = 2;
  p.metric = Metric::nu();
  const std::vector<Locus> loci = {{-1.0, 0.0}, {-2.0, 1.0}};
  double expected = 0.0;
  for (int k = 0; k < 4; ++k) {
    expected += unobservability_index(field.gramian(loci[0], k) + field.gramian(loci[1], k));
  }
  EXPECT_NEAR(evaluate_placement(loci, p, field), expected / 4.0, 1e-12 * expected);
}

TEST(Placement, SnapToCandidates) {
  const std::vector<Locus> nodes = {{0, 0}, {-1, 0}, {-1, 1}};
  EXPECT_EQ(snap_to_candidates({-0.9, 0.2}, nodes), (Locus{-1, 0}));
  EXPECT_EQ(snap_to_candidates({-0.5, 0.0}, nodes), (Locus{0, 0}));
  EXPECT_NEAR(min_pairwise_distance(nodes), 1.0, 1e-15);
}

TEST(Placement, PackRoundTrip) {
  const std::vector<Locus> l = {{-1, 0.5}, {-2, -0.25}};
  EXPECT_EQ(unpack_loci(pack_loci(l)), l);
  EXPECT_THROW(unpack_loci(Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST(Aggregate, Examples) {
  const std::vector<Eigen::MatrixXd> g = {diag(1, 0), diag(0, 1), diag(2, 2)};
  EXPECT_EQ(aggregate_gramian(g, {true, true, false}), diag(1, 1));
  EXPECT_EQ(aggregate_gramian(g, {false, false, false}), diag(0, 0));
  EXPECT_EQ(aggregate_gramian(g, {true, true, true}), diag(3, 3));
  EXPECT_THROW(aggregate_gramian(g, {true}), ConfigError);
}

TEST(Exhaustive, PicksComplementarySensors) {
  const std::vector<std::vector<Eigen::MatrixXd>> c = {
      {diag(1, 0)}, {diag(0, 1)}, {diag(0.5, 0)}, {diag(0, 0.5)}};
  const ExhaustiveResult r = exhaustive_select(c, 2, Metric::nu());
  EXPECT_EQ(r.indices, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(r.cost, 1.0);
  EXPECT_EQ(r.subsets, 6);
}

TEST(Exhaustive, TieKeepsLexicographicallySmallest) {
  const std::vector<std::vector<Eigen::MatrixXd>> c = {
      {diag(1, 1)}, {diag(1, 1)}, {diag(1, 1)}};
  EXPECT_EQ(exhaustive_select(c, 2, Metric::kappa()).indices, (std::vector<int>{0, 1}));
}

TEST(Exhaustive, MonotoneInSensorCount) {
  ToyField field(2);
  std::vector<std::vector<Eigen::MatrixXd>> c;
  for (int i = 0; i < 8; ++i) {
    const Locus l{-0.6 * i, 0.3 * (i % 3) - 0.3};
    c.push_back({field.gramian(l, 0), field.gramian(l, 1)});
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= 4; ++r) {
    const double cost = exhaustive_select(c, r, Metric::nu()).cost;
    EXPECT_LE(cost, prev);
    prev = cost;
  }
}

TEST(Exhaustive, Budget) {
  std::vector<std::vector<Eigen::MatrixXd>> c(30, {diag(1, 1)});
  EXPECT_THROW(exhaustive_select(c, 15, Metric::nu(), 1e6), BudgetError);
  EXPECT_THROW(exhaustive_select(c, 0, Metric::nu()), ConfigError);
}

TEST(Pso, ConvexBowl) {
  const Objective f = [](const Eigen::VectorXd& z) {
    return (z - Eigen::Vector3d(0.3, -0.2, 0.7)).squaredNorm();
  };
  Box box{Eigen::Vector3d::Constant(-1), Eigen::Vector3d::Constant(1)};
  PsoSettings s;
  s.seed = 4;
  const PsoResult r = pso_optimize(f, box, s);
  EXPECT_LT(r.best_cost, 1e-6);
  EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(s.iterations + 1));
  for (std::size_t k = 1; k < r.trace.size(); ++k) ASSERT_LE(r.trace[k], r.trace[k - 1]);
  EXPECT_TRUE(box.contains(r.best));
  const PsoResult again = pso_optimize(f, box, s);
  EXPECT_EQ(r.best, again.best);
  s.threads = 2;
  EXPECT_EQ(pso_optimize(f, box, s).best, r.best);
}

TEST(Pso, FailuresBecomePenalty) {
  const Objective f = [](const Eigen::VectorXd& z) {
    if (z[0] > 0.0) throw DivergenceError("bad", 0);
    return z.squaredNorm();
  };
  Box box{Eigen::Vector2d::Constant(-1), Eigen::Vector2d::Constant(1)};
  const PsoResult r = pso_optimize(f, box, {});
  EXPECT_LE(r.best[0], 0.0);
  EXPECT_LT(r.best_cost, 1e-4);
}

TEST(Pso, KeepsFixedPoint) {
  const Objective f = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  Box box{Eigen::Vector2d::Constant(-1), Eigen::Vector2d::Constant(1)};
  PsoSettings s;
  s.swarm = 4;
  s.iterations = 20;
  s.random_initial_velocity = false;
  s.initial_positions.assign(4, Eigen::Vector2d::Zero());
  const PsoResult r = pso_optimize(f, box, s);
  EXPECT_EQ(r.best, Eigen::Vector2d::Zero());
  EXPECT_EQ(r.best_cost, 0.0);
}

TEST(Refine, OneDimensional) {
  const Objective f = [](const Eigen::VectorXd& z) { return std::pow(z[0] - 0.3, 2); };
  Box box{Eigen::VectorXd::Constant(1, -1), Eigen::VectorXd::Constant(1, 1)};
  const PatternSearchResult r = refine_local(f, box, Eigen::VectorXd::Constant(1, -0.8));
  EXPECT_NEAR(r.point[0], 0.3, 1e-6);
  EXPECT_DOUBLE_EQ(r.start_cost, 1.21);
}

TEST(Refine, NeverWorse) {
  const Objective f = [](const Eigen::VectorXd& z) {
    return std::sin(7 * z[0]) * std::cos(5 * z[1]) + z.squaredNorm();
  };
  Box box{Eigen::Vector2d::Constant(-2), Eigen::Vector2d::Constant(2)};
  for (double a : {-1.5, -0.3, 0.9}) {
    const Eigen::Vector2d start(a, -a / 2);
    const PatternSearchResult r = refine_local(f, box, start);
    EXPECT_LE(r.cost, f(start));
    EXPECT_TRUE(box.contains(r.point));
  }
  EXPECT_THROW(refine_local(f, box, Eigen::Vector2d(3, 0)), ConfigError);
}

TEST(PlaceSensors, FindsFeasiblePlacement) {
  ToyField field(2);
  PlacementProblem p;
  p.r = 2;
  p.metric = Metric::nu();
  p.pso.swarm = 20;
  p.pso.iterations = 30;
  const PlacementResult r = place_sensors(p, field);
  ASSERT_EQ(r.loci.size(), 2u);
  EXPECT_GE(min_pairwise_distance(r.loci), p.d_allowed);
  EXPECT_LE(r.cost, r.pso_cost);
  EXPECT_EQ(r.cost, evaluate_placement(r.loci, p, field));
  EXPECT_EQ(r.per_locus_cost.size(), 2u);
}
