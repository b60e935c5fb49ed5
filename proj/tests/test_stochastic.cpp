#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "basbench/stochastic.hpp"

using namespace basbench;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

SafetySpec cs1_spec(std::size_t N) { return {Box::uniform(2, 19.5, 20.5), N, "G<=N |T - 20| <= 0.5"}; }

GaussianKernel scalar_kernel(double a, double q, double var) {
  GaussianKernel k;
  k.A = Eigen::MatrixXd::Constant(1, 1, a);
  k.B = Eigen::MatrixXd::Constant(1, 1, 0.1);
  k.Q = Eigen::VectorXd::Constant(1, q);
  k.variance = Eigen::VectorXd::Constant(1, var);
  k.U = Box(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0));
  return k;
}

}  // namespace

TEST(Kernel, Cs1FoldIn) {
  const auto k = build_kernel_cs1_2d();
  EXPECT_NEAR(k.Q(0), 4.3576, 1e-4);
  EXPECT_NEAR(k.Q(1), 3.6608, 1e-4);
  // 0.6682*20 + 0.1320*20 + 4.3576, 0.6830*20 + 0.1402*20 + 3.6608
  const Eigen::VectorXd mu = k.mean(Eigen::Vector2d(20, 20), Eigen::VectorXd::Constant(1, 20));
  EXPECT_NEAR(mu(0), 20.3616, 1e-9);
  EXPECT_NEAR(mu(1), 20.1248, 1e-9);
  EXPECT_DOUBLE_EQ(k.variance(0), 0.0774 * 0.0774);
}

TEST(Kernel, RejectsNonPositiveVariance) {
  auto k = scalar_kernel(0.9, 2.0, 0.0);
  EXPECT_THROW(k.validate(), Error);
}

TEST(Grid, SingleCellMatchesBoxMass) {
  const auto k = build_kernel_cs1_2d();
  const auto spec = cs1_spec(1);
  const auto acts = uniform_actions(15, 22, 3);
  const auto mdp = grid_abstraction(k, spec, 1, acts);
  for (std::size_t a = 0; a < acts.size(); ++a) {
    const auto row = mdp.dense_row(0, a);
    const Eigen::VectorXd mu = k.mean(mdp.center(0), acts[a]);
    double mass = 1.0;
    for (int r = 0; r < 2; ++r) {
      const double s = std::sqrt(k.variance(r));
      mass *= normal_cdf((20.5 - mu(r)) / s) - normal_cdf((19.5 - mu(r)) / s);
    }
    EXPECT_NEAR(row(0), mass, 1e-12);
    EXPECT_NEAR(row(1), 1.0 - mass, 1e-12);
  }
}

TEST(Grid, LargeVarianceLosesMass) {
  auto k = scalar_kernel(0.5, 10.0, 1e6);
  SafetySpec spec{Box(Eigen::VectorXd::Constant(1, 19.5), Eigen::VectorXd::Constant(1, 20.5)), 1, ""};
  const auto mdp = grid_abstraction(k, spec, 4, uniform_actions(0, 1, 2));
  EXPECT_LT(mdp.dense_row(0, 0).head(4).sum(), 1e-3);
}

TEST(Grid, SmallVarianceConcentrates) {
  auto k = scalar_kernel(0.5, 10.0, 1e-12);
  SafetySpec spec{Box(Eigen::VectorXd::Constant(1, 19.0), Eigen::VectorXd::Constant(1, 21.0)), 1, ""};
  const auto mdp = grid_abstraction(k, spec, 4, uniform_actions(0, 0, 1));
  // center of cell 3 is 20.75 -> mean 20.375, inside cell 2 = [20, 20.5)
  const auto row = mdp.dense_row(3, 0);
  EXPECT_NEAR(row(2), 1.0, 1e-12);
  EXPECT_NEAR(row.sum(), 1.0, 1e-12);
}

TEST(Grid, DegenerateCellRejected) {
  const auto k = build_kernel_cs1_2d();
  SafetySpec spec{Box(Eigen::Vector2d(19.5, 20.0), Eigen::Vector2d(20.5, 20.0)), 1, ""};
  EXPECT_THROW(grid_abstraction(k, spec, 4, uniform_actions(15, 22, 2)), Error);
  EXPECT_THROW(grid_abstraction(k, cs1_spec(1), 4, uniform_actions(15, 30, 2)), Error);
}

TEST(Grid, RowsSumToOne) {
  const auto k = build_kernel_cs1_2d();
  const auto mdp = grid_abstraction(k, cs1_spec(6), 20, uniform_actions(15, 22, 15));
  std::mt19937 gen(4);
  std::uniform_int_distribution<std::size_t> cell(0, mdp.cells() - 1), act(0, mdp.num_actions() - 1);
  for (int i = 0; i < 1000; ++i) {
    const auto row = mdp.dense_row(cell(gen), act(gen));
    EXPECT_NEAR(row.sum(), 1.0, 1e-9);
    EXPECT_GE(row.minCoeff(), 0.0);
  }
}

TEST(Grid, LocateAndSnap) {
  const auto k = build_kernel_cs1_2d();
  const auto mdp = grid_abstraction(k, cs1_spec(1), 10, uniform_actions(15, 22, 2));
  EXPECT_FALSE(mdp.locate(Eigen::Vector2d(19.0, 20.0)));
  EXPECT_EQ(mdp.nearest(Eigen::Vector2d(19.0, 19.0)), 0u);
  EXPECT_EQ(mdp.nearest(Eigen::Vector2d(21.0, 21.0)), mdp.cells() - 1);
  const auto c = *mdp.locate(Eigen::Vector2d(19.86, 20.31));
  EXPECT_TRUE(mdp.cell_box(c).contains(Eigen::Vector2d(19.86, 20.31)));
  EXPECT_EQ(c, 3u + 10u * 8u);
}

TEST(ValueIteration, ZeroHorizon) {
  const auto mdp = grid_abstraction(build_kernel_cs1_2d(), cs1_spec(0), 5, uniform_actions(15, 22, 2));
  const auto res = safety_value_iteration(mdp, 0);
  for (double v : res.final_values()) EXPECT_EQ(v, 1.0);
}

TEST(ValueIteration, AnalyticPower) {
  // mean fixed at the cell center with a symmetric spread: p_stay = 0.5
  auto k = scalar_kernel(0.0, 20.0, 1.0);
  const double half = 0.6744897501960817;  // Phi^-1(0.75)
  SafetySpec spec{Box(Eigen::VectorXd::Constant(1, 20.0 - half), Eigen::VectorXd::Constant(1, 20.0 + half)), 2, ""};
  k.B.setZero();
  const auto mdp = grid_abstraction(k, spec, 1, uniform_actions(0, 0, 1));
  EXPECT_NEAR(mdp.dense_row(0, 0)(0), 0.5, 1e-12);
  EXPECT_NEAR(safety_value_iteration(mdp, 2).final_values()[0], 0.25, 1e-12);
}

TEST(ValueIteration, FixedActionEqualsMatrixPower) {
  auto k = scalar_kernel(0.8, 4.0, 0.04);
  SafetySpec spec{Box(Eigen::VectorXd::Constant(1, 19.0), Eigen::VectorXd::Constant(1, 21.0)), 5, ""};
  const auto mdp = grid_abstraction(k, spec, 5, uniform_actions(0.3, 0.3, 1));
  const auto P = dense_transition(mdp, 0);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(6);
  v(5) = 0.0;
  Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(6, 6);
  const auto res = safety_value_iteration(mdp, 5);
  for (std::size_t n = 0; n <= 5; ++n) {
    const Eigen::VectorXd expect = Pk * v;
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(res.values[n][i], expect(static_cast<Eigen::Index>(i)), 1e-12);
    Pk = P * Pk;
  }
}

TEST(ValueIteration, BoundedAndNonincreasing) {
  const auto mdp = grid_abstraction(build_kernel_cs1_2d(), cs1_spec(6), 20, uniform_actions(15, 22, 15));
  const auto res = safety_value_iteration(mdp, 6);
  for (std::size_t n = 0; n < res.values.size(); ++n) {
    for (std::size_t i = 0; i < mdp.cells(); ++i) {
      EXPECT_GE(res.values[n][i], 0.0);
      EXPECT_LE(res.values[n][i], 1.0);
      if (n > 0) EXPECT_LE(res.values[n][i], res.values[n - 1][i] + 1e-12);
    }
  }
}

TEST(ValueIteration, TiesGoToLowestAction) {
  auto k = scalar_kernel(0.0, 20.0, 1.0);
  k.B.setZero();
  SafetySpec spec{Box(Eigen::VectorXd::Constant(1, 19.0), Eigen::VectorXd::Constant(1, 21.0)), 3, ""};
  const auto mdp = grid_abstraction(k, spec, 4, uniform_actions(0, 1, 5));
  const auto res = safety_value_iteration(mdp, 3);
  for (const auto& step : res.policy.per_step) {
    for (auto a : step) EXPECT_EQ(a, 0u);
  }
}

TEST(ValueIteration, Cs1BestRegion) {
  const auto mdp = grid_abstraction(build_kernel_cs1_2d(), cs1_spec(6), 20, uniform_actions(15, 22, 15));
  const auto V = safety_value_iteration(mdp, 6).final_values();
  double in = 0.0, out = 0.0;
  for (std::size_t i = 0; i < mdp.cells(); ++i) {
    const auto c = mdp.center(i);
    (c(0) <= 20.0 ? in : out) = std::max(c(0) <= 20.0 ? in : out, V[i]);
  }
  EXPECT_GT(in, out);
}

TEST(Policy, RefinementAndSnap) {
  const auto mdp = grid_abstraction(build_kernel_cs1_2d(), cs1_spec(1), 4, uniform_actions(15, 22, 15));
  auto constant = Policy::stationary(mdp, 7);
  auto ctrl = refine_policy(constant, identity_interface());
  EXPECT_DOUBLE_EQ(ctrl(0, Eigen::Vector2d(3, 40))(0), 15.0 + 7 * 0.5);

  Policy p = Policy::stationary(mdp, 0);
  p.per_step[0][0] = 3;
  auto snap = refine_policy(p, project_interface({0, 1}));
  EXPECT_DOUBLE_EQ(snap(0, Eigen::Vector3d(10.0, 10.0, 99.0))(0), mdp.actions()[3](0));
}

TEST(Policy, GreedyRolloutMatchesValue) {
  const auto k = build_kernel_cs1_2d();
  const auto mdp = grid_abstraction(k, cs1_spec(6), 20, uniform_actions(15, 22, 15));
  const auto res = safety_value_iteration(mdp, 6);
  const auto start = *mdp.locate(Eigen::Vector2d(19.82, 20.03));
  const auto mc = rollout_safety(k, res.policy, mdp.safe(), mdp.center(start), 6, 10'000, 5);
  EXPECT_NEAR(mc.p, res.final_values()[start], 0.03);
}

TEST(Compose, Arithmetic) {
  EXPECT_NEAR(compose_guarantee(0.9257, 0.005, 16, 0.01), 0.7607, 1e-12);
  EXPECT_EQ(compose_guarantee(1.0, 0.0, 40, 0.0), 1.0);
  EXPECT_NEAR(compose_guarantee(0.5, 0.1, 4, 0.05), 0.2, 1e-12);
  EXPECT_EQ(compose_guarantee(0.1, 0.1, 4, 0.05), 0.0);
  EXPECT_THROW(compose_guarantee(-0.1, 0.0, 1, 0.0), Error);
}

TEST(Binomial, WilsonInterval) {
  const auto e = binomial_estimate(5000, 10000);
  EXPECT_NEAR(e.p, 0.5, 1e-15);
  EXPECT_LT(e.lo, 0.5);
  EXPECT_GT(e.hi, 0.5);
  EXPECT_NEAR(e.hi - e.lo, 2 * 2.5758 * 0.005, 1e-3);
  const auto z = binomial_estimate(0, 10000);
  EXPECT_NEAR(z.lo, 0.0, 1e-15);
  EXPECT_GT(z.hi, 0.0);
}
