#include <gtest/gtest.h>

#include <random>

#include "basbench/benchmarks.hpp"
#include "basbench/simulate.hpp"

using namespace basbench;

namespace {

const Eigen::Vector4d kX0(18.0, 18.0, 35.0, 35.0);

DiscreteModel cs1(BenchmarkId id) { return *build_benchmark(id).discrete; }

}  // namespace

TEST(Step, Cs1DetHandArithmetic) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  const auto x = step(m, kX0, Eigen::VectorXd::Constant(1, 20.0), Eigen::VectorXd(0), Eigen::VectorXd(0));
  EXPECT_NEAR(x(0), 19.0252, 1e-3);
  EXPECT_NEAR(x(1), 18.7588, 1e-3);
  EXPECT_NEAR(x(2), 31.0122, 1e-3);
  EXPECT_NEAR(x(3), 31.8098, 1e-3);
}

TEST(Step, NoiseIgnoredWhenDeterministic) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  const auto u = Eigen::VectorXd::Constant(1, 20.0);
  const auto a = step(m, kX0, u, Eigen::VectorXd(0), Eigen::Vector4d(5, -5, 1, 2));
  const auto b = step(m, kX0, u, Eigen::VectorXd(0), Eigen::Vector4d::Zero());
  EXPECT_EQ(a, b);
}

TEST(Step, FixedPointIsInvariant) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 20.0);
  const Eigen::VectorXd xs = (Eigen::Matrix4d::Identity() - m.A).lu().solve(m.B * u + m.Q);
  const auto x = step(m, xs, u, Eigen::VectorXd(0), Eigen::VectorXd(0));
  EXPECT_LT((x - xs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Simulate, ZeroStepsKeepsInitialState) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  const auto tr = simulate(m, kX0, InputSchedule::constant(Eigen::VectorXd::Constant(1, 20)), DisturbanceLaw::none(),
                           1, 0);
  EXPECT_EQ(tr.states.rows(), 1);
  EXPECT_EQ(Eigen::VectorXd(tr.states.row(0).transpose()), Eigen::VectorXd(kX0));
}

TEST(Simulate, SameSeedSameTrace) {
  const auto b = build_benchmark(BenchmarkId::Cs1Stoch);
  const auto s = InputSchedule::cs1_weekday();
  const auto t1 = simulate(*b.discrete, kX0, s, b.law, 42, 96);
  const auto t2 = simulate(*b.discrete, kX0, s, b.law, 42, 96);
  const auto t3 = simulate(*b.discrete, kX0, s, b.law, 43, 96);
  EXPECT_EQ(t1.states, t2.states);
  EXPECT_NE(t1.states, t3.states);
}

TEST(Simulate, ZeroedNoiseMatchesDeterministicModel) {
  auto sto = cs1(BenchmarkId::Cs1Stoch);
  sto.Sigma.setZero();
  const auto det = cs1(BenchmarkId::Cs1Det);
  const auto s = InputSchedule::cs1_weekday();
  EXPECT_EQ(simulate(sto, kX0, s, DisturbanceLaw::none(), 9, 192).states,
            simulate(det, kX0, s, DisturbanceLaw::none(), 9, 192).states);
}

TEST(Schedule, WeekdayWindows) {
  const auto s = InputSchedule::cs1_weekday();
  EXPECT_EQ(s.at(36, 9 * 60.0)(0), 20.0);
  EXPECT_EQ(s.at(50, 12 * 60.0 + 30)(0), 18.0);
  EXPECT_EQ(s.at(0, 0.0)(0), 18.0);
  EXPECT_EQ(s.at(0, 24 * 60.0 + 14 * 60.0)(0), 20.0);
  EXPECT_EQ(s.at(0, 18 * 60.0)(0), 18.0);
}

TEST(Simulate, LinearityInInitialState) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  const auto s = InputSchedule::cs1_weekday();
  std::mt19937 gen(1);
  std::normal_distribution<double> N(0, 1);
  const Eigen::Vector4d dx(N(gen), N(gen), N(gen), N(gen));
  const auto a = simulate(m, kX0, s, DisturbanceLaw::none(), 0, 20);
  const auto b = simulate(m, kX0 + dx, s, DisturbanceLaw::none(), 0, 20);
  Eigen::Matrix4d Ak = Eigen::Matrix4d::Identity();
  for (Eigen::Index k = 0; k <= 20; ++k) {
    const Eigen::Vector4d diff = (b.states.row(k) - a.states.row(k)).transpose();
    EXPECT_LT((diff - Ak * dx).cwiseAbs().maxCoeff(), 1e-10);
    Ak = m.A * Ak;
  }
}

TEST(Simulate, StableUnderConstantInput) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  // power iteration on A^T A bounds the spectral radius via ||A^k||^(1/k)
  Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(4, 4);
  for (int k = 0; k < 64; ++k) Ak = m.A * Ak;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
  double lambda = 0.0;
  for (int i = 0; i < 200; ++i) {
    v = Ak.transpose() * (Ak * v);
    lambda = v.norm();
    v /= lambda;
  }
  const double rho = std::pow(std::sqrt(lambda), 1.0 / 64.0);
  EXPECT_LT(rho, 1.0);

  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 20.0);
  const Eigen::VectorXd xs = (Eigen::Matrix4d::Identity() - m.A).lu().solve(m.B * u + m.Q);
  const auto tr = simulate(m, kX0, InputSchedule::constant(u), DisturbanceLaw::none(), 0, 400);
  EXPECT_LT((tr.states.bottomRows(1).transpose() - xs).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MonteCarlo, SingleTraceEqualsSimulate) {
  const auto b = build_benchmark(BenchmarkId::Cs1Stoch);
  const auto s = InputSchedule::cs1_weekday();
  const auto e = monte_carlo(*b.discrete, kX0, s, b.law, 1, 17, 30);
  EXPECT_EQ(e.traces[0].states, simulate(*b.discrete, kX0, s, b.law, 17, 30).states);
  EXPECT_THROW(monte_carlo(*b.discrete, kX0, s, b.law, 0, 17, 30), Error);
}

TEST(MonteCarlo, DeterministicEnsembleHasNoSpread) {
  const auto m = cs1(BenchmarkId::Cs1Det);
  const auto e = monte_carlo(m, kX0, InputSchedule::cs1_weekday(), DisturbanceLaw::none(), 100, 3, 24);
  EXPECT_EQ(e.summary.stddev.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MonteCarlo, StochasticMeanTracksDeterministic) {
  const auto b = build_benchmark(BenchmarkId::Cs1Stoch);
  const auto det = cs1(BenchmarkId::Cs1Det);
  const auto s = InputSchedule::cs1_weekday();
  const std::size_t n = 10'000, K = 24;
  const auto e = monte_carlo(*b.discrete, kX0, s, b.law, n, 2024, K);
  const auto ref = simulate(det, kX0, s, DisturbanceLaw::none(), 0, K);
  // state covariance P_{k+1} = A P_k A' + Sigma Sigma'; 4-sigma band on the mean over ~100 checks
  const auto& A = b.discrete->A;
  const Eigen::MatrixXd SS = b.discrete->Sigma * b.discrete->Sigma.transpose();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(4, 4);
  for (std::size_t k = 0; k <= K; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double band = 4.0 * std::sqrt(P(i, i) / static_cast<double>(n)) + 1e-12;
      EXPECT_LE(std::abs(e.summary.mean(r, i) - ref.states(r, i)), band) << "k=" << k << " i=" << i;
    }
    P = A * P * A.transpose() + SS;
  }
}

TEST(Rng, CounterStreamsAreKeyed) {
  CounterRng a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
  EXPECT_EQ(a(), b());
  EXPECT_NE(CounterRng(1, 2, 3)(), c());
}
