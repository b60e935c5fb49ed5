#include <gtest/gtest.h>

#include <random>

#include "basbench/benchmarks.hpp"
#include "basbench/reach.hpp"

using namespace basbench;

namespace {

const Eigen::Vector4d kX0(18.0, 18.0, 35.0, 35.0);

Box scalar_box(double lo, double hi) { return Box(Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)); }

}  // namespace

TEST(Octagon, OrderAndCount) {
  const auto D = octagon_directions(4);
  ASSERT_EQ(D.rows(), 32);
  EXPECT_EQ(D.row(0), Eigen::RowVector4d(1, 0, 0, 0));
  EXPECT_EQ(D.row(4), Eigen::RowVector4d(-1, 0, 0, 0));
  EXPECT_EQ(D.row(8), Eigen::RowVector4d(1, 1, 0, 0));
  EXPECT_EQ(D.row(11), Eigen::RowVector4d(1, -1, 0, 0));
  EXPECT_EQ(D.row(14), Eigen::RowVector4d(-1, 1, 0, 0));
  EXPECT_EQ(D.row(31), Eigen::RowVector4d(0, 0, -1, -1));
}

TEST(Support, BoxClosedForm) {
  Box b(Eigen::Vector2d(-1, 2), Eigen::Vector2d(3, 5));
  EXPECT_DOUBLE_EQ(support(b, Eigen::Vector2d(1, -1)), 3 - 2);
  EXPECT_DOUBLE_EQ(support(b, Eigen::Vector2d(-2, 1)), 2 + 5);
}

TEST(Support, PolytopeAgreesWithBox) {
  Box b(Eigen::Vector3d(-1, 0, 2), Eigen::Vector3d(1, 4, 3));
  const auto p = template_hull(b, octagon_directions(3));
  std::mt19937 gen(2);
  std::normal_distribution<double> N(0, 1);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d d(N(gen), N(gen), N(gen));
    EXPECT_NEAR(support(p, d), support(b, d), 1e-9);
  }
}

TEST(Support, UnboundedAndEmpty) {
  TemplatePolytope half{Eigen::RowVector2d(1, 0), Eigen::VectorXd::Constant(1, 1.0)};
  try {
    support(half, Eigen::Vector2d(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unbounded);
  }
  TemplatePolytope empty{(Eigen::MatrixXd(2, 1) << 1, -1).finished(), Eigen::Vector2d(0, -1)};
  try {
    support(empty, Eigen::VectorXd::Constant(1, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(ReachStep, PointImage) {
  const auto m = *build_benchmark(BenchmarkId::Cs1Det).discrete;
  const auto D = octagon_directions(4);
  const auto p = reach_step(Box::point(kX0), m, scalar_box(20, 20), Box::empty_space(), D);
  EXPECT_NEAR(p.bounds(0), 19.0252, 1e-3);
  const Eigen::Vector4d img = m.A * kX0 + m.B * 20.0 + m.Q;
  for (Eigen::Index i = 0; i < D.rows(); ++i) EXPECT_NEAR(p.bounds(i), D.row(i).dot(img), 1e-12);
}

TEST(ReachStep, InputIntervalUsesUpperCorner) {
  const auto m = *build_benchmark(BenchmarkId::Cs1Det).discrete;
  const auto p = reach_step(Box::point(kX0), m, scalar_box(15, 22), Box::empty_space(), octagon_directions(4));
  EXPECT_NEAR(p.bounds(0), 0.6682 * 18 + 0.02632 * 35 + 0.1320 * 22 + 3.4364, 1e-12);
}

TEST(ReachStep, RejectsStochasticModel) {
  const auto m = *build_benchmark(BenchmarkId::Cs1Stoch).discrete;
  try {
    reach_step(Box::point(kX0), m, scalar_box(15, 22), Box::empty_space(), octagon_directions(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stochastic"), std::string::npos);
  }
}

TEST(ReachTube, ZeroHorizonIsHull) {
  const auto m = *build_benchmark(BenchmarkId::Cs1Det).discrete;
  Box X0(kX0 - Eigen::Vector4d::Constant(0.5), kX0 + Eigen::Vector4d::Constant(0.5));
  const auto rt = reach_tube(m, X0, scalar_box(15, 22), Box::empty_space(), 0, octagon_directions(4));
  ASSERT_EQ(rt.steps.size(), 1u);
  EXPECT_TRUE(rt.tube.bounds.isApprox(template_hull(X0, octagon_directions(4)).bounds));
}

TEST(ReachTube, InsideReferenceTubes) {
  for (auto id : {BenchmarkId::Cs1Det, BenchmarkId::Cs1Dist}) {
    const auto b = build_benchmark(id);
    const Box D = b.disturbance_set.value_or(Box::empty_space());
    const auto rt = reach_tube(*b.discrete, Box::point(kX0), *b.input_set, D, 6, octagon_directions(4));
    const auto margins = facet_margins(rt.tube, reference_tube(id));
    for (Eigen::Index i = 0; i < margins.size(); ++i) EXPECT_GE(margins(i), -1e-2) << to_string(id) << " facet " << i;
  }
}

TEST(ReachTube, MatchesIteratedSteps) {
  const auto b = build_benchmark(BenchmarkId::Cs1Det);
  const auto D = octagon_directions(4);
  const auto rt = reach_tube(*b.discrete, Box::point(kX0), *b.input_set, Box::empty_space(), 3, D);
  // for a point start the first step equals reach_step exactly
  const auto one = reach_step(Box::point(kX0), *b.discrete, *b.input_set, Box::empty_space(), D);
  EXPECT_TRUE(rt.steps[1].bounds.isApprox(one.bounds, 1e-12));
  // iterating through the polytope can only be looser
  const auto two = reach_step(one, *b.discrete, *b.input_set, Box::empty_space(), D);
  EXPECT_TRUE(((two.bounds - rt.steps[2].bounds).array() >= -1e-9).all());
}

TEST(ReachTube, SampledTrajectoriesContained) {
  const auto b = build_benchmark(BenchmarkId::Cs1Det);
  const auto& m = *b.discrete;
  const auto rt = reach_tube(m, Box::point(kX0), *b.input_set, Box::empty_space(), 6, octagon_directions(4));
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> U(15.0, 22.0);
  for (int s = 0; s < 10'000; ++s) {
    Eigen::VectorXd x = kX0;
    for (int k = 1; k <= 6; ++k) {
      x = m.A * x + m.B * U(gen) + m.Q;
      ASSERT_TRUE(check_containment(x, rt.steps[static_cast<std::size_t>(k)], 1e-9).inside);
    }
  }
}

TEST(ReachTube, MonotoneInSets) {
  const auto b = build_benchmark(BenchmarkId::Cs1Det);
  const auto D = octagon_directions(4);
  const auto small = reach_tube(*b.discrete, Box::point(kX0), scalar_box(16, 20), Box::empty_space(), 6, D);
  const auto wideU = reach_tube(*b.discrete, Box::point(kX0), scalar_box(15, 22), Box::empty_space(), 6, D);
  Box X0(kX0 - Eigen::Vector4d::Constant(1), kX0 + Eigen::Vector4d::Constant(1));
  const auto wideX = reach_tube(*b.discrete, X0, scalar_box(16, 20), Box::empty_space(), 6, D);
  EXPECT_TRUE(((wideU.tube.bounds - small.tube.bounds).array() >= -1e-12).all());
  EXPECT_TRUE(((wideX.tube.bounds - small.tube.bounds).array() >= -1e-12).all());
}

TEST(ReachStep, BoundsAreAttainedByCorners) {
  const auto m = *build_benchmark(BenchmarkId::Cs1Det).discrete;
  Box X(kX0 - Eigen::Vector4d(1, 0.5, 2, 1), kX0 + Eigen::Vector4d(0.5, 1, 1, 2));
  const Box U = scalar_box(15, 22);
  const auto D = octagon_directions(4);
  const auto p = reach_step(X, m, U, Box::empty_space(), D);
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    const Eigen::Vector4d d = D.row(i).transpose();
    const Eigen::Vector4d g = m.A.transpose() * d;
    Eigen::Vector4d x;
    for (int j = 0; j < 4; ++j) x(j) = g(j) >= 0 ? X.hi(j) : X.lo(j);
    const double u = (m.B.transpose() * d)(0) >= 0 ? 22.0 : 15.0;
    const Eigen::Vector4d img = m.A * x + m.B * u + m.Q;
    EXPECT_NEAR(d.dot(img), p.bounds(i), 1e-9);
  }
}

TEST(Containment, ReferencePolytope) {
  const auto md = reference_tube(BenchmarkId::Cs1Det);
  EXPECT_TRUE(check_containment(Eigen::Vector4d(19.0252, 18.7588, 31.0122, 31.8098), md).inside);
  const auto c = check_containment(Eigen::Vector4d(25, 18.7588, 31.0122, 31.8098), md);
  EXPECT_FALSE(c.inside);
  EXPECT_EQ(c.worst_facet, 0);
  EXPECT_NEAR(c.margin, 22.2282 - 25, 1e-12);
  Trace empty;
  empty.states.resize(0, 4);
  EXPECT_TRUE(check_containment(empty, md).inside);
}
