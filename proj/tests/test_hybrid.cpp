#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "basbench/hybrid.hpp"

using namespace basbench;

namespace {

std::vector<std::string> names(const HybridAutomaton& ha, const std::vector<std::size_t>& seq) {
  std::vector<std::string> out;
  for (auto q : seq) out.push_back(ha.modes[q].name);
  return out;
}

}  // namespace

TEST(Modes, FieldsAtSteadyState) {
  const auto ha = build_hybrid_cs3();
  const auto& off = ha.modes[ha.mode_index("(O,-)")];
  EXPECT_NEAR(off.field(Eigen::Vector2d(20, 20))(0), 0.0245, 1e-12);
  EXPECT_NEAR(off.b(0) / -off.A(0, 0), 22.112, 1e-3);
  const auto& hcl = ha.modes[ha.mode_index("(H,Cl)")];
  EXPECT_EQ(hcl.b(1), 0.0);
  EXPECT_THROW(ha.mode_index("(X,Y)"), Error);
}

TEST(Modes, UnorderedOffsetsRejected) {
  HybridParams p;
  p.delta2 = 0.5;
  EXPECT_THROW(build_hybrid_cs3(p), Error);
  p = {};
  p.delta = 0.0;
  p.delta2 = 0.5;
  EXPECT_THROW(build_hybrid_cs3(p), Error);
}

TEST(Integrate, ColdStartLadder) {
  const auto ha = build_hybrid_cs3();
  const auto tr = integrate(ha, Eigen::Vector2d(15, 15), ha.initial, 200.0);
  const std::vector<std::string> expect{"(O,-)", "(H,Op)", "(M,Op)", "(O,-)"};
  EXPECT_EQ(names(ha, tr.mode_sequence()), expect);
  ASSERT_EQ(tr.events.size(), 3u);
  EXPECT_EQ(tr.events[0].t, 0.0);
  EXPECT_GT(tr.events[1].t, 0.0);
  EXPECT_LT(tr.events[1].t, tr.events[2].t);
  // every event lands on its threshold
  for (const auto& e : tr.events) {
    const auto it = std::find_if(tr.samples.begin(), tr.samples.end(),
                                 [&](const HybridSample& s) { return s.t == e.t && s.mode == e.target; });
    ASSERT_NE(it, tr.samples.end());
    if (e.t > 0.0) EXPECT_TRUE(std::abs(it->x(0) - 17.0) < 1e-4 || std::abs(it->x(0) - 18.0) < 1e-4);
  }
  EXPECT_TRUE(tr.diagnostics.empty());
}

TEST(Integrate, WarmStartStaysOff) {
  const auto ha = build_hybrid_cs3();
  const auto tr = integrate(ha, Eigen::Vector2d(20, 20), ha.initial, 300.0);
  EXPECT_TRUE(tr.events.empty());
  for (const auto& s : tr.samples) {
    EXPECT_EQ(s.mode, ha.initial);
    EXPECT_GE(s.x(0), 19.0);
    EXPECT_LE(s.x(0), 22.2);
  }
}

TEST(Integrate, ClosedFormInOffMode) {
  const auto ha = build_hybrid_cs3();
  const auto& m = ha.modes[ha.initial];
  const double a = m.A(0, 0), b = m.b(0), eq = -b / a;
  const auto tr = integrate(ha, Eigen::Vector2d(20, 20), ha.initial, 120.0);
  for (const auto& s : tr.samples) EXPECT_NEAR(s.x(0), eq + (20.0 - eq) * std::exp(a * s.t), 1e-6);
}

TEST(Integrate, ZeroHorizon) {
  const auto ha = build_hybrid_cs3();
  const auto tr = integrate(ha, Eigen::Vector2d(20, 20), ha.initial, 0.0);
  ASSERT_EQ(tr.samples.size(), 1u);
  EXPECT_EQ(tr.samples[0].x, Eigen::Vector2d(20, 20));
  EXPECT_THROW(integrate(ha, Eigen::Vector2d(5, 20), ha.initial, 1.0), Error);
  EXPECT_THROW(integrate(ha, Eigen::Vector2d(20, 20), ha.initial, 1.0, 0.0), Error);
}

TEST(Integrate, ContinuousAcrossJumps) {
  const auto ha = build_hybrid_cs3();
  const auto tr = integrate(ha, Eigen::Vector2d(15, 15), ha.initial, 200.0);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const double dt = tr.samples[i].t - tr.samples[i - 1].t;
    EXPECT_GE(dt, 0.0);
    EXPECT_LE((tr.samples[i].x - tr.samples[i - 1].x).cwiseAbs().maxCoeff(), 0.2 * dt + 1e-12);
  }
}

TEST(Integrate, Deterministic) {
  const auto ha = build_hybrid_cs3();
  const auto a = integrate(ha, Eigen::Vector2d(15, 16), ha.initial, 150.0);
  const auto b = integrate(ha, Eigen::Vector2d(15, 16), ha.initial, 150.0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].x, b.samples[i].x);
}

TEST(Integrate, StepRefinementMovesEventsLittle) {
  const auto ha = build_hybrid_cs3();
  const auto coarse = integrate(ha, Eigen::Vector2d(15, 15), ha.initial, 200.0, 0.01);
  const auto fine = integrate(ha, Eigen::Vector2d(15, 15), ha.initial, 200.0, 0.005);
  ASSERT_EQ(coarse.events.size(), fine.events.size());
  for (std::size_t i = 0; i < coarse.events.size(); ++i) {
    EXPECT_LT(std::abs(coarse.events[i].t - fine.events[i].t), 10 * 0.01);
  }
}

TEST(Integrate, RecirculationBranch) {
  HybridParams p;
  p.recirculation = true;
  const auto ha = build_hybrid_cs3(p);
  const auto tr = integrate(ha, Eigen::Vector2d(16.5, 16.5), ha.initial, 50.0);
  ASSERT_FALSE(tr.events.empty());
  EXPECT_EQ(ha.modes[tr.events[0].target].name, "(M,Cl)");
}

TEST(Flowpipe, ContainsSampledTrajectories) {
  const auto ha = build_hybrid_cs3();
  const Box X0(Eigen::Vector2d(15.0, 15.0), Eigen::Vector2d(15.5, 15.5));
  const double h = 0.05, T = 60.0;
  const auto fp = box_flowpipe(ha, X0, ha.initial, T, h);
  const auto nsteps = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
  std::vector<std::vector<const FlowpipeSegment*>> by_step(nsteps);
  for (const auto& s : fp.segments) {
    by_step[std::min(nsteps - 1, static_cast<std::size_t>(std::llround(s.t_lo / h)))].push_back(&s);
  }
  for (const auto& s : fp.segments) {
    EXPECT_TRUE(ha.bounds.contains(s.box.lo));
    EXPECT_TRUE(ha.bounds.contains(s.box.hi));
  }
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> U(0.0, 0.5);
  for (int n = 0; n < 1000; ++n) {
    const Eigen::Vector2d x0(15.0 + U(gen), 15.0 + U(gen));
    const auto tr = integrate(ha, x0, ha.initial, T, 0.01);
    for (std::size_t i = 1; i < tr.samples.size(); i += 7) {
      const auto& smp = tr.samples[i];
      const auto k = std::min(nsteps - 1, static_cast<std::size_t>(smp.t / h));
      bool hit = false;
      for (std::size_t kk = (k ? k - 1 : 0); kk <= std::min(nsteps - 1, k + 1) && !hit; ++kk) {
        for (const auto* s : by_step[kk]) {
          if (s->mode != smp.mode || smp.t < s->t_lo - 1e-9 || smp.t > s->t_hi + 1e-9) continue;
          if (((smp.x - s->box.lo).array() >= -1e-9).all() && ((s->box.hi - smp.x).array() >= -1e-9).all()) {
            hit = true;
            break;
          }
        }
      }
      ASSERT_TRUE(hit) << "sample " << n << " t=" << smp.t;
    }
  }
}

TEST(Flowpipe, PointStartStaysThin) {
  const auto ha = build_hybrid_cs3();
  const Eigen::Vector2d x0(20, 20);
  const auto fp = box_flowpipe(ha, Box::point(x0), ha.initial, 10.0, 0.01);
  const auto tr = integrate(ha, x0, ha.initial, 10.0, 0.01);
  ASSERT_EQ(fp.segments.size(), 1000u);
  for (std::size_t k = 0; k < fp.segments.size(); ++k) {
    const auto& s = fp.segments[k];
    EXPECT_LT(s.box.width().maxCoeff(), 1e-3);
    EXPECT_TRUE(((tr.samples[k + 1].x - s.box.lo).array() >= -1e-9).all());
    EXPECT_TRUE(((s.box.hi - tr.samples[k + 1].x).array() >= -1e-9).all());
  }
  EXPECT_TRUE(fp.warnings.empty());
}

TEST(Json, HybridRoundTrip) {
  HybridParams p;
  p.recirculation = true;
  const auto ha = build_hybrid_cs3(p);
  const auto back = hybrid_from_json(nlohmann::json::parse(to_json(ha).dump()));
  ASSERT_EQ(back.transitions.size(), ha.transitions.size());
  for (std::size_t i = 0; i < ha.transitions.size(); ++i) {
    ASSERT_EQ(back.transitions[i].guard.size(), ha.transitions[i].guard.size());
    for (std::size_t g = 0; g < ha.transitions[i].guard.size(); ++g) {
      EXPECT_EQ(back.transitions[i].guard[g].threshold, ha.transitions[i].guard[g].threshold);
    }
  }
  EXPECT_THROW(hybrid_from_json(nlohmann::json::parse(R"({"variables":["a"]})")), Error);
}
