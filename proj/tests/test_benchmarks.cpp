#include <gtest/gtest.h>

#include <charconv>
#include <sstream>

#include "basbench/benchmarks.hpp"
#include "basbench/io.hpp"

using namespace basbench;

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const Eigen::MatrixXd& pick(const DiscreteModel& m, const std::string& key, Eigen::MatrixXd& scratch) {
  if (key == "A") return m.A;
  if (key == "B") return m.B;
  if (key == "F") return m.F;
  if (key == "Sigma") return m.Sigma;
  if (key == "C") return m.C;
  scratch = m.Q;
  return scratch;
}

}  // namespace

TEST(Registry, NineIdsRoundTrip) {
  EXPECT_EQ(kAllBenchmarks.size(), 9u);
  for (auto id : kAllBenchmarks) EXPECT_EQ(benchmark_from_string(to_string(id)), id);
}

TEST(Registry, UnknownIdListsValidOnes) {
  try {
    build_benchmark("cs9");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownId);
    EXPECT_NE(std::string(e.what()).find("cs2-abs3"), std::string::npos);
  }
}

TEST(Registry, PrintedEntriesSpotChecks) {
  auto d = *build_benchmark(BenchmarkId::Cs1Det).discrete;
  EXPECT_EQ(d.A(0, 0), 0.6682);
  EXPECT_EQ(d.B(0, 0), 0.1320);
  auto c = *build_benchmark(BenchmarkId::Cs2Full).discrete;
  EXPECT_EQ(c.A(0, 0), 0.9998);
  EXPECT_EQ(c.Q(0), 0.2482);
  EXPECT_EQ(c.n(), 7);
  EXPECT_EQ(c.p(), 6);
  auto s = *build_benchmark(BenchmarkId::Cs1Stoch).discrete;
  EXPECT_EQ(s.Sigma.diagonal(), Eigen::Vector4d(0.0774, 0.0774, 0.3872, 0.3098));
}

TEST(Registry, EveryPrintedEntryIsStoredExactly) {
  for (auto id : kAllBenchmarks) {
    if (id == BenchmarkId::Cs3Hybrid) continue;
    const auto m = *build_benchmark(id).discrete;
    for (const auto& [key, lit] : printed_matrices(id)) {
      Eigen::MatrixXd scratch;
      const auto& M = pick(m, key, scratch);
      ASSERT_EQ(M.rows(), static_cast<Eigen::Index>(lit.size())) << to_string(id) << " " << key;
      for (std::size_t r = 0; r < lit.size(); ++r) {
        ASSERT_EQ(M.cols(), static_cast<Eigen::Index>(lit[r].size()));
        for (std::size_t c = 0; c < lit[r].size(); ++c) {
          const double printed = std::stod(std::string(lit[r][c]));
          EXPECT_EQ(shortest(M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))), shortest(printed))
              << to_string(id) << " " << key << "[" << r << "][" << c << "]";
        }
      }
    }
  }
}

TEST(Registry, JsonRoundTripForEveryDiscreteId) {
  for (auto id : kAllBenchmarks) {
    if (id == BenchmarkId::Cs3Hybrid) continue;
    const auto m = *build_benchmark(id).discrete;
    const auto back = discrete_model_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(back.A, m.A);
    EXPECT_EQ(back.B, m.B);
    EXPECT_EQ(back.F, m.F);
    EXPECT_EQ(back.Q, m.Q);
    EXPECT_EQ(back.Sigma, m.Sigma);
    EXPECT_EQ(back.C, m.C);
    EXPECT_EQ(back.states.names(), m.states.names());
    EXPECT_EQ(back.disturbances.names(), m.disturbances.names());
  }
  auto h = *build_benchmark(BenchmarkId::Cs3Hybrid).hybrid;
  auto hb = hybrid_from_json(to_json(h));
  ASSERT_EQ(hb.modes.size(), h.modes.size());
  for (std::size_t i = 0; i < h.modes.size(); ++i) EXPECT_EQ(hb.modes[i].A, h.modes[i].A);
  EXPECT_EQ(hb.transitions.size(), h.transitions.size());
}

TEST(Registry, Cs1VariantsShareDrift) {
  auto det = *build_benchmark(BenchmarkId::Cs1Det).discrete;
  auto dist = *build_benchmark(BenchmarkId::Cs1Dist).discrete;
  auto sto = *build_benchmark(BenchmarkId::Cs1Stoch).discrete;
  EXPECT_EQ(det.A, sto.A);
  EXPECT_EQ(det.B, sto.B);
  EXPECT_EQ(det.Q, sto.Q);
  EXPECT_EQ(det.A, dist.A);
  EXPECT_EQ(dist.Q, Eigen::Vector4d(3.3378, 2.9106, 13.0207, 10.4166));
}

TEST(Registry, DisturbanceLaws) {
  auto full = build_benchmark(BenchmarkId::Cs2Full);
  EXPECT_EQ(full.law.mean, (Eigen::VectorXd(6) << 9, 15, 500, 500, 35, 35).finished());
  EXPECT_EQ(full.law.stddev, (Eigen::VectorXd(6) << 1, 1, 100, 100, 5, 5).finished());
  auto a4 = build_benchmark(BenchmarkId::Cs2Abs4);
  EXPECT_EQ(a4.discrete->disturbances.names().back(), "T_z2");
  EXPECT_EQ(a4.law.mean(4), 20.0);
  EXPECT_EQ(a4.law.stddev(4), 1.0);
}

TEST(Registry, SteadyStateConstants) {
  EXPECT_EQ(steady_state::T_w, 18.0);
  EXPECT_EQ(steady_state::T_SP, 20.0);
  EXPECT_EQ(steady_state::T_sw_b, 75.0);
  EXPECT_EQ(steady_state::T_rw_r1, 35.0);
  EXPECT_EQ(steady_state::T_rw_r2, 35.0);
}

TEST(Registry, ReferenceTubes) {
  auto md = reference_tube(BenchmarkId::Cs1Det);
  EXPECT_EQ(md.facets(), 32);
  EXPECT_EQ(md.bounds(0), 22.2282);
  EXPECT_EQ(md.directions.row(0), Eigen::RowVector4d(1, 0, 0, 0));
  auto mda = reference_tube(BenchmarkId::Cs1Dist);
  EXPECT_EQ(mda.bounds(0), 22.3242);
  EXPECT_THROW(reference_tube(BenchmarkId::Cs2Full), Error);
}

TEST(SimRel, Lookups) {
  EXPECT_EQ(sim_rel_lookup(1, 1e-2), 0.2854);
  EXPECT_EQ(sim_rel_lookup(4, 1.0), 0.0008);
  EXPECT_EQ(sim_rel_lookup(3, std::pow(10.0, -2.5)), 0.3065);
  EXPECT_EQ(SimRelTable::published().size(), 28u);
  for (const auto& [a, row] : SimRelTable::published().entries()) {
    for (double e : row) EXPECT_GE(e, 0.0);
  }
  try {
    sim_rel_lookup(1, 1e-4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingKey);
  }
  EXPECT_THROW(sim_rel_lookup(5, 1.0), Error);
}

TEST(MeasuredTraces, TwoRows) {
  std::istringstream in("t_min,T_z1[degC]\n0,20.1\n1,20.2\n");
  auto tr = parse_trace_csv(read_csv(in));
  EXPECT_EQ(tr.size(), 2u);
  EXPECT_EQ(tr.channels, std::vector<std::string>{"T_z1"});
  ASSERT_TRUE(tr.units[0]);
  EXPECT_EQ(*tr.units[0], Unit::Celsius);
}

TEST(MeasuredTraces, NonMonotoneTimestamps) {
  std::istringstream in("t_min,T_z1\n0,20\n2,20\n1,20\n");
  EXPECT_THROW(parse_trace_csv(read_csv(in)), Error);
}

TEST(MeasuredTraces, UnknownUnitAndMalformedRow) {
  std::istringstream bad_unit("t_min,T_z1[kelvin]\n0,293\n");
  EXPECT_THROW(parse_trace_csv(read_csv(bad_unit)), Error);
  std::istringstream bad_row("t_min,T_z1\n0,20\n1\n");
  EXPECT_THROW(read_csv(bad_row), Error);
}

TEST(MeasuredTraces, TwoDaysOfMinuteSamples) {
  std::ostringstream os;
  os << "t_min,T_z1,T_z2\n";
  for (int k = 0; k < 2880; ++k) os << k << ",20,21\n";
  std::istringstream in(os.str());
  auto tr = parse_trace_csv(read_csv(in));
  EXPECT_EQ(tr.size(), 2880u);
  EXPECT_DOUBLE_EQ(tr.span_minutes() + 1.0, 2.0 * 24 * 60);
}
