#pragma once

// Registry of the printed case-study models. Matrices are kept as the
// decimal literals they were published with and parsed on construction.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "basbench/discretize.hpp"
#include "basbench/error.hpp"
#include "basbench/hybrid.hpp"
#include "basbench/io.hpp"
#include "basbench/reach.hpp"
#include "basbench/simulate.hpp"

namespace basbench {

enum class BenchmarkId { Cs1Det, Cs1Dist, Cs1Stoch, Cs2Full, Cs2Abs4, Cs2Abs3, Cs2Abs2, Cs2Abs1, Cs3Hybrid };

inline constexpr std::array<BenchmarkId, 9> kAllBenchmarks = {
    BenchmarkId::Cs1Det,  BenchmarkId::Cs1Dist, BenchmarkId::Cs1Stoch, BenchmarkId::Cs2Full,  BenchmarkId::Cs2Abs4,
    BenchmarkId::Cs2Abs3, BenchmarkId::Cs2Abs2, BenchmarkId::Cs2Abs1,  BenchmarkId::Cs3Hybrid};

inline std::string_view to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Cs1Det: return "cs1-det";
    case BenchmarkId::Cs1Dist: return "cs1-dist";
    case BenchmarkId::Cs1Stoch: return "cs1-stoch";
    case BenchmarkId::Cs2Full: return "cs2-full";
    case BenchmarkId::Cs2Abs4: return "cs2-abs4";
    case BenchmarkId::Cs2Abs3: return "cs2-abs3";
    case BenchmarkId::Cs2Abs2: return "cs2-abs2";
    case BenchmarkId::Cs2Abs1: return "cs2-abs1";
    case BenchmarkId::Cs3Hybrid: return "cs3-hybrid";
  }
  return "?";
}

inline BenchmarkId benchmark_from_string(std::string_view s) {
  std::string valid;
  for (auto id : kAllBenchmarks) {
    if (to_string(id) == s) return id;
    valid += (valid.empty() ? "" : ", ") + std::string(to_string(id));
  }
  throw Error(ErrorCode::UnknownId, "unknown benchmark '" + std::string(s) + "' (valid: " + valid + ")");
}

/// Constants shared by the first case study.
namespace steady_state {
inline constexpr double T_w = 18.0;
inline constexpr double T_SP = 20.0;
inline constexpr double T_sw_b = 75.0;
inline constexpr double T_z1 = 20.0;
inline constexpr double T_z2 = 20.0;
inline constexpr double T_rw_r1 = 35.0;
inline constexpr double T_rw_r2 = 35.0;
}  // namespace steady_state

using LiteralMatrix = std::vector<std::vector<std::string_view>>;

/// Printed matrices of a discrete benchmark, keyed "A", "B", "F", "Q",
/// "Sigma", "C". Vectors are single-column matrices.
inline std::map<std::string, LiteralMatrix> printed_matrices(BenchmarkId id) {
  const LiteralMatrix cs1_A = {{"0.6682", "0", "0.02632", "0"},
                               {"0", "0.6830", "0", "0.02096"},
                               {"1.0005", "0", "-0.000499", "0"},
                               {"0", "0.8004", "0", "0.1996"}};
  const LiteralMatrix cs1_B = {{"0.1320"}, {"0.1402"}, {"0"}, {"0"}};
  const LiteralMatrix cs1_C = {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}};
  const LiteralMatrix cs1_Qd = {{"3.4364"}, {"2.9272"}, {"13.0207"}, {"10.4166"}};
  switch (id) {
    case BenchmarkId::Cs1Det:
      return {{"A", cs1_A}, {"B", cs1_B}, {"Q", cs1_Qd}, {"C", cs1_C}};
    case BenchmarkId::Cs1Dist:
      return {{"A", cs1_A},
              {"B", cs1_B},
              {"F", {{"8.760e-06", "0"}, {"0", "2.704e-07"}, {"0", "0"}, {"0", "0"}}},
              {"Q", {{"3.3378"}, {"2.9106"}, {"13.0207"}, {"10.4166"}}},
              {"C", cs1_C}};
    case BenchmarkId::Cs1Stoch:
      return {{"A", cs1_A},
              {"B", cs1_B},
              {"Q", cs1_Qd},
              {"Sigma",
               {{"0.0774", "0", "0", "0"}, {"0", "0.0774", "0", "0"}, {"0", "0", "0.3872", "0"}, {"0", "0", "0", "0.3098"}}},
              {"C", cs1_C}};
    case BenchmarkId::Cs2Full:
      return {{"A",
               {{"0.9998", "6.54e-9", "2.23e-5", "2.23e-5", "2.23e-5", "4.88e-14", "4.88e-14"},
                {"5.739e-9", "0.9998", "4.27e-14", "4.27e-14", "2.23e-5", "2.23e-5", "2.23e-5"},
                {"0.0005", "1.27e-12", "0.9989", "6.54e-9", "6.54e-9", "7.13e-18", "7.13e-18"},
                {"0.0005", "1.27e-12", "6.54e-9", "0.9989", "6.54e-9", "7.13e-18", "7.13e-18"},
                {"0.00051", "0.00058", "5.73e-9", "5.73e-9", "0.9989", "6.54e-9", "6.54e-9"},
                {"1.11e-12", "0.00058", "6.25e-18", "6.25e-18", "6.54e-9", "0.9989", "6.54e-9"},
                {"1.11e-12", "0.00058", "6.25e-18", "6.25e-18", "6.54e-9", "6.54e-9", "0.9980"}}},
              {"B", {{"0.000122"}, {"0.000122"}, {"3.58e-8"}, {"3.58e-8"}, {"6.72e-8"}, {"3.58e-8"}, {"3.58e-8"}}},
              {"F",
               {{"1.027e-8", "5.734e-9", "7.31e-9", "2.71e-15", "0.0013", "0.0014"},
                {"1.91e-7", "5.73e-9", "1.39e-17", "1.24e-6", "0.0021", "0.0022"},
                {"2.00e-12", "0.0005", "2.13e-12", "3.96e-19", "3.84e-7", "3.84e-7"},
                {"0.0009", "1.11e-12", "2.13e-12", "3.96e-19", "3.84e-7", "3.84e-7"},
                {"3.90e-11", "2.09e-12", "1.87e-12", "3.63e-10", "9.78e-7", "9.78e-7"},
                {"3.72e-11", "0.00051", "2.042e-21", "3.63e-10", "6.41e-7", "6.41e-7"},
                {"0.01708", "1.11e-12", "2.04e-21", "3.63e-10", "6.40e-7", "6.41e-7"}}},
              {"Q", {{"0.2482"}, {"-0.0055"}, {"0.1270"}, {"0.0201"}, {"0.0145"}, {"0.0144"}, {"0.0145"}}},
              {"C", {{"1", "0", "0", "0", "0", "0", "0"}}}};
    case BenchmarkId::Cs2Abs4:
      return {{"A",
               {{"0.9998", "2.23e-5", "2.23e-5", "2.23e-5"},
                {"0.00058", "0.9989", "6.54e-9", "6.54e-9"},
                {"0.00058", "6.54e-9", "0.9989", "6.54e-9"},
                {"0.00051", "5.73e-9", "5.73e-9", "0.9989"}}},
              {"B", {{"0.00012"}, {"3.5859e-8"}, {"3.5859e-8"}, {"3.1424e-8"}}},
              {"F",
               {{"1.02e-8", "5.73e-9", "7.31e-9", "0.0013", "6.54e-9"},
                {"2.00e-12", "0.0005", "2.13e-12", "3.84e-7", "1.27e-12"},
                {"0.0009", "1.11e-12", "2.13e-12", "3.84e-7", "1.27e-12"},
                {"1.75e-12", "9.79e-13", "1.87e-12", "3.37e-7", "0.00058"}}},
              {"Q", {{"0.2482"}, {"0.1270"}, {"0.0145"}, {"0.0145"}}},
              {"C", {{"1", "0", "0", "0"}}}};
    case BenchmarkId::Cs2Abs3:
      return {{"A", {{"0.9998", "2.23e-5", "2.23e-5"}, {"0.00058", "0.9989", "6.54e-9"}, {"0.00058", "6.54e-9", "0.9980"}}},
              {"B", {{"0.000122"}, {"0.000122"}, {"3.58e-8"}}},
              {"F",
               {{"6.29e-9", "5.73e-9", "7.31e-9", "0.0013"},
                {"1.22e-12", "0.00051", "2.13e-12", "3.84e-7"},
                {"0.00056", "1.11e-12", "2.13e-12", "3.84e-7"}}},
              {"Q", {{"0.2482"}, {"0.1270"}, {"0.0145"}}},
              {"C", {{"1", "0", "0"}}}};
    case BenchmarkId::Cs2Abs2:
      return {{"A", {{"0.9998", "2.237e-5"}, {"0.00058", "0.9989"}}},
              {"B", {{"0.00012"}, {"3.58e-8"}}},
              {"F", {{"1.027e-8", "7.31e-9", "0.0013"}, {"0.00091", "2.13e-12", "3.84e-7"}}},
              {"Q", {{"0.2482"}, {"0.1270"}}},
              {"C", {{"1", "0"}}}};
    case BenchmarkId::Cs2Abs1:
      return {{"A", {{"0.9998"}}},
              {"B", {{"0.000122"}}},
              {"F", {{"6.31e-5", "7.31e-9", "0.0013"}}},
              {"Q", {{"0.2482"}}},
              {"C", {{"1"}}}};
    case BenchmarkId::Cs3Hybrid:
      break;
  }
  return {};
}

/// Reference reach tubes as printed, bounds in octagon_directions(4) order
/// over (T_z1, T_z2, T_rw_r1, T_rw_r2).
inline std::vector<std::string_view> printed_tube_bounds(BenchmarkId id) {
  if (id == BenchmarkId::Cs1Det) {
    return {"22.2282", "22",       "40",      "40",       "-10.0899", "-5.40334", "105.958", "-11.1481",
            "44",      "62",       "62",      "9.40198",  "116.097",  "1.12788",  "7",       "25",
            "25",      "-15.4932", "95.8203", "-21.238",  "62",       "62",       "114.105", "-5.50237",
            "25",      "25",       "100.555", "-16.5515", "80",       "10",       "126.441", "94.8101"};
  }
  if (id == BenchmarkId::Cs1Dist) {
    return {"22.3242", "22",       "40",      "40",       "-10.1225", "-5.38875", "109.275", "-11.1512",
            "44",      "62",       "62",      "9.50273",  "119.446",  "1.20718",  "7",       "25",
            "25",      "-15.5113", "99.1041", "-21.2737", "62",       "62",       "117.336", "-5.51993",
            "25",      "25",       "103.886", "-16.5399", "80",       "10",       "129.684", "98.1239"};
  }
  return {};
}

inline TemplatePolytope reference_tube(BenchmarkId id) {
  const auto lits = printed_tube_bounds(id);
  if (lits.empty()) throw Error(ErrorCode::MissingKey, "no reference tube for " + std::string(to_string(id)));
  TemplatePolytope p{octagon_directions(4), Eigen::VectorXd(static_cast<Eigen::Index>(lits.size()))};
  for (std::size_t i = 0; i < lits.size(); ++i) p.bounds(static_cast<Eigen::Index>(i)) = parse_double(std::string(lits[i]));
  return p;
}

namespace detail {

inline Eigen::MatrixXd parse_literal(const LiteralMatrix& lit) {
  const auto rows = static_cast<Eigen::Index>(lit.size());
  const auto cols = rows ? static_cast<Eigen::Index>(lit.front().size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = parse_double(std::string(lit[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
    }
  }
  return m;
}

inline std::vector<Channel> celsius(std::initializer_list<const char*> names) {
  std::vector<Channel> out;
  for (const char* n : names) out.push_back({n, Unit::Celsius});
  return out;
}

}  // namespace detail

struct Benchmark {
  BenchmarkId id = BenchmarkId::Cs1Det;
  std::optional<DiscreteModel> discrete;
  std::optional<HybridAutomaton> hybrid;
  /// Disturbance law for simulation (empty for disturbance-free models).
  DisturbanceLaw law = DisturbanceLaw::none();
  /// Admissible input set.
  std::optional<Box> input_set;
  /// Bounding box of the disturbances for set-based analysis.
  std::optional<Box> disturbance_set;
  /// Default initial state.
  Eigen::VectorXd x0;
};

inline Benchmark build_benchmark(BenchmarkId id) {
  Benchmark b;
  b.id = id;
  if (id == BenchmarkId::Cs3Hybrid) {
    b.hybrid = build_hybrid_cs3();
    b.x0 = Eigen::Vector2d(15.0, 15.0);
    return b;
  }
  const auto lit = printed_matrices(id);
  DiscreteModel m;
  m.id = std::string(to_string(id));
  m.delta_minutes = 15.0;

  const bool cs1 = id == BenchmarkId::Cs1Det || id == BenchmarkId::Cs1Dist || id == BenchmarkId::Cs1Stoch;
  std::vector<Channel> dist;
  if (cs1) {
    m.states = ChannelSpace(detail::celsius({"T_z1", "T_z2", "T_rw_r1", "T_rw_r2"}));
    if (id == BenchmarkId::Cs1Dist) {
      dist = {{"CO2_1", Unit::Ppm}, {"CO2_2", Unit::Ppm}};
      b.law = {Eigen::Vector2d(500.0, 500.0), Eigen::Vector2d(100.0, 100.0)};
      b.disturbance_set = Box(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1000.0, 1000.0));
    }
    b.input_set = Box(Eigen::VectorXd::Constant(1, 15.0), Eigen::VectorXd::Constant(1, 22.0));
    b.x0 = Eigen::Vector4d(18.0, 18.0, 35.0, 35.0);
  } else {
    const Channel t_out{"T_out", Unit::Celsius}, t_hall{"T_hall", Unit::Celsius}, co2_1{"CO2_1", Unit::Ppm},
        co2_2{"CO2_2", Unit::Ppm}, rw1{"T_rw_r1", Unit::Celsius}, rw2{"T_rw_r2", Unit::Celsius},
        tz2{"T_z2", Unit::Celsius};
    std::map<std::string, std::pair<double, double>> laws = {
        {"T_out", {9.0, 1.0}},    {"T_hall", {15.0, 1.0}},  {"CO2_1", {500.0, 100.0}}, {"CO2_2", {500.0, 100.0}},
        {"T_rw_r1", {35.0, 5.0}}, {"T_rw_r2", {35.0, 5.0}}, {"T_z2", {20.0, 1.0}}};
    switch (id) {
      case BenchmarkId::Cs2Full:
        m.states = ChannelSpace(detail::celsius({"T_z1", "T_z2", "T_w5", "T_w6", "T_w2", "T_w3", "T_w7"}));
        dist = {t_out, t_hall, co2_1, co2_2, rw1, rw2};
        break;
      case BenchmarkId::Cs2Abs4:
        m.states = ChannelSpace(detail::celsius({"T_z1", "T_w5", "T_w2", "T_w7"}));
        dist = {t_out, t_hall, co2_1, rw1, tz2};
        break;
      case BenchmarkId::Cs2Abs3:
        m.states = ChannelSpace(detail::celsius({"T_z1", "T_w5", "T_w2"}));
        dist = {t_out, t_hall, co2_1, rw1};
        break;
      case BenchmarkId::Cs2Abs2:
        m.states = ChannelSpace(detail::celsius({"T_z1", "T_w2"}));
        dist = {t_out, co2_1, rw1};
        break;
      default:
        m.states = ChannelSpace(detail::celsius({"T_z1"}));
        dist = {t_out, co2_1, rw1};
        break;
    }
    b.law.mean.resize(static_cast<Eigen::Index>(dist.size()));
    b.law.stddev.resize(static_cast<Eigen::Index>(dist.size()));
    for (std::size_t i = 0; i < dist.size(); ++i) {
      b.law.mean(static_cast<Eigen::Index>(i)) = laws.at(dist[i].name).first;
      b.law.stddev(static_cast<Eigen::Index>(i)) = laws.at(dist[i].name).second;
    }
    b.input_set = Box(Eigen::VectorXd::Constant(1, 15.0), Eigen::VectorXd::Constant(1, 30.0));
    b.x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m.states.size()), 20.0);
  }
  m.inputs = ChannelSpace({Channel{"T_sa", Unit::Celsius}});
  m.disturbances = ChannelSpace(std::move(dist));

  m.A = detail::parse_literal(lit.at("A"));
  m.B = detail::parse_literal(lit.at("B"));
  m.F = lit.count("F") ? detail::parse_literal(lit.at("F")) : Eigen::MatrixXd::Zero(m.n(), 0);
  m.Q = detail::parse_literal(lit.at("Q")).col(0);
  m.Sigma = lit.count("Sigma") ? detail::parse_literal(lit.at("Sigma")) : Eigen::MatrixXd::Zero(m.n(), m.n());
  m.C = detail::parse_literal(lit.at("C"));
  m.validate();
  b.discrete = std::move(m);
  return b;
}

inline Benchmark build_benchmark(std::string_view id) { return build_benchmark(benchmark_from_string(id)); }

// ---------------------------------------------------------------------------
// (epsilon, delta) table of the abstract models

class SimRelTable {
 public:
  /// delta = 10^(-k/2), k = 0..6.
  static constexpr std::array<int, 7> kHalfExponents = {0, 1, 2, 3, 4, 5, 6};

  static const SimRelTable& published() {
    static const SimRelTable t;
    return t;
  }

  double lookup(int order, double delta) const {
    const int k = half_exponent(delta);
    auto it = table_.find(order);
    if (it == table_.end() || k < 0) {
      throw Error(ErrorCode::MissingKey, "no epsilon for abstract order " + std::to_string(order) +
                                             " and delta " + format_double(delta));
    }
    return it->second[static_cast<std::size_t>(k)];
  }

  std::size_t size() const { return table_.size() * kHalfExponents.size(); }

  const std::map<int, std::array<double, 7>>& entries() const { return table_; }

  static double delta_value(int half_exponent) { return std::pow(10.0, -0.5 * half_exponent); }

 private:
  SimRelTable() {
    table_[4] = {0.0008, 0.1754, 0.2084, 0.2339, 0.2555, 0.2745, 0.2910};
    table_[3] = {0.0006, 0.1933, 0.2312, 0.2598, 0.2831, 0.3065, 0.3241};
    table_[2] = {0.0011, 0.1950, 0.2373, 0.2681, 0.2928, 0.3155, 0.3278};
    table_[1] = {0.0010, 0.1953, 0.2371, 0.2595, 0.2854, 0.3103, 0.3254};
  }

  static int half_exponent(double delta) {
    if (!(delta > 0.0)) return -1;
    for (int k : kHalfExponents) {
      if (std::abs(delta / delta_value(k) - 1.0) < 1e-9) return k;
    }
    return -1;
  }

  std::map<int, std::array<double, 7>> table_;
};

inline double sim_rel_lookup(int order, double delta) { return SimRelTable::published().lookup(order, delta); }

// ---------------------------------------------------------------------------
// Measured traces

struct MeasuredTrace {
  std::vector<std::string> channels;
  std::vector<std::optional<Unit>> units;
  Eigen::VectorXd t_min;
  Eigen::MatrixXd values;  // samples x channels

  std::size_t size() const { return static_cast<std::size_t>(t_min.size()); }
  double span_minutes() const { return t_min.size() ? t_min(t_min.size() - 1) - t_min(0) : 0.0; }
};

/// Header: timestamp column, then sensor columns, optionally "name[unit]".
inline MeasuredTrace parse_trace_csv(const CsvTable& table) {
  MeasuredTrace tr;
  if (table.header.size() < 2) {
    throw Error(ErrorCode::ParseError, "trace needs a timestamp column and at least one channel");
  }
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    std::string name = table.header[c];
    std::optional<Unit> unit;
    if (auto open = name.find('['); open != std::string::npos) {
      if (name.back() != ']') throw Error(ErrorCode::ParseError, "malformed unit suffix in '" + name + "'");
      const std::string u = name.substr(open + 1, name.size() - open - 2);
      unit = unit_from_string(u);
      if (!unit) throw Error(ErrorCode::ParseError, "unknown unit '" + u + "' in column '" + name + "'");
      name = name.substr(0, open);
    }
    tr.channels.push_back(name);
    tr.units.push_back(unit);
  }
  const Eigen::MatrixXd m = table.numeric();
  if (!m.allFinite()) throw Error(ErrorCode::ParseError, "trace contains empty or non-finite values");
  tr.t_min = m.col(0);
  tr.values = m.rightCols(m.cols() - 1);
  for (Eigen::Index r = 1; r < tr.t_min.size(); ++r) {
    if (!(tr.t_min(r) > tr.t_min(r - 1))) {
      throw Error(ErrorCode::ParseError, "timestamps are not increasing at data row " + std::to_string(r + 1));
    }
  }
  return tr;
}

inline MeasuredTrace load_trace_csv(const std::string& path) { return parse_trace_csv(read_csv_file(path)); }

}  // namespace basbench
