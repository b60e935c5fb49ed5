#pragma once

// Single-zone switched heating model: per-mode affine ODEs over
// (T_z1, T_sa), threshold guards on T_z1, urgent reset-free jumps.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "basbench/error.hpp"
#include "basbench/reach.hpp"
#include "json.hpp"

namespace basbench {

struct HybridMode {
  std::string name;
  Eigen::Matrix2d A;
  Eigen::Vector2d b;

  Eigen::Vector2d field(const Eigen::Vector2d& x) const { return A * x + b; }
};

enum class Relation { LessEq, GreaterEq };

struct GuardAtom {
  std::size_t variable = 0;
  Relation relation = Relation::LessEq;
  double threshold = 0.0;

  bool holds(const Eigen::Vector2d& x) const {
    const double v = x(static_cast<Eigen::Index>(variable));
    return relation == Relation::LessEq ? v <= threshold : v >= threshold;
  }
};

struct Transition {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<GuardAtom> guard;  // conjunction
  std::string label;

  bool enabled(const Eigen::Vector2d& x) const {
    return std::all_of(guard.begin(), guard.end(), [&](const GuardAtom& a) { return a.holds(x); });
  }
};

struct HybridParams {
  double T_SP = 20.0;
  double delta = 1.0;
  double delta2 = 2.0;
  double delta3 = 3.0;
  double delta4 = 4.0;
  double delta5 = 5.0;
  double T_out = 25.0;
  double T_w_ss = 18.0;
  double m_a_med = 10.0;
  double m_a_high = 15.0;
  double CO2_ss = 500.0;
  // Heating ladder offsets below T_SP:
  //   (O,-) -> (H,Op)  at T_z1 <= T_SP - ladder_enter
  //   (H,Op) -> (M,Op) at T_z1 >= T_SP - ladder_ease
  //   (M,Op) -> (O,-)  at T_z1 >= T_SP - ladder_leave
  std::optional<double> ladder_enter;  // default delta4
  std::optional<double> ladder_ease;   // default delta3
  std::optional<double> ladder_leave;  // default delta2
  /// Adds the closed-mixer branch (M,Cl)/(H,Cl).
  bool recirculation = false;
  Box bounds = Box(Eigen::Vector2d(10.0, 15.0), Eigen::Vector2d(30.0, 30.0));
};

struct HybridAutomaton {
  std::vector<std::string> variables{"T_z1", "T_sa"};
  std::vector<HybridMode> modes;
  std::vector<Transition> transitions;
  Box bounds;
  std::size_t initial = 0;
  HybridParams params;

  std::size_t mode_index(std::string_view name) const {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (modes[i].name == name) return i;
    }
    throw Error(ErrorCode::UnknownMode, "unknown hybrid mode '" + std::string(name) + "'");
  }

  std::vector<const Transition*> enabled(std::size_t mode, const Eigen::Vector2d& x) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions) {
      if (t.source == mode && t.enabled(x)) out.push_back(&t);
    }
    return out;
  }
};

inline HybridAutomaton build_hybrid_cs3(const HybridParams& params = {}) {
  const double ds[] = {params.delta, params.delta2, params.delta3, params.delta4, params.delta5};
  for (int i = 0; i < 4; ++i) {
    if (!(ds[i] < ds[i + 1])) {
      throw Error(ErrorCode::InvalidParameter, "guard offsets must satisfy delta < delta2 < ... < delta5");
    }
  }
  if (!(ds[0] > 0.0)) throw Error(ErrorCode::InvalidParameter, "guard offsets must be positive");

  HybridAutomaton ha;
  ha.params = params;
  ha.bounds = params.bounds;
  auto mode = [](std::string name, double a11, double a12, double a21, double a22, double b1, double b2) {
    HybridMode m{std::move(name), Eigen::Matrix2d(), Eigen::Vector2d(b1, b2)};
    m.A << a11, a12, a21, a22;
    return m;
  };
  ha.modes = {
      mode("(O,-)", -0.0116, 0.0, 0.0183, -0.0183, 0.2565, 0.0),
      mode("(M,Op)", -0.0292, 0.0176, 0.0183, -0.0185, 0.2565, 0.005),
      mode("(M,Cl)", -0.0292, 0.0176, 0.0183, -0.0183, 0.2565, 0.0),
      mode("(H,Op)", -0.038, 0.0264, 0.0183, -0.0186, 0.2565, 0.0076),
      mode("(H,Cl)", -0.038, 0.0264, 0.0186, -0.0186, 0.2565, 0.0),
  };
  const std::size_t off = 0, m_op = 1, m_cl = 2, h_op = 3, h_cl = 4;
  const double sp = params.T_SP;
  const double enter = params.ladder_enter.value_or(params.delta4);
  const double ease = params.ladder_ease.value_or(params.delta3);
  const double leave = params.ladder_leave.value_or(params.delta2);
  auto num = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  auto le = [](double v) { return GuardAtom{0, Relation::LessEq, v}; };
  auto ge = [](double v) { return GuardAtom{0, Relation::GreaterEq, v}; };
  ha.transitions = {
      {off, h_op, {le(sp - enter)}, "T_z1 <= T_SP - " + num(enter)},
      {h_op, m_op, {ge(sp - ease)}, "T_z1 >= T_SP - " + num(ease)},
      {m_op, off, {ge(sp - leave)}, "T_z1 >= T_SP - " + num(leave)},
  };
  if (params.recirculation) {
    GuardAtom above{0, Relation::GreaterEq, sp - params.delta4};
    // Strictly above the (H,Op) entry threshold keeps the guards disjoint.
    above.threshold = std::nextafter(sp - params.delta4, 1e9);
    ha.transitions.push_back({off, m_cl, {above, le(sp - params.delta3)}, "T_SP - delta4 < T_z1 <= T_SP - delta3"});
    ha.transitions.push_back({m_cl, h_cl, {le(sp - params.delta5)}, "T_z1 <= T_SP - delta5"});
    ha.transitions.push_back({h_cl, m_cl, {ge(sp - params.delta3)}, "T_z1 >= T_SP - delta3"});
    ha.transitions.push_back({m_cl, off, {ge(sp - params.delta)}, "T_z1 >= T_SP - delta"});
  }
  ha.initial = off;
  return ha;
}

// ---------------------------------------------------------------------------
// Simulation with event location

struct HybridSample {
  double t = 0.0;
  std::size_t mode = 0;
  Eigen::Vector2d x;
};

struct HybridEvent {
  double t = 0.0;
  std::size_t source = 0;
  std::size_t target = 0;
  std::string guard;
};

struct HybridTrace {
  std::vector<HybridSample> samples;
  std::vector<HybridEvent> events;
  std::vector<std::string> diagnostics;

  std::vector<std::size_t> mode_sequence() const {
    std::vector<std::size_t> seq;
    if (!samples.empty()) seq.push_back(samples.front().mode);
    for (const auto& e : events) seq.push_back(e.target);
    return seq;
  }
};

inline Eigen::Vector2d rk4(const HybridMode& m, const Eigen::Vector2d& x, double h) {
  const Eigen::Vector2d k1 = m.field(x);
  const Eigen::Vector2d k2 = m.field(x + 0.5 * h * k1);
  const Eigen::Vector2d k3 = m.field(x + 0.5 * h * k2);
  const Eigen::Vector2d k4 = m.field(x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4; guard crossings located by bisection to `tolerance`
/// minutes. Guards are urgent: a transition fires as soon as it is enabled.
inline HybridTrace integrate(const HybridAutomaton& ha, const Eigen::Vector2d& x0, std::size_t q0, double horizon,
                             double step = 0.01, double tolerance = 1e-6) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "integration step must be positive");
  if (!(horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be non-negative");
  if (q0 >= ha.modes.size()) throw Error(ErrorCode::UnknownMode, "initial mode out of range");
  if (!ha.bounds.contains(x0)) {
    throw Error(ErrorCode::InvalidArgument, "initial state lies outside the state bounds");
  }
  HybridTrace tr;
  double t = 0.0;
  std::size_t q = q0;
  Eigen::Vector2d x = x0;
  tr.samples.push_back({t, q, x});

  auto fire = [&]() {
    auto en = ha.enabled(q, x);
    if (en.empty()) return false;
    if (en.size() > 1) {
      throw Error(ErrorCode::NonDeterministic, "several transitions enabled in mode " + ha.modes[q].name +
                                                   " at t = " + std::to_string(t));
    }
    tr.events.push_back({t, q, en.front()->target, en.front()->label});
    q = en.front()->target;
    tr.samples.push_back({t, q, x});
    if (!ha.enabled(q, x).empty()) {
      throw Error(ErrorCode::NonDeterministic,
                  "instantaneous chain of jumps from mode " + ha.modes[q].name + " at t = " + std::to_string(t));
    }
    return true;
  };

  fire();
  const auto nsteps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  for (std::size_t k = 0; k < nsteps; ++k) {
    const double t_next = std::min(horizon, static_cast<double>(k + 1) * step);
    double h = t_next - t;
    if (h <= 0.0) continue;
    Eigen::Vector2d x1 = rk4(ha.modes[q], x, h);
    if (!ha.enabled(q, x1).empty()) {
      double lo = 0.0, hi = h;
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (ha.enabled(q, rk4(ha.modes[q], x, mid)).empty()) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      x = rk4(ha.modes[q], x, hi);
      t += hi;
      fire();
      h = t_next - t;
      if (h > 0.0) x1 = rk4(ha.modes[q], x, h);
      else x1 = x;
      if (!ha.enabled(q, x1).empty()) {
        // A second crossing inside the same step is resolved on the next step.
        x1 = x;
        tr.samples.push_back({t, q, x});
        continue;
      }
    }
    x = x1;
    t = t_next;
    if (!ha.bounds.contains(x)) {
      tr.diagnostics.push_back("state left bounds at t = " + std::to_string(t) + " in mode " + ha.modes[q].name +
                               "; clamped");
      x = x.cwiseMax(ha.bounds.lo).cwiseMin(ha.bounds.hi);
    }
    tr.samples.push_back({t, q, x});
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Box flowpipes

struct FlowpipeSegment {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t mode = 0;
  Box box;
};

struct Flowpipe {
  std::vector<FlowpipeSegment> segments;
  std::vector<std::string> warnings;
};

namespace detail {

struct ModeFlow {
  Eigen::Matrix2d Phi;    // e^{A h}
  Eigen::Vector2d v;      // int_0^h e^{A s} b ds
  Eigen::Vector2d bulge;  // h^2/8 max |A (A x + b)| over the state bounds
};

inline ModeFlow mode_flow(const HybridMode& m, double h, const Box& bounds) {
  Eigen::Matrix3d aug = Eigen::Matrix3d::Zero();
  aug.topLeftCorner<2, 2>() = m.A;
  aug.topRightCorner<2, 1>() = m.b;
  const Eigen::Matrix3d E = (aug * h).exp();
  ModeFlow f;
  f.Phi = E.topLeftCorner<2, 2>();
  f.v = E.topRightCorner<2, 1>();
  const Eigen::Matrix2d A2 = m.A * m.A;
  const Eigen::Vector2d c2 = m.A * m.b;
  for (Eigen::Index i = 0; i < 2; ++i) {
    const Eigen::VectorXd row = A2.row(i).transpose();
    const double hi = support(bounds, row) + c2(i);
    const double lo = -support(bounds, Eigen::VectorXd(-row)) + c2(i);
    f.bulge(i) = h * h / 8.0 * std::max(std::abs(hi), std::abs(lo));
  }
  return f;
}

inline Box affine_image(const Box& X, const Eigen::Matrix2d& Phi, const Eigen::Vector2d& v) {
  const Eigen::Vector2d c = Phi * X.center() + v;
  const Eigen::Vector2d r = Phi.cwiseAbs() * (0.5 * X.width());
  return Box(c - r, c + r);
}

inline Box segment_box(const Box& X, const ModeFlow& f) {
  const Box end = affine_image(X, f.Phi, f.v);
  const Box h = X.hull(end);
  return Box(h.lo - f.bulge, h.hi + f.bulge);
}

inline std::optional<Box> clip_to_guard(const Box& B, const std::vector<GuardAtom>& guard) {
  Eigen::Vector2d lo = B.lo, hi = B.hi;
  for (const auto& a : guard) {
    const auto i = static_cast<Eigen::Index>(a.variable);
    if (a.relation == Relation::LessEq) hi(i) = std::min(hi(i), a.threshold);
    else lo(i) = std::max(lo(i), a.threshold);
  }
  if ((lo.array() > hi.array()).any()) return std::nullopt;
  return Box(lo, hi);
}

// Closure of the complement of a single-atom guard.
inline std::optional<Box> clip_outside_guard(const Box& B, const std::vector<GuardAtom>& guard) {
  if (guard.size() != 1) return B;
  GuardAtom flipped = guard.front();
  flipped.relation = flipped.relation == Relation::LessEq ? Relation::GreaterEq : Relation::LessEq;
  return clip_to_guard(B, {flipped});
}

}  // namespace detail

/// Interval flowpipe: per step, the exact box image of the mode flow plus a
/// second-order bound on the motion inside the step. Parts of a step's
/// segment that meet a guard jump and are flowed for one step in the target
/// mode; what stays is clipped to the guard's complement. Boxes are merged
/// per mode and step and truncated to the state bounds.
inline Flowpipe box_flowpipe(const HybridAutomaton& ha, const Box& X0, std::size_t q0, double horizon,
                             double step = 0.01) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "flowpipe step must be positive");
  if (q0 >= ha.modes.size()) throw Error(ErrorCode::UnknownMode, "initial mode out of range");
  Flowpipe fp;
  auto start = X0.intersect(ha.bounds);
  if (!start) throw Error(ErrorCode::InvalidArgument, "initial box does not meet the state bounds");
  if (!ha.bounds.contains(X0.lo) || !ha.bounds.contains(X0.hi)) {
    fp.warnings.push_back("initial box truncated to the state bounds");
  }
  const std::size_t nm = ha.modes.size();
  std::vector<detail::ModeFlow> flows;
  for (const auto& m : ha.modes) flows.push_back(detail::mode_flow(m, step, ha.bounds));

  std::vector<std::optional<Box>> current(nm);
  current[q0] = *start;
  const auto nsteps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  auto merge = [](std::optional<Box>& into, const Box& b) { into = into ? into->hull(b) : b; };
  auto truncate = [&](const Box& b, double t, std::size_t q) -> std::optional<Box> {
    if (!ha.bounds.contains(b.lo) || !ha.bounds.contains(b.hi)) {
      fp.warnings.push_back("box truncated to state bounds at t = " + std::to_string(t) + " in mode " +
                            ha.modes[q].name);
    }
    return b.intersect(ha.bounds);
  };

  for (std::size_t k = 0; k < nsteps; ++k) {
    const double t0 = static_cast<double>(k) * step;
    const double t1 = static_cast<double>(k + 1) * step;
    std::vector<std::optional<Box>> next(nm), seg(nm);
    for (std::size_t q = 0; q < nm; ++q) {
      if (!current[q]) continue;
      const Box S = detail::segment_box(*current[q], flows[q]);
      merge(seg[q], S);
      std::optional<Box> stay = detail::affine_image(*current[q], flows[q].Phi, flows[q].v);
      for (const auto& tr : ha.transitions) {
        if (tr.source != q) continue;
        if (auto J = detail::clip_to_guard(S, tr.guard)) {
          const Box moved = detail::segment_box(*J, flows[tr.target]);
          merge(seg[tr.target], moved);
          merge(next[tr.target], moved);
        }
        if (stay) stay = detail::clip_outside_guard(*stay, tr.guard);
      }
      if (stay) merge(next[q], *stay);
    }
    for (std::size_t q = 0; q < nm; ++q) {
      if (seg[q]) {
        if (auto b = truncate(*seg[q], t1, q)) fp.segments.push_back({t0, t1, q, *b});
      }
      if (next[q]) next[q] = truncate(*next[q], t1, q);
    }
    current = std::move(next);
  }
  return fp;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const HybridAutomaton& ha) {
  nlohmann::json j;
  j["variables"] = ha.variables;
  j["initial"] = ha.modes.at(ha.initial).name;
  j["bounds"] = {{"lo", {ha.bounds.lo(0), ha.bounds.lo(1)}}, {"hi", {ha.bounds.hi(0), ha.bounds.hi(1)}}};
  for (const auto& m : ha.modes) {
    j["modes"].push_back({{"name", m.name},
                          {"A", {{m.A(0, 0), m.A(0, 1)}, {m.A(1, 0), m.A(1, 1)}}},
                          {"b", {m.b(0), m.b(1)}}});
  }
  for (const auto& t : ha.transitions) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& a : t.guard) {
      g.push_back({{"variable", ha.variables.at(a.variable)},
                   {"relation", a.relation == Relation::LessEq ? "<=" : ">="},
                   {"threshold", a.threshold}});
    }
    j["transitions"].push_back({{"source", ha.modes.at(t.source).name},
                                {"target", ha.modes.at(t.target).name},
                                {"guard", g},
                                {"label", t.label}});
  }
  return j;
}

inline HybridAutomaton hybrid_from_json(const nlohmann::json& j) {
  HybridAutomaton ha;
  try {
    ha.variables = j.at("variables").get<std::vector<std::string>>();
    if (ha.variables.size() != 2) throw Error(ErrorCode::ParseError, "hybrid model must have two variables");
    for (const auto& m : j.at("modes")) {
      HybridMode hm{m.at("name").get<std::string>(), Eigen::Matrix2d(), Eigen::Vector2d()};
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) hm.A(r, c) = m.at("A").at(r).at(c).get<double>();
        hm.b(r) = m.at("b").at(r).get<double>();
      }
      ha.modes.push_back(std::move(hm));
    }
    const auto& b = j.at("bounds");
    ha.bounds = Box(Eigen::Vector2d(b.at("lo").at(0).get<double>(), b.at("lo").at(1).get<double>()),
                    Eigen::Vector2d(b.at("hi").at(0).get<double>(), b.at("hi").at(1).get<double>()));
    ha.initial = ha.mode_index(j.at("initial").get<std::string>());
    for (const auto& t : j.value("transitions", nlohmann::json::array())) {
      Transition tr{ha.mode_index(t.at("source").get<std::string>()),
                    ha.mode_index(t.at("target").get<std::string>()), {}, t.value("label", "")};
      for (const auto& a : t.at("guard")) {
        const auto var = a.at("variable").get<std::string>();
        auto it = std::find(ha.variables.begin(), ha.variables.end(), var);
        if (it == ha.variables.end()) throw Error(ErrorCode::ParseError, "guard on unknown variable '" + var + "'");
        const auto rel = a.at("relation").get<std::string>();
        if (rel != "<=" && rel != ">=") throw Error(ErrorCode::ParseError, "unknown guard relation '" + rel + "'");
        tr.guard.push_back({static_cast<std::size_t>(it - ha.variables.begin()),
                            rel == "<=" ? Relation::LessEq : Relation::GreaterEq, a.at("threshold").get<double>()});
      }
      ha.transitions.push_back(std::move(tr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed hybrid automaton: ") + e.what());
  }
  return ha;
}

}  // namespace basbench
