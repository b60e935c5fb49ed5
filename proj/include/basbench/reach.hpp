#pragma once

// Boxes, template polytopes, support functions and reach tubes of
// discrete-time affine systems under box-bounded inputs and disturbances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basbench/detail/lp.hpp"
#include "basbench/discretize.hpp"
#include "basbench/error.hpp"
#include "basbench/simulate.hpp"

namespace basbench {

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd lower, Eigen::VectorXd upper) : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size()) throw Error(ErrorCode::DimensionMismatch, "box bounds differ in size");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (!(lo(i) <= hi(i))) {
        throw Error(ErrorCode::InvalidArgument, "box lower bound exceeds upper bound in dimension " +
                                                    std::to_string(i));
      }
    }
  }

  static Box point(const Eigen::VectorXd& p) { return Box(p, p); }
  static Box empty_space() { return Box(Eigen::VectorXd(0), Eigen::VectorXd(0)); }
  static Box uniform(Eigen::Index n, double lower, double upper) {
    return Box(Eigen::VectorXd::Constant(n, lower), Eigen::VectorXd::Constant(n, upper));
  }

  Eigen::Index dim() const { return lo.size(); }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  Eigen::VectorXd width() const { return hi - lo; }

  bool contains(const Eigen::VectorXd& x, double slack = 0.0) const {
    return ((x - lo).array() >= -slack).all() && ((hi - x).array() >= -slack).all();
  }

  Box hull(const Box& o) const { return Box(lo.cwiseMin(o.lo), hi.cwiseMax(o.hi)); }

  /// Intersection, or nullopt when empty.
  std::optional<Box> intersect(const Box& o) const {
    Eigen::VectorXd l = lo.cwiseMax(o.lo), h = hi.cwiseMin(o.hi);
    if (((h - l).array() < 0.0).any()) return std::nullopt;
    return Box(l, h);
  }
};

/// { x : D.row(i) x <= b(i) for all i }.
struct TemplatePolytope {
  Eigen::MatrixXd directions;
  Eigen::VectorXd bounds;

  Eigen::Index dim() const { return directions.cols(); }
  Eigen::Index facets() const { return directions.rows(); }

  void validate() const {
    if (bounds.size() != directions.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "template has " + std::to_string(directions.rows()) +
                                                    " directions but " + std::to_string(bounds.size()) +
                                                    " bounds");
    }
    if (!bounds.allFinite()) throw Error(ErrorCode::InvalidArgument, "template bounds must be finite");
  }

  /// Same set with unit-length directions.
  TemplatePolytope normalized() const {
    TemplatePolytope p = *this;
    for (Eigen::Index i = 0; i < p.facets(); ++i) {
      const double norm = p.directions.row(i).norm();
      if (norm > 0.0) {
        p.directions.row(i) /= norm;
        p.bounds(i) /= norm;
      }
    }
    return p;
  }
};

/// Octagonal directions over n states, in the order
///   +e_i (all i), -e_i (all i),
///   then for each i < j:  s_i e_i + s_j e_j with (s_i, s_j) iterating
///   i-major, then s_i in {+,-}, then j, then s_j in {+,-}.
/// For n = 4 this is 8 + 24 = 32 directions.
inline Eigen::MatrixXd octagon_directions(Eigen::Index n) {
  std::vector<Eigen::VectorXd> dirs;
  for (double s : {1.0, -1.0}) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d(i) = s;
      dirs.push_back(d);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (double si : {1.0, -1.0}) {
      for (double sj : {1.0, -1.0}) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
          d(i) = si;
          d(j) = sj;
          dirs.push_back(d);
        }
      }
    }
  }
  Eigen::MatrixXd D(static_cast<Eigen::Index>(dirs.size()), n);
  for (std::size_t r = 0; r < dirs.size(); ++r) D.row(static_cast<Eigen::Index>(r)) = dirs[r].transpose();
  return D;
}

inline double support(const Box& box, const Eigen::VectorXd& d) {
  detail::check_size(d.size(), static_cast<std::size_t>(box.dim()), "direction", ChannelSpace{});
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) s += d(i) >= 0.0 ? d(i) * box.hi(i) : d(i) * box.lo(i);
  return s;
}

/// max d'x over the polytope, via the dual LP  min b'l  s.t.  D'l = d, l >= 0.
inline double support(const TemplatePolytope& p, const Eigen::VectorXd& d) {
  p.validate();
  detail::check_size(d.size(), static_cast<std::size_t>(p.dim()), "direction", ChannelSpace{});
  const auto res = detail::solve_standard_lp(p.bounds, p.directions.transpose(), d);
  if (res.status == detail::LpStatus::Infeasible) {
    throw Error(ErrorCode::Unbounded, "template polytope is unbounded in the requested direction");
  }
  if (res.status == detail::LpStatus::Unbounded) {
    throw Error(ErrorCode::Infeasible, "template polytope is empty");
  }
  return res.value;
}

inline TemplatePolytope template_hull(const Box& box, const Eigen::MatrixXd& directions) {
  TemplatePolytope p{directions, Eigen::VectorXd(directions.rows())};
  for (Eigen::Index i = 0; i < directions.rows(); ++i) p.bounds(i) = support(box, directions.row(i).transpose());
  return p;
}

namespace detail {

inline void require_deterministic(const DiscreteModel& model) {
  if (!model.is_deterministic()) {
    throw Error(ErrorCode::InvalidArgument,
                "model '" + model.id + "' has process noise; use the stochastic verification tools");
  }
}

inline void check_sets(const DiscreteModel& model, const Box& U, const Box& D) {
  detail::check_size(U.dim(), model.inputs.size(), "input set", model.inputs);
  detail::check_size(D.dim(), model.disturbances.size(), "disturbance set", model.disturbances);
}

}  // namespace detail

/// One-step image of X under the affine map, bounded along the template.
template <typename Set>
TemplatePolytope reach_step(const Set& X, const DiscreteModel& model, const Box& U, const Box& D,
                            const Eigen::MatrixXd& directions) {
  detail::require_deterministic(model);
  detail::check_sets(model, U, D);
  TemplatePolytope out{directions, Eigen::VectorXd(directions.rows())};
  for (Eigen::Index i = 0; i < directions.rows(); ++i) {
    const Eigen::VectorXd d = directions.row(i).transpose();
    out.bounds(i) = support(X, model.A.transpose() * d) + support(U, model.B.transpose() * d) +
                    support(D, model.F.transpose() * d) + d.dot(model.Q);
  }
  return out;
}

struct ReachTube {
  std::vector<TemplatePolytope> steps;  // N + 1 sets, steps[0] = hull of X0
  TemplatePolytope tube;                // per-direction maximum over steps
};

/// Reach sets X_k = A^k X0 + sum_j A^j (B U + F D + Q), bounded along the
/// template by propagating each direction backwards (no wrapping effect).
inline ReachTube reach_tube(const DiscreteModel& model, const Box& X0, const Box& U, const Box& D, std::size_t N,
                            const Eigen::MatrixXd& directions) {
  detail::require_deterministic(model);
  detail::check_sets(model, U, D);
  detail::check_size(X0.dim(), model.states.size(), "initial set", model.states);
  const Eigen::Index k = directions.rows();
  ReachTube rt;
  rt.steps.reserve(N + 1);
  Eigen::MatrixXd R = directions.transpose();  // column i: (A^j)' d_i
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
  for (std::size_t step = 0; step <= N; ++step) {
    TemplatePolytope p{directions, Eigen::VectorXd(k)};
    for (Eigen::Index i = 0; i < k; ++i) p.bounds(i) = support(X0, R.col(i)) + acc(i);
    rt.steps.push_back(std::move(p));
    if (step == N) break;
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::VectorXd r = R.col(i);
      acc(i) += support(U, model.B.transpose() * r) + support(D, model.F.transpose() * r) + r.dot(model.Q);
    }
    R = model.A.transpose() * R;
  }
  rt.tube = rt.steps.front();
  for (const auto& p : rt.steps) rt.tube.bounds = rt.tube.bounds.cwiseMax(p.bounds);
  return rt;
}

struct Containment {
  bool inside = true;
  double margin = std::numeric_limits<double>::infinity();  // min_i (b_i - d_i' x)
  Eigen::Index worst_facet = -1;
  Eigen::Index worst_row = -1;  // trace row of the worst margin
};

inline Containment check_containment(const Eigen::VectorXd& x, const TemplatePolytope& p, double slack = 0.0) {
  detail::check_size(x.size(), static_cast<std::size_t>(p.dim()), "point", ChannelSpace{});
  Containment c;
  const Eigen::VectorXd m = p.bounds - p.directions * x;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m(i) < c.margin) {
      c.margin = m(i);
      c.worst_facet = i;
    }
  }
  c.inside = !(c.margin < -slack);
  c.worst_row = 0;
  return c;
}

/// Every state row of the trace against one polytope.
inline Containment check_containment(const Trace& trace, const TemplatePolytope& p, double slack = 0.0) {
  Containment worst;
  for (Eigen::Index r = 0; r < trace.states.rows(); ++r) {
    auto c = check_containment(Eigen::VectorXd(trace.states.row(r).transpose()), p, slack);
    if (c.margin < worst.margin) {
      worst = c;
      worst.worst_row = r;
    }
  }
  worst.inside = !(worst.margin < -slack);
  return worst;
}

/// Facet-wise reference bound minus our bound, for directions present in
/// both (matched up to positive scaling). NaN where the reference lacks the
/// direction.
inline Eigen::VectorXd facet_margins(const TemplatePolytope& ours, const TemplatePolytope& reference) {
  const auto a = ours.normalized();
  const auto b = reference.normalized();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(a.facets(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < a.facets(); ++i) {
    for (Eigen::Index j = 0; j < b.facets(); ++j) {
      if ((a.directions.row(i) - b.directions.row(j)).norm() < 1e-12) {
        const double scale = ours.directions.row(i).norm();
        out(i) = (b.bounds(j) - a.bounds(i)) * scale;
        break;
      }
    }
  }
  return out;
}

}  // namespace basbench
