#pragma once

// Grid abstraction of Gaussian kernels, finite-horizon safety by value
// iteration, policy refinement and guarantee composition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basbench/benchmarks.hpp"
#include "basbench/error.hpp"
#include "basbench/reach.hpp"
#include "basbench/simulate.hpp"

namespace basbench {

/// x' ~ N(A x + B u + Q, diag(variance)).
struct GaussianKernel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd Q;
  Eigen::VectorXd variance;
  Box U;

  Eigen::Index dim() const { return A.rows(); }

  void validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.size() != n || variance.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "Gaussian kernel blocks disagree on the state dimension");
    }
    if (U.dim() != B.cols()) throw Error(ErrorCode::DimensionMismatch, "input set does not match B");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(variance(i) > 0.0)) throw Error(ErrorCode::InvalidParameter, "kernel variances must be positive");
    }
  }

  Eigen::VectorXd mean(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const { return A * x + B * u + Q; }
  Eigen::VectorXd stddev() const { return variance.cwiseSqrt(); }
};

/// Zone temperatures of cs1 with both radiator returns frozen at their
/// steady state and the process noise of the two zone rows.
inline GaussianKernel build_kernel_cs1_2d() {
  const auto m = *build_benchmark(BenchmarkId::Cs1Stoch).discrete;
  GaussianKernel k;
  k.A = m.A.topLeftCorner(2, 2);
  k.B = m.B.topRows(2);
  k.Q = m.Q.head(2) + m.A.block(0, 2, 2, 2) * Eigen::Vector2d(steady_state::T_rw_r1, steady_state::T_rw_r2);
  k.variance = m.Sigma.topLeftCorner(2, 2).diagonal().cwiseAbs2();
  k.U = Box(Eigen::VectorXd::Constant(1, 15.0), Eigen::VectorXd::Constant(1, 22.0));
  k.validate();
  return k;
}

/// Folds independent Gaussian disturbances into the kernel: mean shift
/// F mean_d, extra variance sum_i F_ri^2 std_i^2. Off-diagonal covariance
/// is dropped, which is exact in one dimension.
inline GaussianKernel kernel_from_model(const DiscreteModel& m, const DisturbanceLaw& law, const Box& U) {
  law.validate(m.p());
  GaussianKernel k;
  k.A = m.A;
  k.B = m.B;
  k.Q = m.Q + m.F * law.mean;
  k.variance = (m.Sigma * m.Sigma.transpose()).diagonal() + m.F.cwiseAbs2() * law.stddev.cwiseAbs2();
  k.U = U;
  k.validate();
  return k;
}

struct SafetySpec {
  Box safe;
  std::size_t N = 0;
  std::string formula;

  void validate() const {
    if (safe.dim() == 0) throw Error(ErrorCode::InvalidArgument, "safe set is empty");
  }
};

/// n evenly spaced scalar inputs over [lo, hi].
inline std::vector<Eigen::VectorXd> uniform_actions(double lo, double hi, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one action");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(Eigen::VectorXd::Constant(1, lo + t * (hi - lo)));
  }
  return out;
}

/// Probabilities of one axis over a contiguous band of cells.
struct AxisRow {
  std::size_t first = 0;
  std::vector<double> p;
};

struct KernelRow {
  std::vector<AxisRow> axes;
  double unsafe = 0.0;
};

class GridMDP {
 public:
  GridMDP(GaussianKernel kernel, Box safe, std::vector<std::size_t> cells_per_axis,
          std::vector<Eigen::VectorXd> actions)
      : kernel_(std::move(kernel)), safe_(std::move(safe)), shape_(std::move(cells_per_axis)),
        actions_(std::move(actions)) {
    kernel_.validate();
    const auto n = kernel_.dim();
    if (safe_.dim() != n) throw Error(ErrorCode::DimensionMismatch, "safe box does not match the kernel dimension");
    if (static_cast<Eigen::Index>(shape_.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "need one cell count per axis");
    }
    if (actions_.empty()) throw Error(ErrorCode::InvalidArgument, "action set is empty");
    for (const auto& a : actions_) {
      if (a.size() != kernel_.U.dim() || !kernel_.U.contains(a, 1e-12)) {
        throw Error(ErrorCode::InvalidArgument, "action outside the admissible input set");
      }
    }
    width_.resize(n);
    cells_ = 1;
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto c = shape_[static_cast<std::size_t>(r)];
      if (c < 1) throw Error(ErrorCode::InvalidArgument, "cells_per_axis must be >= 1");
      width_(r) = (safe_.hi(r) - safe_.lo(r)) / static_cast<double>(c);
      if (!(width_(r) > 0.0)) throw Error(ErrorCode::InvalidArgument, "degenerate cell of zero width on axis " +
                                                                         std::to_string(r));
      cells_ *= c;
    }
    sigma_ = kernel_.stddev();
    // Total variation between the kernels at two points of one cell, per
    // axis: TV(N(m,s^2), N(m',s^2)) <= |m - m'| / (s sqrt(2 pi)), and
    // |m_r - m'_r| <= |A_r|_2 h / 2 from the cell center. Summing over axes
    // bounds the product measure, so one step errs by at most L h.
    lipschitz_ = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      lipschitz_ += kernel_.A.row(r).norm() / (2.0 * sigma_(r) * std::sqrt(2.0 * std::numbers::pi));
    }
    eta_ = lipschitz_ * width_.norm();
    std::size_t band = 0;
    for (Eigen::Index r = 0; r < n; ++r) band += band_cells(r);
    if (cells_ * actions_.size() * band <= kCacheEntries) {
      cache_.reserve(cells_ * actions_.size());
      for (std::size_t i = 0; i < cells_; ++i) {
        for (std::size_t a = 0; a < actions_.size(); ++a) cache_.push_back(compute_row(i, a));
      }
    }
  }

  static constexpr double kBandSigmas = 9.0;
  static constexpr std::size_t kCacheEntries = 20'000'000;

  const GaussianKernel& kernel() const { return kernel_; }
  const Box& safe() const { return safe_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<Eigen::VectorXd>& actions() const { return actions_; }
  std::size_t cells() const { return cells_; }
  std::size_t num_actions() const { return actions_.size(); }
  /// Per-step abstraction error and the constant behind it.
  double eta() const { return eta_; }
  double lipschitz() const { return lipschitz_; }
  double diameter() const { return width_.norm(); }

  /// Cell index with axis 0 varying fastest.
  std::vector<std::size_t> unravel(std::size_t cell) const {
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t r = 0; r < shape_.size(); ++r) {
      idx[r] = cell % shape_[r];
      cell /= shape_[r];
    }
    return idx;
  }

  std::size_t ravel(const std::vector<std::size_t>& idx) const {
    std::size_t cell = 0;
    for (std::size_t r = shape_.size(); r-- > 0;) cell = cell * shape_[r] + idx[r];
    return cell;
  }

  Box cell_box(std::size_t cell) const {
    const auto idx = unravel(cell);
    Eigen::VectorXd lo(safe_.dim()), hi(safe_.dim());
    for (Eigen::Index r = 0; r < safe_.dim(); ++r) {
      const auto i = idx[static_cast<std::size_t>(r)];
      lo(r) = safe_.lo(r) + width_(r) * static_cast<double>(i);
      hi(r) = i + 1 == shape_[static_cast<std::size_t>(r)] ? safe_.hi(r) : lo(r) + width_(r);
    }
    return Box(lo, hi);
  }

  Eigen::VectorXd center(std::size_t cell) const { return cell_box(cell).center(); }

  /// Cell containing x, or nullopt outside the safe box.
  std::optional<std::size_t> locate(const Eigen::VectorXd& x) const {
    if (!safe_.contains(x)) return std::nullopt;
    return nearest(x);
  }

  /// Nearest cell; states outside the grid snap to the boundary cells.
  std::size_t nearest(const Eigen::VectorXd& x) const {
    detail::check_size(x.size(), shape_.size(), "state", ChannelSpace{});
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t r = 0; r < shape_.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const double t = std::floor((x(ri) - safe_.lo(ri)) / width_(ri));
      idx[r] = static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(shape_[r] - 1)));
    }
    return ravel(idx);
  }

  KernelRow row(std::size_t cell, std::size_t action) const {
    if (!cache_.empty()) return cache_[cell * actions_.size() + action];
    return compute_row(cell, action);
  }

  /// sum_j P(cell, action, j) V(j); the unsafe state contributes nothing.
  double expect(const KernelRow& row, const std::vector<double>& V) const {
    if (row.axes.size() == 1) {
      const auto& ax = row.axes[0];
      double s = 0.0;
      for (std::size_t j = 0; j < ax.p.size(); ++j) s += ax.p[j] * V[ax.first + j];
      return s;
    }
    return expect_rec(row, V, row.axes.size() - 1, 0, 1.0);
  }

  /// Full row over cells followed by the unsafe state.
  Eigen::VectorXd dense_row(std::size_t cell, std::size_t action) const {
    const auto r = row(cell, action);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells_) + 1);
    for (std::size_t j = 0; j < cells_; ++j) {
      const auto idx = unravel(j);
      double p = 1.0;
      for (std::size_t a = 0; a < r.axes.size() && p != 0.0; ++a) {
        const auto& ax = r.axes[a];
        p = (idx[a] >= ax.first && idx[a] < ax.first + ax.p.size()) ? p * ax.p[idx[a] - ax.first] : 0.0;
      }
      out(static_cast<Eigen::Index>(j)) = p;
    }
    out(static_cast<Eigen::Index>(cells_)) = r.unsafe;
    return out;
  }

 private:
  std::size_t band_cells(Eigen::Index r) const {
    const double span = 2.0 * kBandSigmas * sigma_(r) / width_(r) + 2.0;
    return std::min<std::size_t>(shape_[static_cast<std::size_t>(r)], static_cast<std::size_t>(std::ceil(span)));
  }

  // Upper tail 1 - Phi((e - mu) / s).
  static double upper_tail(double e, double mu, double s) {
    return 0.5 * std::erfc((e - mu) / (s * std::numbers::sqrt2));
  }

  KernelRow compute_row(std::size_t cell, std::size_t action) const {
    const Eigen::VectorXd mu = kernel_.mean(center(cell), actions_[action]);
    KernelRow row;
    double inside = 1.0;
    for (Eigen::Index r = 0; r < mu.size(); ++r) {
      const auto n = static_cast<long>(shape_[static_cast<std::size_t>(r)]);
      const double lo = safe_.lo(r), w = width_(r), s = sigma_(r);
      inside *= upper_tail(lo, mu(r), s) - upper_tail(safe_.hi(r), mu(r), s);
      const long first = std::clamp(static_cast<long>(std::floor((mu(r) - kBandSigmas * s - lo) / w)), 0L, n);
      const long last = std::clamp(static_cast<long>(std::ceil((mu(r) + kBandSigmas * s - lo) / w)), 0L, n);
      AxisRow ax;
      ax.first = static_cast<std::size_t>(first);
      ax.p.reserve(static_cast<std::size_t>(last - first));
      double prev = upper_tail(lo + w * static_cast<double>(first), mu(r), s);
      for (long j = first; j < last; ++j) {
        const double edge = j + 1 == n ? safe_.hi(r) : lo + w * static_cast<double>(j + 1);
        const double cur = upper_tail(edge, mu(r), s);
        ax.p.push_back(std::max(0.0, prev - cur));
        prev = cur;
      }
      row.axes.push_back(std::move(ax));
    }
    row.unsafe = std::clamp(1.0 - inside, 0.0, 1.0);
    return row;
  }

  double expect_rec(const KernelRow& row, const std::vector<double>& V, std::size_t axis, std::size_t base,
                    double weight) const {
    const auto& ax = row.axes[axis];
    double s = 0.0;
    std::size_t stride = 1;
    for (std::size_t r = 0; r < axis; ++r) stride *= shape_[r];
    for (std::size_t j = 0; j < ax.p.size(); ++j) {
      const double w = weight * ax.p[j];
      if (w == 0.0) continue;
      const std::size_t b = base + (ax.first + j) * stride;
      s += axis == 0 ? w * V[b] : expect_rec(row, V, axis - 1, b, w);
    }
    return s;
  }

  GaussianKernel kernel_;
  Box safe_;
  std::vector<std::size_t> shape_;
  std::vector<Eigen::VectorXd> actions_;
  Eigen::VectorXd width_;
  Eigen::VectorXd sigma_;
  std::size_t cells_ = 0;
  double lipschitz_ = 0.0;
  double eta_ = 0.0;
  std::vector<KernelRow> cache_;
};

inline GridMDP grid_abstraction(const GaussianKernel& kernel, const SafetySpec& spec,
                                const std::vector<std::size_t>& cells_per_axis,
                                const std::vector<Eigen::VectorXd>& actions) {
  spec.validate();
  return GridMDP(kernel, spec.safe, cells_per_axis, actions);
}

/// Same cell count on every axis.
inline GridMDP grid_abstraction(const GaussianKernel& kernel, const SafetySpec& spec, std::size_t cells_per_axis,
                                const std::vector<Eigen::VectorXd>& actions) {
  return grid_abstraction(kernel, spec, std::vector<std::size_t>(static_cast<std::size_t>(kernel.dim()), cells_per_axis),
                          actions);
}

/// Time-varying state feedback on the grid. per_step[t][cell] is the
/// action index at time t; the last entry is reused past the horizon.
struct Policy {
  std::vector<std::vector<std::size_t>> per_step;
  std::vector<Eigen::VectorXd> actions;
  Box grid;
  std::vector<std::size_t> shape;

  static Policy stationary(const GridMDP& mdp, std::size_t action) {
    return {{std::vector<std::size_t>(mdp.cells(), action)}, mdp.actions(), mdp.safe(), mdp.shape()};
  }

  std::size_t cell_of(const Eigen::VectorXd& x) const {
    std::size_t cell = 0;
    for (std::size_t r = shape.size(); r-- > 0;) {
      const auto ri = static_cast<Eigen::Index>(r);
      const double w = (grid.hi(ri) - grid.lo(ri)) / static_cast<double>(shape[r]);
      const double t = std::clamp(std::floor((x(ri) - grid.lo(ri)) / w), 0.0, static_cast<double>(shape[r] - 1));
      cell = cell * shape[r] + static_cast<std::size_t>(t);
    }
    return cell;
  }

  std::size_t action_index(std::size_t t, const Eigen::VectorXd& x) const {
    if (per_step.empty()) throw Error(ErrorCode::InvalidArgument, "empty policy");
    return per_step[std::min(t, per_step.size() - 1)][cell_of(x)];
  }

  Eigen::VectorXd action(std::size_t t, const Eigen::VectorXd& x) const { return actions[action_index(t, x)]; }
};

struct SafetyResult {
  /// values[k][cell]: probability of staying safe for k more steps.
  std::vector<std::vector<double>> values;
  Policy policy;

  const std::vector<double>& final_values() const { return values.back(); }
};

/// V_0 = 1 on safe cells, V_{k+1}(i) = max_a sum_j P(i,a,j) V_k(j).
/// Ties go to the lowest action index.
inline SafetyResult safety_value_iteration(const GridMDP& mdp, std::size_t N) {
  SafetyResult res;
  res.values.reserve(N + 1);
  res.values.emplace_back(mdp.cells(), 1.0);
  res.policy.actions = mdp.actions();
  res.policy.grid = mdp.safe();
  res.policy.shape = mdp.shape();
  res.policy.per_step.assign(N, std::vector<std::size_t>(mdp.cells(), 0));
  for (std::size_t k = 0; k < N; ++k) {
    const auto& prev = res.values.back();
    std::vector<double> next(mdp.cells(), 0.0);
    auto& choice = res.policy.per_step[N - 1 - k];
    for (std::size_t i = 0; i < mdp.cells(); ++i) {
      double best = -1.0;
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        const double v = mdp.expect(mdp.row(i, a), prev);
        if (v > best) {
          best = v;
          choice[i] = a;
        }
      }
      next[i] = std::clamp(best, 0.0, 1.0);
    }
    res.values.push_back(std::move(next));
  }
  if (N == 0) res.policy.per_step.assign(1, std::vector<std::size_t>(mdp.cells(), 0));
  return res;
}

/// Transition matrix over cells plus the absorbing unsafe state (last).
inline Eigen::MatrixXd dense_transition(const GridMDP& mdp, std::size_t action) {
  const auto n = static_cast<Eigen::Index>(mdp.cells());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (std::size_t i = 0; i < mdp.cells(); ++i) P.row(static_cast<Eigen::Index>(i)) = mdp.dense_row(i, action).transpose();
  P(n, n) = 1.0;
  return P;
}

/// Concrete controller u = policy(interface(x)).
using Interface = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline Interface identity_interface() {
  return [](const Eigen::VectorXd& x) { return x; };
}

inline Interface project_interface(std::vector<Eigen::Index> coords) {
  return [coords = std::move(coords)](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) y(static_cast<Eigen::Index>(i)) = x(coords[i]);
    return y;
  };
}

inline Controller refine_policy(Policy policy, Interface interface) {
  return [policy = std::move(policy), interface = std::move(interface)](std::size_t k, const Eigen::VectorXd& x) {
    return policy.action(k, interface(x));
  };
}

struct BinomialEstimate {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double p = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval; z = 2.5758 is two-sided 99%.
inline BinomialEstimate binomial_estimate(std::size_t successes, std::size_t trials, double z = 2.5758293035489) {
  BinomialEstimate e{successes, trials};
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  e.p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (e.p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(e.p * (1 - e.p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  e.lo = std::max(0.0, centre - half);
  e.hi = std::min(1.0, centre + half);
  return e;
}

/// Fraction of runs of the kernel under the policy that stay in the safe
/// box for N steps, x0 included.
inline BinomialEstimate rollout_safety(const GaussianKernel& kernel, const Policy& policy, const Box& safe,
                                       const Eigen::VectorXd& x0, std::size_t N, std::size_t runs,
                                       std::uint64_t seed) {
  const Eigen::VectorXd s = kernel.stddev();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    Eigen::VectorXd x = x0;
    bool safe_run = safe.contains(x);
    for (std::size_t k = 0; k < N && safe_run; ++k) {
      CounterRng rng(seed, i, k);
      x = kernel.mean(x, policy.action(k, x)) + s.cwiseProduct(rng.normals(x.size()));
      safe_run = safe.contains(x);
    }
    ok += safe_run ? 1 : 0;
  }
  return binomial_estimate(ok, runs);
}

/// Same for a concrete model: safety is judged on output(x).
inline BinomialEstimate rollout_safety(const DiscreteModel& model, const Controller& controller,
                                       const DisturbanceLaw& law, const Interface& output, const Box& safe,
                                       const Eigen::VectorXd& x0, std::size_t N, std::size_t runs,
                                       std::uint64_t seed) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto tr = simulate_controlled(model, x0, controller, law, seed, N, i);
    bool safe_run = true;
    for (Eigen::Index r = 0; r < tr.states.rows() && safe_run; ++r) {
      safe_run = safe.contains(output(tr.states.row(r).transpose()));
    }
    ok += safe_run ? 1 : 0;
  }
  return binomial_estimate(ok, runs);
}

inline double compose_guarantee(double p_prime, double eta, std::size_t N, double delta) {
  if (p_prime < 0.0 || eta < 0.0 || delta < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "guarantee terms must be non-negative");
  }
  return std::max(0.0, p_prime - eta - static_cast<double>(N) * delta);
}

// ---------------------------------------------------------------------------
// Synthesis on the second case study

struct Cs2Options {
  double set_point = 20.0;
  double tolerance = 0.5;
  std::size_t horizon = 16;
  std::size_t num_actions = 15;
  double eta_target = 0.005;
  int abstract_order = 1;
  double delta = 1e-2;
  std::size_t mc_runs = 10'000;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> x0;  // cs2-full state; defaults to all 20
};

struct Cs2Report {
  double p_prime = 0.0;
  double eta = 0.0;          // per step
  double eta_horizon = 0.0;  // horizon * eta, used in the composition
  double epsilon = 0.0;
  double delta = 0.0;
  double p = 0.0;
  double printed_p = 0.7657;
  double printed_formula = 0.7607;
  std::size_t cells = 0;
  std::size_t actions = 0;
  std::size_t horizon = 0;
  BinomialEstimate concrete;
  BinomialEstimate abstract;
  Eigen::VectorXd x0;
  std::optional<GridMDP> mdp;
  SafetyResult safety;
  Controller controller;
};

inline Cs2Report synthesize_cs2(const Cs2Options& opt = {}) {
  const auto abs_id = opt.abstract_order == 4   ? BenchmarkId::Cs2Abs4
                      : opt.abstract_order == 3 ? BenchmarkId::Cs2Abs3
                      : opt.abstract_order == 2 ? BenchmarkId::Cs2Abs2
                                                : BenchmarkId::Cs2Abs1;
  if (opt.abstract_order != 1) {
    throw Error(ErrorCode::InvalidArgument, "grid synthesis is implemented for the one-state abstraction only");
  }
  const auto abs = build_benchmark(abs_id);
  const auto kernel = kernel_from_model(*abs.discrete, abs.law, *abs.input_set);
  const Box safe(Eigen::VectorXd::Constant(1, opt.set_point - opt.tolerance),
                 Eigen::VectorXd::Constant(1, opt.set_point + opt.tolerance));

  // Cell width from eta = L h with L fixed by the kernel.
  const GridMDP probe(kernel, safe, {1}, {kernel.U.center()});
  const auto cells = static_cast<std::size_t>(std::ceil(probe.lipschitz() * 2.0 * opt.tolerance / opt.eta_target));

  Cs2Report rep;
  rep.mdp.emplace(kernel, safe, std::vector<std::size_t>{cells},
                  uniform_actions(kernel.U.lo(0), kernel.U.hi(0), opt.num_actions));
  const auto& mdp = *rep.mdp;
  rep.safety = safety_value_iteration(mdp, opt.horizon);
  rep.cells = mdp.cells();
  rep.actions = mdp.num_actions();
  rep.horizon = opt.horizon;
  rep.p_prime = rep.safety.final_values()[mdp.nearest(Eigen::VectorXd::Constant(1, opt.set_point))];
  rep.eta = mdp.eta();
  rep.eta_horizon = static_cast<double>(opt.horizon) * mdp.eta();
  rep.epsilon = sim_rel_lookup(opt.abstract_order, opt.delta);
  rep.delta = opt.delta;
  rep.p = compose_guarantee(rep.p_prime, rep.eta_horizon, opt.horizon, opt.delta);

  const auto full = build_benchmark(BenchmarkId::Cs2Full);
  rep.x0 = opt.x0.value_or(full.x0);
  rep.controller = refine_policy(rep.safety.policy, project_interface({0}));
  rep.concrete = rollout_safety(*full.discrete, rep.controller, full.law, project_interface({0}), safe, rep.x0,
                                opt.horizon, opt.mc_runs, opt.seed);
  rep.abstract = rollout_safety(kernel, rep.safety.policy, safe, rep.x0.head(1), opt.horizon, opt.mc_runs, opt.seed);
  return rep;
}

}  // namespace basbench
