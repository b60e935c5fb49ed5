#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basbench/discretize.hpp"
#include "basbench/error.hpp"

namespace basbench {

/// Counter-based generator: the stream for (seed, trace, step) is a pure
/// function of the key, so ensembles do not depend on evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t trace, std::uint64_t step)
      : state_(mix(mix(mix(seed) ^ (trace + 0x632be59bd9b4e019ULL)) ^ (step + 0x9e3779b97f4a7c15ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  Eigen::VectorXd normals(Eigen::Index n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = nd(*this);
    return w;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Independent Gaussian per disturbance channel, fresh every step.
struct DisturbanceLaw {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  static DisturbanceLaw none() { return {Eigen::VectorXd(0), Eigen::VectorXd(0)}; }

  static DisturbanceLaw constant(const Eigen::VectorXd& value) {
    return {value, Eigen::VectorXd::Zero(value.size())};
  }

  Eigen::Index size() const { return mean.size(); }

  void validate(Eigen::Index p) const {
    if (mean.size() != p || stddev.size() != p) {
      throw Error(ErrorCode::DimensionMismatch, "disturbance law has " + std::to_string(mean.size()) +
                                                    " channels, model expects " + std::to_string(p));
    }
    if ((stddev.array() < 0.0).any()) {
      throw Error(ErrorCode::InvalidParameter, "disturbance standard deviations must be >= 0");
    }
  }
};

/// Input as a function of step index and wall-clock minutes since 00:00 of
/// day 1 (step 0).
struct InputSchedule {
  std::string name;
  std::function<Eigen::VectorXd(std::size_t k, double t_min)> at;

  static InputSchedule constant(const Eigen::VectorXd& u) {
    return {"constant", [u](std::size_t, double) { return u; }};
  }

  /// 20 degC during 08:00-12:00 and 13:00-18:00, otherwise 18 degC.
  static InputSchedule cs1_weekday() {
    return {"cs1-weekday", [](std::size_t, double t_min) {
              const double minute_of_day = std::fmod(t_min, 1440.0);
              const bool occupied = (minute_of_day >= 8 * 60.0 && minute_of_day < 12 * 60.0) ||
                                    (minute_of_day >= 13 * 60.0 && minute_of_day < 18 * 60.0);
              return Eigen::VectorXd::Constant(1, occupied ? 20.0 : 18.0);
            }};
  }
};

/// State feedback u = controller(k, x). Schedules are open-loop controllers.
using Controller = std::function<Eigen::VectorXd(std::size_t k, const Eigen::VectorXd& x)>;

inline Controller as_controller(const InputSchedule& s, double delta_minutes) {
  return [s, delta_minutes](std::size_t k, const Eigen::VectorXd&) {
    return s.at(k, static_cast<double>(k) * delta_minutes);
  };
}

struct Trace {
  std::string model_id;
  std::uint64_t seed = 0;
  std::uint64_t trace_index = 0;
  double delta_minutes = 0.0;
  Eigen::MatrixXd states;        // (K+1) x n
  Eigen::MatrixXd inputs;        // K x m
  Eigen::MatrixXd disturbances;  // K x p
  Eigen::MatrixXd outputs;       // (K+1) x rows(C)

  std::size_t steps() const { return static_cast<std::size_t>(inputs.rows()); }
};

inline Eigen::VectorXd step(const DiscreteModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& d, const Eigen::VectorXd& w) {
  detail::check_size(x.size(), model.states.size(), "state", model.states);
  detail::check_size(u.size(), model.inputs.size(), "input", model.inputs);
  detail::check_size(d.size(), model.disturbances.size(), "disturbance", model.disturbances);
  Eigen::VectorXd next = model.A * x + model.B * u + model.F * d + model.Q;
  if (!model.is_deterministic()) {
    detail::check_size(w.size(), model.states.size(), "noise", model.states);
    next += model.Sigma * w;
  }
  return next;
}

/// One trajectory. Per step the stream (seed, trace_index, k) draws the
/// disturbance normals first, then the process-noise normals.
inline Trace simulate_controlled(const DiscreteModel& model, const Eigen::VectorXd& x0,
                                 const Controller& controller, const DisturbanceLaw& law,
                                 std::uint64_t seed, std::size_t K, std::uint64_t trace_index = 0) {
  law.validate(model.p());
  detail::check_size(x0.size(), model.states.size(), "initial state", model.states);
  const auto k_rows = static_cast<Eigen::Index>(K);
  Trace tr;
  tr.model_id = model.id;
  tr.seed = seed;
  tr.trace_index = trace_index;
  tr.delta_minutes = model.delta_minutes;
  tr.states.resize(k_rows + 1, model.n());
  tr.inputs.resize(k_rows, model.m());
  tr.disturbances.resize(k_rows, model.p());
  tr.states.row(0) = x0.transpose();
  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd u = controller(k, x);
    CounterRng rng(seed, trace_index, k);
    const Eigen::VectorXd d = law.mean + law.stddev.cwiseProduct(rng.normals(model.p()));
    const Eigen::VectorXd w = rng.normals(model.n());
    x = step(model, x, u, d, w);
    tr.inputs.row(r) = u.transpose();
    tr.disturbances.row(r) = d.transpose();
    tr.states.row(r + 1) = x.transpose();
  }
  tr.outputs = model.C.rows() > 0 ? Eigen::MatrixXd(tr.states * model.C.transpose())
                                  : Eigen::MatrixXd(k_rows + 1, 0);
  return tr;
}

inline Trace simulate(const DiscreteModel& model, const Eigen::VectorXd& x0, const InputSchedule& schedule,
                      const DisturbanceLaw& law, std::uint64_t seed, std::size_t K) {
  return simulate_controlled(model, x0, as_controller(schedule, model.delta_minutes), law, seed, K);
}

struct EnsembleSummary {
  Eigen::MatrixXd mean;    // (K+1) x n
  Eigen::MatrixXd stddev;  // (K+1) x n, population standard deviation
};

struct Ensemble {
  std::vector<Trace> traces;
  EnsembleSummary summary;
};

inline EnsembleSummary summarize(const std::vector<Trace>& traces) {
  EnsembleSummary s;
  if (traces.empty()) return s;
  const auto rows = traces.front().states.rows();
  const auto cols = traces.front().states.cols();
  // shifted by the first trace
  const Eigen::MatrixXd& ref = traces.front().states;
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& t : traces) shift += t.states - ref;
  s.mean = ref + shift / static_cast<double>(traces.size());
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& t : traces) var += (t.states - s.mean).cwiseAbs2();
  s.stddev = (var / static_cast<double>(traces.size())).cwiseSqrt();
  return s;
}

/// n independent traces; trace i uses substream (seed, i, k).
inline Ensemble monte_carlo(const DiscreteModel& model, const Eigen::VectorXd& x0, const Controller& controller,
                            const DisturbanceLaw& law, std::size_t n, std::uint64_t seed, std::size_t K) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Monte-Carlo ensemble needs n >= 1");
  Ensemble e;
  e.traces.reserve(n);
  for (std::size_t i = 0; i < n; ++i) e.traces.push_back(simulate_controlled(model, x0, controller, law, seed, K, i));
  e.summary = summarize(e.traces);
  return e;
}

inline Ensemble monte_carlo(const DiscreteModel& model, const Eigen::VectorXd& x0, const InputSchedule& schedule,
                            const DisturbanceLaw& law, std::size_t n, std::uint64_t seed, std::size_t K) {
  return monte_carlo(model, x0, as_controller(schedule, model.delta_minutes), law, n, seed, K);
}

}  // namespace basbench
