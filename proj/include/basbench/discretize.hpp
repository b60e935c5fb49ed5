#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "basbench/dynamics.hpp"
#include "basbench/error.hpp"

namespace basbench {

/// x[k+1] = A x + B u + F d + Q + Sigma w,  y = C x,  w ~ N(0, I).
struct DiscreteModel {
  std::string id;
  ChannelSpace states;
  ChannelSpace inputs;
  ChannelSpace disturbances;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd F;
  Eigen::VectorXd Q;
  Eigen::MatrixXd Sigma;  // diagonal, per-step standard deviations
  Eigen::MatrixXd C;
  double delta_minutes = 15.0;

  Eigen::Index n() const { return static_cast<Eigen::Index>(states.size()); }
  Eigen::Index m() const { return static_cast<Eigen::Index>(inputs.size()); }
  Eigen::Index p() const { return static_cast<Eigen::Index>(disturbances.size()); }

  bool is_deterministic() const { return Sigma.isZero(0.0); }

  void validate() const {
    detail::check_shape(A, n(), n(), "A");
    detail::check_shape(B, n(), m(), "B");
    detail::check_shape(F, n(), p(), "F");
    detail::check_size(Q.size(), states.size(), "Q", states);
    detail::check_shape(Sigma, n(), n(), "Sigma");
    if (C.cols() != n()) {
      throw Error(ErrorCode::DimensionMismatch, "output matrix C must have " + std::to_string(n()) +
                                                    " columns for state space " + states.describe());
    }
    for (Eigen::Index i = 0; i < n(); ++i) {
      for (Eigen::Index j = 0; j < n(); ++j) {
        if (i != j && Sigma(i, j) != 0.0) {
          throw Error(ErrorCode::InvalidParameter, "Sigma must be diagonal");
        }
      }
      if (Sigma(i, i) < 0.0) throw Error(ErrorCode::InvalidParameter, "Sigma entries must be >= 0");
    }
    if (!(delta_minutes >= 0.0)) throw Error(ErrorCode::InvalidParameter, "sampling time must be >= 0");
  }

  /// Same drift, noise removed.
  DiscreteModel deterministic() const {
    DiscreteModel out = *this;
    out.Sigma.setZero();
    return out;
  }
};

/// Output matrix selecting the named states.
inline Eigen::MatrixXd selector(const ChannelSpace& states, const std::vector<std::string>& names) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(names.size()),
                                            static_cast<Eigen::Index>(states.size()));
  for (std::size_t r = 0; r < names.size(); ++r) {
    auto k = states.find(names[r]);
    if (!k) throw Error(ErrorCode::DanglingChannel, "no state named '" + names[r] + "'");
    C(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*k)) = 1.0;
  }
  return C;
}

/// Zone temperatures (channels named T_z*) are the outputs.
inline Eigen::MatrixXd zone_output_matrix(const ChannelSpace& states) {
  std::vector<std::string> names;
  for (const auto& c : states) {
    if (c.name.rfind("T_z", 0) == 0) names.push_back(c.name);
  }
  return selector(states, names);
}

inline DiscreteModel forward_euler(const ContinuousModel& model, double delta) {
  model.validate();
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling time must be >= 0");
  if (!model.is_affine()) {
    throw Error(ErrorCode::NonAffine, "bilinear input '" + model.inputs[model.bilinear.front().input].name +
                                          "' must be frozen before discretization");
  }
  DiscreteModel d;
  d.states = model.states;
  d.inputs = model.inputs;
  d.disturbances = model.disturbances;
  d.A = Eigen::MatrixXd::Identity(model.n(), model.n()) + delta * model.A;
  d.B = delta * model.B;
  d.F = delta * model.F;
  d.Q = delta * model.q;
  d.Sigma = Eigen::MatrixXd::Zero(model.n(), model.n());
  d.C = zone_output_matrix(model.states);
  d.delta_minutes = delta;
  return d;
}

/// Drift as forward_euler; noise standard deviation sqrt(delta) * sigma.
inline DiscreteModel euler_maruyama(const ContinuousModel& model, double delta) {
  DiscreteModel d = forward_euler(model, delta);
  d.Sigma = (std::sqrt(delta) * model.sigma).asDiagonal();
  return d;
}

}  // namespace basbench
