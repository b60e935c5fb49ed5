#pragma once

// Continuous-time affine-bilinear dynamics and static (algebraic) maps.
// Time is measured in minutes everywhere; rate matrices are in 1/min.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "basbench/error.hpp"

namespace basbench {

enum class Unit { Celsius, VolumeFlow, MassFlow, Ppm, Dimensionless };

inline std::string_view to_string(Unit u) {
  switch (u) {
    case Unit::Celsius: return "degC";
    case Unit::VolumeFlow: return "m3/h";
    case Unit::MassFlow: return "kg/s";
    case Unit::Ppm: return "ppm";
    case Unit::Dimensionless: return "1";
  }
  return "1";
}

inline std::optional<Unit> unit_from_string(std::string_view s) {
  if (s == "degC" || s == "C" || s == "°C") return Unit::Celsius;
  if (s == "m3/h" || s == "m^3/h") return Unit::VolumeFlow;
  if (s == "kg/s") return Unit::MassFlow;
  if (s == "ppm") return Unit::Ppm;
  if (s == "1" || s == "-") return Unit::Dimensionless;
  return std::nullopt;
}

struct Channel {
  std::string name;
  Unit unit = Unit::Celsius;

  bool operator==(const Channel&) const = default;
};

/// Ordered, uniquely named set of signal channels.
class ChannelSpace {
 public:
  ChannelSpace() = default;

  explicit ChannelSpace(std::vector<Channel> channels) : channels_(std::move(channels)) {
    std::unordered_set<std::string> seen;
    for (const auto& c : channels_) {
      if (!seen.insert(c.name).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate channel name '" + c.name + "'");
      }
    }
  }

  ChannelSpace(std::initializer_list<std::string> names, Unit unit = Unit::Celsius)
      : ChannelSpace(make(names, unit)) {}

  static ChannelSpace of(const std::vector<std::string>& names, Unit unit = Unit::Celsius) {
    std::vector<Channel> cs;
    cs.reserve(names.size());
    for (const auto& n : names) cs.push_back({n, unit});
    return ChannelSpace(std::move(cs));
  }

  std::size_t size() const noexcept { return channels_.size(); }
  bool empty() const noexcept { return channels_.empty(); }
  const Channel& operator[](std::size_t i) const { return channels_.at(i); }
  auto begin() const { return channels_.begin(); }
  auto end() const { return channels_.end(); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      if (channels_[i].name == name) return i;
    }
    return std::nullopt;
  }

  bool contains(std::string_view name) const { return find(name).has_value(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(channels_.size());
    for (const auto& c : channels_) out.push_back(c.name);
    return out;
  }

  /// Copy without the channel at `index`.
  ChannelSpace without(std::size_t index) const {
    std::vector<Channel> cs = channels_;
    cs.erase(cs.begin() + static_cast<std::ptrdiff_t>(index));
    return ChannelSpace(std::move(cs));
  }

  std::string describe() const {
    std::string s = "(";
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      if (i) s += ", ";
      s += channels_[i].name;
    }
    return s + ")";
  }

  bool operator==(const ChannelSpace&) const = default;

 private:
  static std::vector<Channel> make(std::initializer_list<std::string> names, Unit unit) {
    std::vector<Channel> cs;
    for (const auto& n : names) cs.push_back({n, unit});
    return cs;
  }

  std::vector<Channel> channels_;
};

namespace detail {

inline void check_size(Eigen::Index got, std::size_t expected, std::string_view what,
                       const ChannelSpace& space) {
  if (static_cast<std::size_t>(got) != expected) {
    std::ostringstream os;
    os << what << " vector has size " << got << ", expected " << expected << " for channel space "
       << space.describe();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

inline void check_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                        std::string_view what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "matrix " << what << " is " << m.rows() << "x" << m.cols() << ", expected " << rows
       << "x" << cols;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

inline Eigen::MatrixXd drop_column(const Eigen::MatrixXd& m, Eigen::Index col) {
  Eigen::MatrixXd out(m.rows(), m.cols() - 1);
  out.leftCols(col) = m.leftCols(col);
  out.rightCols(m.cols() - col - 1) = m.rightCols(m.cols() - col - 1);
  return out;
}

}  // namespace detail

/// Contribution u_k * (state * x + inputs * u + disturbances * d) to the drift.
/// The inner product may reference inputs and disturbances as well as states
/// because component equations multiply a flow by a difference of two
/// coupling temperatures (e.g. m_a * (T_d - T_sa)).
struct BilinearTerm {
  std::size_t input = 0;
  Eigen::MatrixXd state;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd disturbances;
};

/// dx = (A x + B u + F d + q + sum_k u_k (N_k x + G_k u + H_k d)) dt + diag(sigma) dW
struct ContinuousModel {
  ChannelSpace states;
  ChannelSpace inputs;
  ChannelSpace disturbances;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd F;
  Eigen::VectorXd q;
  std::vector<BilinearTerm> bilinear;
  Eigen::VectorXd sigma;

  static ContinuousModel zero(ChannelSpace states, ChannelSpace inputs, ChannelSpace disturbances) {
    ContinuousModel m;
    const auto n = static_cast<Eigen::Index>(states.size());
    const auto nu = static_cast<Eigen::Index>(inputs.size());
    const auto nd = static_cast<Eigen::Index>(disturbances.size());
    m.states = std::move(states);
    m.inputs = std::move(inputs);
    m.disturbances = std::move(disturbances);
    m.A = Eigen::MatrixXd::Zero(n, n);
    m.B = Eigen::MatrixXd::Zero(n, nu);
    m.F = Eigen::MatrixXd::Zero(n, nd);
    m.q = Eigen::VectorXd::Zero(n);
    m.sigma = Eigen::VectorXd::Zero(n);
    return m;
  }

  Eigen::Index n() const { return static_cast<Eigen::Index>(states.size()); }
  Eigen::Index m() const { return static_cast<Eigen::Index>(inputs.size()); }
  Eigen::Index p() const { return static_cast<Eigen::Index>(disturbances.size()); }

  bool is_affine() const { return bilinear.empty(); }

  /// Bilinear term for input k, created on demand.
  BilinearTerm& bilinear_for(std::size_t k) {
    for (auto& t : bilinear) {
      if (t.input == k) return t;
    }
    bilinear.push_back({k, Eigen::MatrixXd::Zero(n(), n()), Eigen::MatrixXd::Zero(n(), m()),
                        Eigen::MatrixXd::Zero(n(), p())});
    return bilinear.back();
  }

  void validate() const {
    detail::check_shape(A, n(), n(), "A");
    detail::check_shape(B, n(), m(), "B");
    detail::check_shape(F, n(), p(), "F");
    detail::check_size(q.size(), states.size(), "constant term", states);
    detail::check_size(sigma.size(), states.size(), "noise intensity", states);
    if ((sigma.array() < 0.0).any()) {
      throw Error(ErrorCode::InvalidParameter, "noise intensities must be non-negative");
    }
    for (const auto& t : bilinear) {
      if (t.input >= inputs.size()) {
        throw Error(ErrorCode::DimensionMismatch, "bilinear term references input index " +
                                                      std::to_string(t.input) + " outside " +
                                                      inputs.describe());
      }
      detail::check_shape(t.state, n(), n(), "bilinear state coupling");
      detail::check_shape(t.inputs, n(), m(), "bilinear input coupling");
      detail::check_shape(t.disturbances, n(), p(), "bilinear disturbance coupling");
    }
  }
};

inline Eigen::VectorXd eval_drift(const ContinuousModel& model, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, const Eigen::VectorXd& d) {
  detail::check_size(x.size(), model.states.size(), "state", model.states);
  detail::check_size(u.size(), model.inputs.size(), "input", model.inputs);
  detail::check_size(d.size(), model.disturbances.size(), "disturbance", model.disturbances);
  Eigen::VectorXd dx = model.A * x + model.B * u + model.F * d + model.q;
  for (const auto& t : model.bilinear) {
    dx += u(static_cast<Eigen::Index>(t.input)) * (t.state * x + t.inputs * u + t.disturbances * d);
  }
  return dx;
}

/// Replace an input or disturbance channel by a constant, folding every term
/// it appears in (including bilinear products) into the remaining matrices.
inline ContinuousModel freeze_channel(const ContinuousModel& model, std::string_view name,
                                      double value) {
  ContinuousModel out = model;
  if (auto k = model.inputs.find(name)) {
    const auto col = static_cast<Eigen::Index>(*k);
    out.q += value * model.B.col(col);
    std::vector<BilinearTerm> kept;
    for (const auto& t : model.bilinear) {
      if (t.input == *k) {
        // value * (N x + G u + H d); the u_k entry of G u becomes value * value.
        out.A += value * t.state;
        out.B += value * t.inputs;
        out.F += value * t.disturbances;
        out.q += value * value * t.inputs.col(col);
      } else {
        // u_j * G[:,k] * value is linear in u_j.
        out.B.col(static_cast<Eigen::Index>(t.input)) += value * t.inputs.col(col);
        kept.push_back(t);
      }
    }
    out.B = detail::drop_column(out.B, col);
    for (auto& t : kept) {
      t.inputs = detail::drop_column(t.inputs, col);
      if (t.input > *k) --t.input;
    }
    out.bilinear = std::move(kept);
    out.inputs = model.inputs.without(*k);
    return out;
  }
  if (auto k = model.disturbances.find(name)) {
    const auto col = static_cast<Eigen::Index>(*k);
    out.q += value * model.F.col(col);
    for (auto& t : out.bilinear) {
      out.B.col(static_cast<Eigen::Index>(t.input)) += value * t.disturbances.col(col);
      t.disturbances = detail::drop_column(t.disturbances, col);
    }
    out.F = detail::drop_column(out.F, col);
    out.disturbances = model.disturbances.without(*k);
    return out;
  }
  throw Error(ErrorCode::DanglingChannel,
              "cannot freeze unknown channel '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Algebraic maps

enum class MapLaw {
  Affine,       // out = M in + c
  Exponential,  // out = c .* exp(M in)
};

struct MapVariant {
  std::string tag;
  MapLaw law = MapLaw::Affine;
  Eigen::MatrixXd M;
  Eigen::VectorXd c;
};

/// Static input/output relation with discrete-mode variants.
struct AlgebraicMap {
  ChannelSpace inputs;
  ChannelSpace outputs;
  /// Per input: true when the channel is exogenous rather than a control.
  std::vector<bool> exogenous;
  std::vector<MapVariant> variants;
  /// Convex-combination maps (mixer, collector): every affine variant has
  /// non-negative rows summing to one and a zero offset.
  bool convex = false;

  const MapVariant& variant(std::string_view tag) const {
    for (const auto& v : variants) {
      if (v.tag == tag) return v;
    }
    std::string known;
    for (const auto& v : variants) known += (known.empty() ? "" : ", ") + v.tag;
    throw Error(ErrorCode::UnknownMode,
                "unknown mode '" + std::string(tag) + "' (declared: " + known + ")");
  }

  bool has_variant(std::string_view tag) const {
    return std::any_of(variants.begin(), variants.end(),
                       [&](const MapVariant& v) { return v.tag == tag; });
  }

  bool is_exogenous(std::size_t i) const { return i < exogenous.size() && exogenous[i]; }

  void validate() const {
    if (variants.empty()) throw Error(ErrorCode::InvalidArgument, "algebraic map has no variants");
    const auto ni = static_cast<Eigen::Index>(inputs.size());
    const auto no = static_cast<Eigen::Index>(outputs.size());
    for (const auto& v : variants) {
      detail::check_shape(v.M, no, ni, "variant '" + v.tag + "'");
      detail::check_size(v.c.size(), outputs.size(), "offset", outputs);
      if (convex && v.law == MapLaw::Affine) {
        for (Eigen::Index r = 0; r < no; ++r) {
          if (std::abs(v.M.row(r).sum() - 1.0) > 1e-12 || (v.M.row(r).array() < 0.0).any() ||
              v.c(r) != 0.0) {
            throw Error(ErrorCode::InvalidParameter,
                        "variant '" + v.tag + "' is not a convex combination");
          }
        }
      }
    }
  }
};

inline Eigen::VectorXd eval_algebraic(const AlgebraicMap& map, std::string_view mode,
                                      const Eigen::VectorXd& in) {
  const MapVariant& v = map.variant(mode);
  detail::check_size(in.size(), map.inputs.size(), "input", map.inputs);
  if (v.law == MapLaw::Exponential) {
    return (v.c.array() * (v.M * in).array().exp()).matrix();
  }
  return v.M * in + v.c;
}

}  // namespace basbench
