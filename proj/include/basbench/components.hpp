#pragma once

// Constructors for the eight building-automation components and the
// discrete operating-mode machinery.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "basbench/dynamics.hpp"
#include "basbench/error.hpp"
#include "json.hpp"

namespace basbench {

enum class ComponentKind { Boiler, Valve, Mixer, AhuHeatingCoil, AhuAirDuct, Radiator, Zone, Collector };

inline constexpr std::array<ComponentKind, 8> kAllComponentKinds = {
    ComponentKind::Boiler,   ComponentKind::Valve,     ComponentKind::Mixer,
    ComponentKind::AhuHeatingCoil, ComponentKind::AhuAirDuct, ComponentKind::Radiator,
    ComponentKind::Zone,     ComponentKind::Collector};

inline std::string_view to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::Boiler: return "Boiler";
    case ComponentKind::Valve: return "Valve";
    case ComponentKind::Mixer: return "Mixer";
    case ComponentKind::AhuHeatingCoil: return "AhuHeatingCoil";
    case ComponentKind::AhuAirDuct: return "AhuAirDuct";
    case ComponentKind::Radiator: return "Radiator";
    case ComponentKind::Zone: return "Zone";
    case ComponentKind::Collector: return "Collector";
  }
  return "?";
}

inline ComponentKind component_kind_from_string(std::string_view s) {
  for (auto k : kAllComponentKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::UnknownId, "unknown component kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Parameters

struct Quantity {
  double value = 0.0;
  std::string unit;
};

/// Symbol -> value table. JSON form is flat: {"tau_sw[min]": 1.0, ...}; the
/// bracketed suffix is the unit and is optional.
class ComponentParams {
 public:
  ComponentParams() = default;
  ComponentParams(std::initializer_list<std::pair<const std::string, double>> values) {
    for (const auto& [k, v] : values) table_[k] = {v, ""};
  }

  ComponentParams& set(const std::string& symbol, double value, std::string unit = "") {
    table_[symbol] = {value, std::move(unit)};
    return *this;
  }

  bool has(std::string_view symbol) const { return table_.find(std::string(symbol)) != table_.end(); }

  double get(std::string_view symbol) const {
    auto it = table_.find(std::string(symbol));
    if (it == table_.end()) {
      throw Error(ErrorCode::MissingParameter, "missing parameter '" + std::string(symbol) + "'");
    }
    return it->second.value;
  }

  double get_or(std::string_view symbol, double fallback) const {
    auto it = table_.find(std::string(symbol));
    return it == table_.end() ? fallback : it->second.value;
  }

  /// Capacities, volumes, resistances and time constants must be > 0.
  double positive(std::string_view symbol) const {
    const double v = get(symbol);
    if (!(v > 0.0)) {
      throw Error(ErrorCode::InvalidParameter,
                  "parameter '" + std::string(symbol) + "' must be strictly positive");
    }
    return v;
  }

  double nonnegative_or_zero(std::string_view symbol) const {
    const double v = get_or(symbol, 0.0);
    if (v < 0.0) {
      throw Error(ErrorCode::InvalidParameter,
                  "parameter '" + std::string(symbol) + "' must be non-negative");
    }
    return v;
  }

  const std::map<std::string, Quantity>& table() const { return table_; }

  static ComponentParams from_json(const nlohmann::json& j) {
    ComponentParams p;
    for (const auto& [key, value] : j.items()) {
      if (!key.empty() && key.front() == '_') continue;  // comments / metadata
      if (!value.is_number()) {
        throw Error(ErrorCode::ParseError, "parameter '" + key + "' is not numeric");
      }
      std::string symbol = key;
      std::string unit;
      if (auto open = key.find('['); open != std::string::npos) {
        if (key.back() != ']') throw Error(ErrorCode::ParseError, "malformed unit suffix in '" + key + "'");
        symbol = key.substr(0, open);
        unit = key.substr(open + 1, key.size() - open - 2);
      }
      p.set(symbol, value.get<double>(), unit);
    }
    return p;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [symbol, q] : table_) {
      j[q.unit.empty() ? symbol : symbol + "[" + q.unit + "]"] = q.value;
    }
    return j;
  }

 private:
  std::map<std::string, Quantity> table_;
};

// ---------------------------------------------------------------------------
// Zone wiring. The resistor network behind the zone block is configurable;
// the default reproduces the coupling pattern of the two-room setup.

struct WallSpec {
  int id = 0;
  bool window = false;
  std::vector<int> zones;  // adjacent zones (1-based)
  std::string exterior;    // "T_out", "T_hall" or empty for interior walls
};

/// Direct air-to-air coupling of a zone to an external temperature channel
/// (e.g. the neighbouring zone of a separately instantiated block).
struct AdjacentSpec {
  int zone = 1;
  std::string channel;
  std::string resistance;  // parameter symbol
};

struct ZoneTopology {
  int zones = 2;
  int first_zone = 1;  // zone numbers are first_zone .. first_zone + zones - 1
  std::vector<WallSpec> walls;
  std::vector<AdjacentSpec> adjacent;
  /// When set, walls are not states: every wall sits at this temperature.
  std::optional<double> fixed_wall_temperature;

  static ZoneTopology two_room() {
    ZoneTopology t;
    t.zones = 2;
    t.walls = {{5, true, {1}, "T_hall"},
               {6, true, {1}, "T_out"},
               {2, false, {1, 2}, ""},
               {3, false, {2}, "T_hall"},
               {7, false, {2}, "T_out"}};
    return t;
  }

  static ZoneTopology two_room_fixed_walls(double wall_temperature) {
    ZoneTopology t = two_room();
    t.fixed_wall_temperature = wall_temperature;
    return t;
  }
};

// ---------------------------------------------------------------------------
// Discrete modes

enum class BoilerMode { On, Off };
enum class FanMode { Off, Medium, High };
enum class MixerMode { Open, Closed };
enum class ValveHealth { Healthy, Faulty };
enum class ValvePosition { FullyOpen, HalfOpen, Closed };

enum class ModeAxis { Boiler, Fan, Mixer, AhuCoilValve, Radiator1ValveHealth, Radiator2ValvePosition };

inline constexpr std::array<ModeAxis, 6> kAllModeAxes = {
    ModeAxis::Boiler, ModeAxis::Fan, ModeAxis::Mixer,
    ModeAxis::AhuCoilValve, ModeAxis::Radiator1ValveHealth, ModeAxis::Radiator2ValvePosition};

struct ModeConfig {
  BoilerMode boiler = BoilerMode::On;
  FanMode fan = FanMode::Off;
  MixerMode mixer = MixerMode::Open;
  ValveHealth ahu_coil_valve = ValveHealth::Healthy;
  ValveHealth radiator1_valve_health = ValveHealth::Healthy;
  ValvePosition radiator2_valve_position = ValvePosition::FullyOpen;

  auto operator<=>(const ModeConfig&) const = default;
};

/// Values the discrete modes map onto.
struct ModeSettings {
  double m_a_medium = 10.0;  // m^3/h
  double m_a_high = 15.0;    // m^3/h
  double stuck_flow = 0.0;   // flow of a faulty valve
};

/// Cartesian product over the selected axes; unselected axes keep their
/// default value. Order is lexicographic in axis declaration order.
inline std::vector<ModeConfig> enumerate_modes(const std::set<ModeAxis>& relevant) {
  std::vector<ModeConfig> out{ModeConfig{}};
  auto expand = [&](ModeAxis axis, int count, auto assign) {
    if (!relevant.count(axis)) return;
    std::vector<ModeConfig> next;
    next.reserve(out.size() * static_cast<std::size_t>(count));
    for (const auto& m : out) {
      for (int v = 0; v < count; ++v) {
        ModeConfig c = m;
        assign(c, v);
        next.push_back(c);
      }
    }
    out = std::move(next);
  };
  expand(ModeAxis::Boiler, 2, [](ModeConfig& c, int v) { c.boiler = static_cast<BoilerMode>(v); });
  expand(ModeAxis::Fan, 3, [](ModeConfig& c, int v) { c.fan = static_cast<FanMode>(v); });
  expand(ModeAxis::Mixer, 2, [](ModeConfig& c, int v) { c.mixer = static_cast<MixerMode>(v); });
  expand(ModeAxis::AhuCoilValve, 2,
         [](ModeConfig& c, int v) { c.ahu_coil_valve = static_cast<ValveHealth>(v); });
  expand(ModeAxis::Radiator1ValveHealth, 2,
         [](ModeConfig& c, int v) { c.radiator1_valve_health = static_cast<ValveHealth>(v); });
  expand(ModeAxis::Radiator2ValvePosition, 3, [](ModeConfig& c, int v) {
    c.radiator2_valve_position = static_cast<ValvePosition>(v);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Component instances

using ComponentModel = std::variant<ContinuousModel, AlgebraicMap>;

struct Component {
  std::string name;
  ComponentKind kind = ComponentKind::Zone;
  int index = 1;
  ComponentModel model;
  /// Active variant of an algebraic map (unused for dynamic components).
  std::string mode_tag;

  bool is_dynamic() const { return std::holds_alternative<ContinuousModel>(model); }
  const ContinuousModel& dynamics() const { return std::get<ContinuousModel>(model); }
  const AlgebraicMap& map() const { return std::get<AlgebraicMap>(model); }
};

namespace detail {

inline std::string idx(std::string_view base, int i) { return std::string(base) + std::to_string(i); }

inline ContinuousModel boiler(const ComponentParams& p) {
  const double tau = p.positive("tau_sw");
  auto m = ContinuousModel::zero({"T_sw_b"}, {}, {});
  m.A(0, 0) = -1.0 / tau;
  m.q(0) = p.get("k_b") / tau;
  m.sigma(0) = p.nonnegative_or_zero("sigma_sw");
  return m;
}

// Valve law w = tau^-1 exp(ln(tau) X) w_max. Index 0 is the AHU coil valve,
// i >= 1 the valve of radiator i.
inline AlgebraicMap valve(const ComponentParams& p, int index) {
  const double tau = p.positive("tau");
  const double w_max = p.get("w_max");
  const std::string suffix = index == 0 ? "_a" : idx("_r", index);
  AlgebraicMap m;
  m.inputs = ChannelSpace({Channel{"X" + suffix, Unit::Dimensionless}});
  m.outputs = ChannelSpace({Channel{"w" + suffix, Unit::MassFlow}});
  m.exogenous = {false};
  const double log_tau = std::log(tau);
  auto law_at = [&](double x) { return std::exp(log_tau * x) * w_max / tau; };
  auto constant = [&](std::string tag, double value) {
    return MapVariant{std::move(tag), MapLaw::Affine, Eigen::MatrixXd::Zero(1, 1),
                      Eigen::VectorXd::Constant(1, value)};
  };
  m.variants.push_back(MapVariant{"healthy", MapLaw::Exponential,
                                  Eigen::MatrixXd::Constant(1, 1, log_tau),
                                  Eigen::VectorXd::Constant(1, w_max / tau)});
  m.variants.push_back(constant("faulty", p.get_or("w_stuck", 0.0)));
  m.variants.push_back(constant("fully_open", law_at(1.0)));
  m.variants.push_back(constant("half_open", law_at(0.5)));
  m.variants.push_back(constant("closed", law_at(0.0)));
  return m;
}

inline AlgebraicMap mixer(const ComponentParams& p) {
  const int n = static_cast<int>(p.get_or("n", 2));
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "mixer needs n >= 1 zones");
  std::vector<Channel> in{{"T_out", Unit::Celsius}};
  for (int i = 1; i <= n; ++i) in.push_back({idx("T_z", i), Unit::Celsius});
  AlgebraicMap m;
  m.inputs = ChannelSpace(std::move(in));
  m.outputs = ChannelSpace({Channel{"T_d", Unit::Celsius}});
  m.exogenous.assign(m.inputs.size(), true);
  m.convex = true;
  auto ratio = [&](std::string tag, double u_d) {
    Eigen::MatrixXd M(1, n + 1);
    M(0, 0) = u_d;
    for (int i = 1; i <= n; ++i) M(0, i) = (1.0 - u_d) / n;
    return MapVariant{std::move(tag), MapLaw::Affine, M, Eigen::VectorXd::Zero(1)};
  };
  m.variants.push_back(ratio("open", 1.0));
  m.variants.push_back(ratio("closed", 0.0));
  if (p.has("u_d")) {
    const double u = p.get("u_d");
    if (u < 0.0 || u > 1.0) throw Error(ErrorCode::InvalidParameter, "u_d must lie in [0,1]");
    m.variants.push_back(ratio("ratio", u));
  }
  return m;
}

inline AlgebraicMap collector(const ComponentParams& p) {
  const int n = static_cast<int>(p.get_or("n", 2));
  const double u_v = p.get("u_v");
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "collector needs n >= 1 radiators");
  if (u_v < 0.0 || u_v > 1.0) throw Error(ErrorCode::InvalidParameter, "u_v must lie in [0,1]");
  std::vector<Channel> in{{"T_rw_a", Unit::Celsius}};
  for (int i = 1; i <= n; ++i) in.push_back({idx("T_rw_r", i), Unit::Celsius});
  AlgebraicMap m;
  m.inputs = ChannelSpace(std::move(in));
  m.outputs = ChannelSpace({Channel{"T_rw_b", Unit::Celsius}});
  m.exogenous.assign(m.inputs.size(), true);
  m.convex = true;
  Eigen::MatrixXd M(1, n + 1);
  M(0, 0) = u_v;
  for (int i = 1; i <= n; ++i) M(0, i) = (1.0 - u_v) / n;
  m.variants.push_back({"default", MapLaw::Affine, M, Eigen::VectorXd::Zero(1)});
  return m;
}

inline ContinuousModel ahu_coil(const ComponentParams& p) {
  const double C_pw = p.positive("C_pw");
  const double cap = C_pw * p.positive("rho_h") * p.positive("V_a");
  const double UA = p.get("UA_a");
  auto m = ContinuousModel::zero({"T_rw_a"}, ChannelSpace({Channel{"w_a", Unit::MassFlow}}),
                                 {"T_sw_b", "T_d"});
  m.A(0, 0) = -UA / cap;
  m.F(0, 1) = UA / cap;
  auto& flow = m.bilinear_for(0);
  flow.state(0, 0) = -C_pw / cap;
  flow.disturbances(0, 0) = C_pw / cap;
  m.sigma(0) = p.nonnegative_or_zero("sigma_rw_a");
  return m;
}

inline ContinuousModel air_duct(const ComponentParams& p, int i) {
  const double cap = p.positive("C_a") * p.positive("rho_a") * p.positive("V_a");
  const double C_pa = p.positive("C_pa");
  const double UA = p.get("UA_a");
  auto m = ContinuousModel::zero({idx("T_sa", i)}, ChannelSpace({Channel{"m_a", Unit::VolumeFlow}}),
                                 {"T_d", idx("T_z", i)});
  m.A(0, 0) = -UA / cap;
  m.F(0, 1) = UA / cap;
  auto& fan = m.bilinear_for(0);
  fan.state(0, 0) = -C_pa / cap;
  fan.disturbances(0, 0) = C_pa / cap;
  m.sigma(0) = p.nonnegative_or_zero("sigma_sa");
  return m;
}

inline ContinuousModel radiator(const ComponentParams& p, int i) {
  const double C_pw = p.positive("C_pw");
  const double cap = C_pw * p.positive("rho_h") * p.positive("V_r");
  const double UA = p.get("UA_r");
  auto m = ContinuousModel::zero({idx("T_rw_r", i)},
                                 ChannelSpace({Channel{idx("w_r", i), Unit::MassFlow}}),
                                 {"T_sw_b", idx("T_z", i)});
  m.A(0, 0) = -UA / cap;
  m.F(0, 1) = UA / cap;
  auto& flow = m.bilinear_for(0);
  flow.state(0, 0) = -C_pw / cap;
  flow.disturbances(0, 0) = C_pw / cap;
  m.sigma(0) = p.nonnegative_or_zero("sigma_rw_r");
  return m;
}

// Zone block: zone air temperatures followed by wall temperatures (unless
// walls are fixed). Heat gains:
//   Q_rw,r = P_rad (alpha2 (T_rw,r - T_z) + alpha1)
//   Q_occ  = mu CO2 + beta1
//   Q_sa   = m_a C_pa (T_sa - T_z)
//   Q_rw,a = alpha3 (T_rw,a - T_w)
//   Q_solar = alpha0 A T_out + beta2   (walls with windows)
inline ContinuousModel zone(const ComponentParams& p, const ZoneTopology& topo) {
  const int nz = topo.zones;
  if (nz < 1) throw Error(ErrorCode::InvalidParameter, "zone block needs at least one zone");
  const bool dynamic_walls = !topo.fixed_wall_temperature.has_value();
  std::vector<int> ids;
  for (int i = 0; i < nz; ++i) ids.push_back(topo.first_zone + i);
  auto known_zone = [&](int z) { return std::find(ids.begin(), ids.end(), z) != ids.end(); };

  std::vector<std::string> states;
  for (int z : ids) states.push_back(idx("T_z", z));
  if (dynamic_walls) {
    for (const auto& w : topo.walls) states.push_back(idx("T_w", w.id));
  }
  std::vector<Channel> inputs{{"m_a", Unit::VolumeFlow}};
  for (int z : ids) inputs.push_back({idx("T_sa", z), Unit::Celsius});
  std::vector<Channel> dist{{"T_out", Unit::Celsius}, {"T_hall", Unit::Celsius}};
  for (int z : ids) dist.push_back({idx("CO2_", z), Unit::Ppm});
  for (int z : ids) dist.push_back({idx("T_rw_r", z), Unit::Celsius});
  if (dynamic_walls) dist.push_back({"T_rw_a", Unit::Celsius});
  for (const auto& a : topo.adjacent) {
    if (std::none_of(dist.begin(), dist.end(), [&](const Channel& c) { return c.name == a.channel; })) {
      dist.push_back({a.channel, Unit::Celsius});
    }
  }

  auto m = ContinuousModel::zero(ChannelSpace::of(states), ChannelSpace(std::move(inputs)),
                                 ChannelSpace(std::move(dist)));
  auto s = [&](const std::string& n) { return static_cast<Eigen::Index>(*m.states.find(n)); };
  auto u = [&](const std::string& n) { return static_cast<Eigen::Index>(*m.inputs.find(n)); };
  auto d = [&](const std::string& n) { return static_cast<Eigen::Index>(*m.disturbances.find(n)); };
  auto& fan = m.bilinear_for(0);

  const double C_pa = p.positive("C_pa");
  const double alpha1 = p.get_or("alpha1", 0.0);
  const double alpha2 = p.get_or("alpha2", 0.0);

  for (int z : ids) {
    const auto zi = s(idx("T_z", z));
    const double C = p.positive(idx("C_z", z));
    const double P_rad = p.get_or(idx("P_rad", z), 0.0);
    for (const auto& w : topo.walls) {
      if (std::find(w.zones.begin(), w.zones.end(), z) == w.zones.end()) continue;
      const double R = p.positive(idx("R_w", w.id));
      m.A(zi, zi) -= 1.0 / (R * C);
      if (dynamic_walls) {
        m.A(zi, s(idx("T_w", w.id))) += 1.0 / (R * C);
      } else {
        m.q(zi) += *topo.fixed_wall_temperature / (R * C);
      }
    }
    for (const auto& a : topo.adjacent) {
      if (a.zone != z) continue;
      const double R = p.positive(a.resistance);
      m.A(zi, zi) -= 1.0 / (R * C);
      m.F(zi, d(a.channel)) += 1.0 / (R * C);
    }
    m.A(zi, zi) -= P_rad * alpha2 / C;
    m.F(zi, d(idx("T_rw_r", z))) += P_rad * alpha2 / C;
    m.q(zi) += (P_rad * alpha1 + p.get_or(idx("beta1_", z), 0.0)) / C;
    m.F(zi, d(idx("CO2_", z))) += p.get_or(idx("mu", z), 0.0) / C;
    fan.state(zi, zi) -= C_pa / C;
    fan.inputs(zi, u(idx("T_sa", z))) += C_pa / C;
    m.sigma(zi) = p.nonnegative_or_zero(idx("sigma_z", z));
  }

  if (dynamic_walls) {
    const double alpha0 = p.get_or("alpha0", 0.0);
    const double alpha3 = p.get_or("alpha3", 0.0);
    const double beta2 = p.get_or("beta2", 0.0);
    for (const auto& w : topo.walls) {
      const auto wi = s(idx("T_w", w.id));
      const double C = p.positive(idx("C_w", w.id));
      for (int z : w.zones) {
        if (!known_zone(z)) throw Error(ErrorCode::InvalidParameter, "wall references unknown zone");
        const double R = p.positive(idx("R_w", w.id));
        m.A(wi, wi) -= 1.0 / (R * C);
        m.A(wi, s(idx("T_z", z))) += 1.0 / (R * C);
      }
      if (!w.exterior.empty()) {
        const double R = p.positive(idx("R_out_w", w.id));
        m.A(wi, wi) -= 1.0 / (R * C);
        m.F(wi, d(w.exterior)) += 1.0 / (R * C);
      }
      m.A(wi, wi) -= alpha3 / C;
      m.F(wi, d("T_rw_a")) += alpha3 / C;
      if (w.window) {
        const int z = w.zones.empty() ? ids.front() : w.zones.front();
        m.F(wi, d("T_out")) += alpha0 * p.get_or(idx("A", z), 0.0) / C;
        m.q(wi) += beta2 / C;
      }
      m.sigma(wi) = p.nonnegative_or_zero(idx("sigma_w", w.id));
    }
  }
  return m;
}

}  // namespace detail

/// Table-of-components constructor. `index` selects the instance (zone or
/// radiator number; valve 0 is the AHU coil valve). Zones default to the
/// two-room resistor network.
inline ComponentModel instantiate_component(ComponentKind kind, const ComponentParams& params,
                                            int index = 1,
                                            const ZoneTopology& topology = ZoneTopology::two_room()) {
  ComponentModel out;
  switch (kind) {
    case ComponentKind::Boiler: out = detail::boiler(params); break;
    case ComponentKind::Valve: out = detail::valve(params, index); break;
    case ComponentKind::Mixer: out = detail::mixer(params); break;
    case ComponentKind::AhuHeatingCoil: out = detail::ahu_coil(params); break;
    case ComponentKind::AhuAirDuct: out = detail::air_duct(params, index); break;
    case ComponentKind::Radiator: out = detail::radiator(params, index); break;
    case ComponentKind::Zone: out = detail::zone(params, topology); break;
    case ComponentKind::Collector: out = detail::collector(params); break;
  }
  std::visit([](const auto& m) { m.validate(); }, out);
  return out;
}

inline Component make_component(std::string name, ComponentKind kind, const ComponentParams& params,
                                int index = 1,
                                const ZoneTopology& topology = ZoneTopology::two_room()) {
  Component c{std::move(name), kind, index, instantiate_component(kind, params, index, topology), ""};
  if (!c.is_dynamic()) {
    const auto& map = c.map();
    // Valves start in their healthy law, mixers open, collectors default.
    c.mode_tag = map.variants.front().tag;
  }
  return c;
}

/// Valve law on its own, for callers that need w(X) without a map.
inline double valve_flow(double tau, double w_max, double position) {
  return std::exp(std::log(tau) * position) * w_max / tau;
}

/// Specialize a component to a discrete configuration.
///   boiler Off  -> drift identically zero
///   fan level   -> m_a frozen at 0 / medium / high (duct and zone)
///   mixer       -> "open" (u_d = 1) or "closed" (u_d = 0)
///   valves      -> healthy law, faulty (stuck flow) or fixed position
inline Component apply_mode(const Component& component, const ModeConfig& mode,
                            const ModeSettings& settings = {}) {
  Component out = component;
  switch (component.kind) {
    case ComponentKind::Boiler: {
      if (mode.boiler == BoilerMode::Off) {
        auto m = component.dynamics();
        m.A.setZero();
        m.q.setZero();
        m.sigma.setZero();
        out.model = std::move(m);
      }
      break;
    }
    case ComponentKind::AhuAirDuct:
    case ComponentKind::Zone: {
      const auto& m = component.dynamics();
      if (m.inputs.contains("m_a")) {
        const double level = mode.fan == FanMode::Off      ? 0.0
                             : mode.fan == FanMode::Medium ? settings.m_a_medium
                                                           : settings.m_a_high;
        out.model = freeze_channel(m, "m_a", level);
      }
      break;
    }
    case ComponentKind::Mixer:
      out.mode_tag = mode.mixer == MixerMode::Open ? "open" : "closed";
      break;
    case ComponentKind::Valve: {
      auto map = component.map();
      std::string tag;
      if (component.index == 0 || component.index == 1) {
        const auto health = component.index == 0 ? mode.ahu_coil_valve : mode.radiator1_valve_health;
        tag = health == ValveHealth::Healthy ? "healthy" : "faulty";
      } else {
        switch (mode.radiator2_valve_position) {
          case ValvePosition::FullyOpen: tag = "fully_open"; break;
          case ValvePosition::HalfOpen: tag = "half_open"; break;
          case ValvePosition::Closed: tag = "closed"; break;
        }
      }
      for (auto& v : map.variants) {
        if (v.tag == "faulty") v.c.setConstant(settings.stuck_flow);
      }
      out.model = std::move(map);
      out.mode_tag = tag;
      break;
    }
    default:
      break;
  }
  return out;
}

/// Load the per-kind parameter sections of a parameter document
/// ({"Boiler": {...}, "Zone": {...}, ...}).
inline std::map<ComponentKind, ComponentParams> params_by_kind(const nlohmann::json& doc) {
  std::map<ComponentKind, ComponentParams> out;
  for (const auto& [key, value] : doc.items()) {
    if (!key.empty() && key.front() == '_') continue;
    out[component_kind_from_string(key)] = ComponentParams::from_json(value);
  }
  return out;
}

}  // namespace basbench
