#pragma once

// Port-based composition of components into a global model, and flattening
// of the composite into a single ContinuousModel.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basbench/components.hpp"
#include "basbench/dynamics.hpp"
#include "basbench/error.hpp"
#include "json.hpp"

namespace basbench {

struct Endpoint {
  std::string component;
  std::string channel;

  bool operator==(const Endpoint&) const = default;
  auto operator<=>(const Endpoint&) const = default;
};

struct Connection {
  Endpoint from;  // producer: a state of a dynamic component or an algebraic output
  Endpoint to;    // consumer: an input/disturbance of a dynamic component or an algebraic input
};

enum class ChannelRole { Control, Exogenous };

/// Renames an unbound consumer channel in the composite's interface. Several
/// consumers aliased to the same global name share one channel.
struct Alias {
  Endpoint local;
  std::string global;
};

struct Wiring {
  std::vector<Connection> connections;
  std::vector<Alias> aliases;
  /// Role overrides for unbound channels, keyed by global name.
  std::map<std::string, ChannelRole> roles;

  Wiring& link(std::string from_component, std::string from_channel, std::string to_component,
               std::string to_channel) {
    connections.push_back({{std::move(from_component), std::move(from_channel)},
                           {std::move(to_component), std::move(to_channel)}});
    return *this;
  }

  Wiring& alias(std::string component, std::string channel, std::string global) {
    aliases.push_back({{std::move(component), std::move(channel)}, std::move(global)});
    return *this;
  }
};

/// Where a consumer channel reads its value from.
struct Source {
  enum class Kind { State, Input, Disturbance, Algebraic };
  Kind kind = Kind::Input;
  std::size_t index = 0;      // global index (State/Input/Disturbance) or output row
  std::size_t component = 0;  // producing component (Algebraic only)
};

struct CompositeModel {
  std::vector<Component> components;
  Wiring wiring;
  ChannelSpace states;
  ChannelSpace inputs;
  ChannelSpace disturbances;
  /// Owning component of every global state.
  std::vector<std::string> state_owner;
  /// First global state index of each component (dynamic components only).
  std::vector<std::size_t> state_offset;
  /// Per component: sources of its inputs, then (dynamic only) of its disturbances.
  std::vector<std::vector<Source>> input_sources;
  std::vector<std::vector<Source>> disturbance_sources;
  /// Algebraic components in evaluation order.
  std::vector<std::size_t> algebraic_order;

  std::optional<std::size_t> component_index(std::string_view name) const {
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (components[i].name == name) return i;
    }
    return std::nullopt;
  }
};

namespace detail {

struct UnboundChannel {
  Channel channel;
  ChannelRole role;
  bool overridden;
};

inline void register_unbound(std::vector<UnboundChannel>& list, const std::string& global, Unit unit,
                             ChannelRole role, const Wiring& wiring) {
  const auto over = wiring.roles.find(global);
  const bool overridden = over != wiring.roles.end();
  if (overridden) role = over->second;
  for (auto& u : list) {
    if (u.channel.name != global) continue;
    if (u.role != role) {
      throw Error(ErrorCode::InvalidArgument,
                  "channel '" + global +
                      "' is used both as a control and as an exogenous signal; declare its role");
    }
    return;
  }
  list.push_back({{global, unit}, role, overridden});
}

}  // namespace detail

/// Build the composite: union of component states (declaration order),
/// explicit connections, and the remaining unbound channels merged by name.
inline CompositeModel connect(std::vector<Component> components, Wiring wiring) {
  CompositeModel cm;
  const std::size_t nc = components.size();
  {
    std::set<std::string> names;
    for (const auto& c : components) {
      if (!names.insert(c.name).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate component name '" + c.name + "'");
      }
    }
  }
  cm.components = std::move(components);
  cm.wiring = std::move(wiring);
  const auto& comps = cm.components;

  std::vector<Channel> states;
  cm.state_offset.assign(nc, 0);
  for (std::size_t i = 0; i < nc; ++i) {
    if (!comps[i].is_dynamic()) continue;
    cm.state_offset[i] = states.size();
    for (const auto& ch : comps[i].dynamics().states) {
      if (std::any_of(states.begin(), states.end(), [&](const Channel& c) { return c.name == ch.name; })) {
        throw Error(ErrorCode::InvalidArgument, "state '" + ch.name + "' declared by two components");
      }
      states.push_back(ch);
      cm.state_owner.push_back(comps[i].name);
    }
  }
  cm.states = ChannelSpace(std::move(states));

  auto lookup = [&](const std::string& name) -> std::size_t {
    auto idx = cm.component_index(name);
    if (!idx) throw Error(ErrorCode::DanglingChannel, "unknown component '" + name + "'");
    return *idx;
  };

  // Producers.
  std::map<Endpoint, Source> bound;
  std::vector<std::set<std::size_t>> feeds(nc);  // algebraic producer -> algebraic consumers
  for (const auto& conn : cm.wiring.connections) {
    const std::size_t pi = lookup(conn.from.component);
    const auto& prod = comps[pi];
    Source src;
    if (prod.is_dynamic()) {
      auto k = prod.dynamics().states.find(conn.from.channel);
      if (!k) {
        throw Error(ErrorCode::DanglingChannel, "component '" + prod.name + "' has no state '" +
                                                    conn.from.channel + "'");
      }
      src = {Source::Kind::State, cm.state_offset[pi] + *k, pi};
    } else {
      auto k = prod.map().outputs.find(conn.from.channel);
      if (!k) {
        throw Error(ErrorCode::DanglingChannel, "component '" + prod.name + "' has no output '" +
                                                    conn.from.channel + "'");
      }
      src = {Source::Kind::Algebraic, *k, pi};
    }
    const std::size_t ci = lookup(conn.to.component);
    const auto& cons = comps[ci];
    const bool exists = cons.is_dynamic()
                            ? (cons.dynamics().inputs.contains(conn.to.channel) ||
                               cons.dynamics().disturbances.contains(conn.to.channel))
                            : cons.map().inputs.contains(conn.to.channel);
    if (!exists) {
      throw Error(ErrorCode::DanglingChannel, "component '" + cons.name + "' has no input '" +
                                                  conn.to.channel + "'");
    }
    if (!bound.emplace(conn.to, src).second) {
      throw Error(ErrorCode::DuplicateBinding, "input '" + conn.to.channel + "' of '" + cons.name +
                                                   "' has more than one producer");
    }
    if (!prod.is_dynamic() && !cons.is_dynamic()) feeds[pi].insert(ci);
  }

  std::map<Endpoint, std::string> alias_of;
  for (const auto& a : cm.wiring.aliases) {
    const std::size_t ci = lookup(a.local.component);
    const auto& cons = comps[ci];
    const bool exists = cons.is_dynamic()
                            ? (cons.dynamics().inputs.contains(a.local.channel) ||
                               cons.dynamics().disturbances.contains(a.local.channel))
                            : cons.map().inputs.contains(a.local.channel);
    if (!exists) {
      throw Error(ErrorCode::DanglingChannel, "alias refers to unknown channel '" + a.local.channel +
                                                  "' of '" + cons.name + "'");
    }
    if (bound.count(a.local)) {
      throw Error(ErrorCode::DuplicateBinding,
                  "channel '" + a.local.channel + "' of '" + cons.name + "' is both connected and aliased");
    }
    alias_of[a.local] = a.global;
  }

  // Unbound channels, merged by global name in order of first appearance.
  std::vector<detail::UnboundChannel> unbound;
  auto visit_consumers = [&](auto&& fn) {
    for (std::size_t i = 0; i < nc; ++i) {
      const auto& c = comps[i];
      if (c.is_dynamic()) {
        const auto& m = c.dynamics();
        for (std::size_t k = 0; k < m.inputs.size(); ++k) fn(i, false, k, m.inputs[k], ChannelRole::Control);
        for (std::size_t k = 0; k < m.disturbances.size(); ++k) {
          fn(i, true, k, m.disturbances[k], ChannelRole::Exogenous);
        }
      } else {
        const auto& m = c.map();
        for (std::size_t k = 0; k < m.inputs.size(); ++k) {
          fn(i, false, k, m.inputs[k], m.is_exogenous(k) ? ChannelRole::Exogenous : ChannelRole::Control);
        }
      }
    }
  };
  auto global_name = [&](std::size_t i, const Channel& ch) {
    auto it = alias_of.find({comps[i].name, ch.name});
    return it == alias_of.end() ? ch.name : it->second;
  };
  visit_consumers([&](std::size_t i, bool, std::size_t, const Channel& ch, ChannelRole role) {
    if (bound.count({comps[i].name, ch.name})) return;
    detail::register_unbound(unbound, global_name(i, ch), ch.unit, role, cm.wiring);
  });
  std::vector<Channel> in_channels, dist_channels;
  for (const auto& u : unbound) {
    (u.role == ChannelRole::Control ? in_channels : dist_channels).push_back(u.channel);
  }
  cm.inputs = ChannelSpace(std::move(in_channels));
  cm.disturbances = ChannelSpace(std::move(dist_channels));

  cm.input_sources.assign(nc, {});
  cm.disturbance_sources.assign(nc, {});
  visit_consumers([&](std::size_t i, bool is_dist, std::size_t, const Channel& ch, ChannelRole) {
    Source src;
    if (auto it = bound.find({comps[i].name, ch.name}); it != bound.end()) {
      src = it->second;
    } else {
      const std::string g = global_name(i, ch);
      if (auto k = cm.inputs.find(g)) {
        src = {Source::Kind::Input, *k, 0};
      } else {
        src = {Source::Kind::Disturbance, *cm.disturbances.find(g), 0};
      }
    }
    (is_dist ? cm.disturbance_sources[i] : cm.input_sources[i]).push_back(src);
  });

  // Topological order of the algebraic subgraph; a back edge is a cycle.
  std::vector<int> state(nc, 0);
  std::vector<std::size_t> stack;
  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    state[v] = 1;
    stack.push_back(v);
    for (std::size_t w : feeds[v]) {
      if (state[w] == 1) {
        std::string cycle;
        auto start = std::find(stack.begin(), stack.end(), w);
        for (auto it = start; it != stack.end(); ++it) cycle += comps[*it].name + " -> ";
        throw Error(ErrorCode::AlgebraicCycle, "algebraic cycle: " + cycle + comps[w].name);
      }
      if (state[w] == 0) dfs(w);
    }
    stack.pop_back();
    state[v] = 2;
    cm.algebraic_order.push_back(v);
  };
  for (std::size_t i = 0; i < nc; ++i) {
    if (!comps[i].is_dynamic() && state[i] == 0) dfs(i);
  }
  std::reverse(cm.algebraic_order.begin(), cm.algebraic_order.end());
  return cm;
}

/// Drift of the composite evaluated component by component.
inline Eigen::VectorXd composite_drift(const CompositeModel& cm, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u, const Eigen::VectorXd& d) {
  detail::check_size(x.size(), cm.states.size(), "state", cm.states);
  detail::check_size(u.size(), cm.inputs.size(), "input", cm.inputs);
  detail::check_size(d.size(), cm.disturbances.size(), "disturbance", cm.disturbances);
  std::vector<Eigen::VectorXd> outputs(cm.components.size());
  auto read = [&](const Source& s) -> double {
    switch (s.kind) {
      case Source::Kind::State: return x(static_cast<Eigen::Index>(s.index));
      case Source::Kind::Input: return u(static_cast<Eigen::Index>(s.index));
      case Source::Kind::Disturbance: return d(static_cast<Eigen::Index>(s.index));
      case Source::Kind::Algebraic: return outputs[s.component](static_cast<Eigen::Index>(s.index));
    }
    return 0.0;
  };
  auto gather = [&](const std::vector<Source>& srcs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(srcs.size()));
    for (std::size_t k = 0; k < srcs.size(); ++k) v(static_cast<Eigen::Index>(k)) = read(srcs[k]);
    return v;
  };
  for (std::size_t i : cm.algebraic_order) {
    const auto& c = cm.components[i];
    outputs[i] = eval_algebraic(c.map(), c.mode_tag, gather(cm.input_sources[i]));
  }
  Eigen::VectorXd dx(x.size());
  for (std::size_t i = 0; i < cm.components.size(); ++i) {
    const auto& c = cm.components[i];
    if (!c.is_dynamic()) continue;
    const auto& m = c.dynamics();
    const auto off = static_cast<Eigen::Index>(cm.state_offset[i]);
    dx.segment(off, m.n()) =
        eval_drift(m, x.segment(off, m.n()), gather(cm.input_sources[i]), gather(cm.disturbance_sources[i]));
  }
  return dx;
}

namespace detail {

// Affine expression over the composite's (x, u, d): rows are signals.
struct AffineExpr {
  Eigen::MatrixXd X, U, D;
  Eigen::VectorXd c;

  static AffineExpr zero(Eigen::Index rows, Eigen::Index nx, Eigen::Index nu, Eigen::Index nd) {
    return {Eigen::MatrixXd::Zero(rows, nx), Eigen::MatrixXd::Zero(rows, nu),
            Eigen::MatrixXd::Zero(rows, nd), Eigen::VectorXd::Zero(rows)};
  }
};

}  // namespace detail

/// Substitute every algebraic output into its consumers and assemble one
/// ContinuousModel over the composite's channels. Bilinear multipliers must
/// resolve to affine functions of control inputs only.
inline ContinuousModel flatten(const CompositeModel& cm) {
  auto out = ContinuousModel::zero(cm.states, cm.inputs, cm.disturbances);
  const Eigen::Index nx = out.n(), nu = out.m(), nd = out.p();
  std::vector<detail::AffineExpr> outputs(cm.components.size());

  auto resolve = [&](const std::vector<Source>& srcs) {
    auto e = detail::AffineExpr::zero(static_cast<Eigen::Index>(srcs.size()), nx, nu, nd);
    for (std::size_t k = 0; k < srcs.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      const auto& s = srcs[k];
      const auto j = static_cast<Eigen::Index>(s.index);
      switch (s.kind) {
        case Source::Kind::State: e.X(r, j) = 1.0; break;
        case Source::Kind::Input: e.U(r, j) = 1.0; break;
        case Source::Kind::Disturbance: e.D(r, j) = 1.0; break;
        case Source::Kind::Algebraic: {
          const auto& o = outputs[s.component];
          e.X.row(r) = o.X.row(j);
          e.U.row(r) = o.U.row(j);
          e.D.row(r) = o.D.row(j);
          e.c(r) = o.c(j);
          break;
        }
      }
    }
    return e;
  };

  for (std::size_t i : cm.algebraic_order) {
    const auto& c = cm.components[i];
    const auto& v = c.map().variant(c.mode_tag);
    if (v.law != MapLaw::Affine) {
      throw Error(ErrorCode::NonAffine, "component '" + c.name + "' in mode '" + c.mode_tag +
                                            "' is not affine; fix its mode before flattening");
    }
    const auto in = resolve(cm.input_sources[i]);
    outputs[i] = {v.M * in.X, v.M * in.U, v.M * in.D, v.M * in.c + v.c};
  }

  for (std::size_t i = 0; i < cm.components.size(); ++i) {
    const auto& c = cm.components[i];
    if (!c.is_dynamic()) continue;
    const auto& m = c.dynamics();
    const auto off = static_cast<Eigen::Index>(cm.state_offset[i]);
    const auto rows = m.n();
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(rows, nx);
    sel.middleCols(off, rows).setIdentity();
    const auto U = resolve(cm.input_sources[i]);
    const auto D = resolve(cm.disturbance_sources[i]);

    out.A.middleRows(off, rows) += m.A * sel + m.B * U.X + m.F * D.X;
    out.B.middleRows(off, rows) += m.B * U.U + m.F * D.U;
    out.F.middleRows(off, rows) += m.B * U.D + m.F * D.D;
    out.q.segment(off, rows) += m.q + m.B * U.c + m.F * D.c;
    out.sigma.segment(off, rows) = m.sigma;

    for (const auto& t : m.bilinear) {
      const auto k = static_cast<Eigen::Index>(t.input);
      if (!U.X.row(k).isZero(0.0) || !U.D.row(k).isZero(0.0)) {
        throw Error(ErrorCode::NonAffine, "bilinear multiplier '" + m.inputs[t.input].name + "' of '" +
                                              c.name + "' depends on states or disturbances");
      }
      const Eigen::MatrixXd in_x = t.state * sel + t.inputs * U.X + t.disturbances * D.X;
      const Eigen::MatrixXd in_u = t.inputs * U.U + t.disturbances * D.U;
      const Eigen::MatrixXd in_d = t.inputs * U.D + t.disturbances * D.D;
      const Eigen::VectorXd in_c = t.inputs * U.c + t.disturbances * D.c;
      for (Eigen::Index j = 0; j < nu; ++j) {
        const double a = U.U(k, j);
        if (a == 0.0) continue;
        auto& g = out.bilinear_for(static_cast<std::size_t>(j));
        g.state.middleRows(off, rows) += a * in_x;
        g.inputs.middleRows(off, rows) += a * in_u;
        g.disturbances.middleRows(off, rows) += a * in_d;
        out.B.col(j).segment(off, rows) += a * in_c;
      }
      const double c0 = U.c(k);
      if (c0 != 0.0) {
        out.A.middleRows(off, rows) += c0 * in_x;
        out.B.middleRows(off, rows) += c0 * in_u;
        out.F.middleRows(off, rows) += c0 * in_d;
        out.q.segment(off, rows) += c0 * in_c;
      }
    }
  }
  std::erase_if(out.bilinear, [](const BilinearTerm& t) {
    return t.state.isZero(0.0) && t.inputs.isZero(0.0) && t.disturbances.isZero(0.0);
  });
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// JSON documents

inline nlohmann::json to_json(const Wiring& w) {
  nlohmann::json j;
  j["connections"] = nlohmann::json::array();
  for (const auto& c : w.connections) {
    j["connections"].push_back({{"from", nlohmann::json::array({c.from.component, c.from.channel})},
                                {"to", nlohmann::json::array({c.to.component, c.to.channel})}});
  }
  j["aliases"] = nlohmann::json::array();
  for (const auto& a : w.aliases) {
    j["aliases"].push_back({{"local", nlohmann::json::array({a.local.component, a.local.channel})}, {"global", a.global}});
  }
  j["roles"] = nlohmann::json::object();
  for (const auto& [name, role] : w.roles) {
    j["roles"][name] = role == ChannelRole::Control ? "control" : "exogenous";
  }
  return j;
}

inline Wiring wiring_from_json(const nlohmann::json& j) {
  Wiring w;
  try {
    auto endpoint = [](const nlohmann::json& e) {
      return Endpoint{e.at(0).get<std::string>(), e.at(1).get<std::string>()};
    };
    for (const auto& c : j.value("connections", nlohmann::json::array())) {
      w.connections.push_back({endpoint(c.at("from")), endpoint(c.at("to"))});
    }
    for (const auto& a : j.value("aliases", nlohmann::json::array())) {
      w.aliases.push_back({endpoint(a.at("local")), a.at("global").get<std::string>()});
    }
    const auto roles = j.value("roles", nlohmann::json::object());
    for (const auto& [name, role] : roles.items()) {
      const auto r = role.get<std::string>();
      if (r != "control" && r != "exogenous") {
        throw Error(ErrorCode::ParseError, "unknown channel role '" + r + "'");
      }
      w.roles[name] = r == "control" ? ChannelRole::Control : ChannelRole::Exogenous;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed wiring document: ") + e.what());
  }
  return w;
}

/// Component list plus wiring, for inspection of a configuration.
inline nlohmann::json configuration_document(const CompositeModel& cm) {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const auto& c : cm.components) {
    nlohmann::json e{{"name", c.name}, {"kind", std::string(to_string(c.kind))}, {"index", c.index}};
    if (c.is_dynamic()) {
      e["states"] = c.dynamics().states.names();
      e["inputs"] = c.dynamics().inputs.names();
      e["disturbances"] = c.dynamics().disturbances.names();
    } else {
      e["inputs"] = c.map().inputs.names();
      e["outputs"] = c.map().outputs.names();
      e["mode"] = c.mode_tag;
    }
    j["components"].push_back(std::move(e));
  }
  j["wiring"] = to_json(cm.wiring);
  j["states"] = cm.states.names();
  j["inputs"] = cm.inputs.names();
  j["disturbances"] = cm.disturbances.names();
  return j;
}

// ---------------------------------------------------------------------------
// Case-study configurations built from component parameters

struct Configuration {
  std::vector<Component> components;
  Wiring wiring;
};

/// Two zones with fixed wall temperature, one radiator each, boiler at steady
/// state, fixed air and water flows, common supply-air temperature T_sa.
/// State order (T_z1, T_z2, T_rw_r1, T_rw_r2).
inline Configuration cs1_configuration(const std::map<ComponentKind, ComponentParams>& params,
                                       double wall_temperature = 18.0, double supply_water = 75.0,
                                       const ModeSettings& settings = {}) {
  auto get = [&](ComponentKind k) -> const ComponentParams& {
    auto it = params.find(k);
    if (it == params.end()) {
      throw Error(ErrorCode::MissingParameter, "no parameters for " + std::string(to_string(k)));
    }
    return it->second;
  };
  ZoneTopology topo = ZoneTopology::two_room_fixed_walls(wall_temperature);
  Component zone = make_component("zone", ComponentKind::Zone, get(ComponentKind::Zone), 1, topo);
  ModeConfig mode;
  mode.fan = FanMode::Medium;
  zone = apply_mode(zone, mode, settings);

  Configuration cfg;
  cfg.components.push_back(std::move(zone));
  const auto& rp = get(ComponentKind::Radiator);
  for (int i = 1; i <= 2; ++i) {
    auto rad = std::get<ContinuousModel>(instantiate_component(ComponentKind::Radiator, rp, i));
    rad = freeze_channel(rad, "w_r" + std::to_string(i), rp.get("w_r"));
    rad = freeze_channel(rad, "T_sw_b", supply_water);
    cfg.components.push_back({"radiator" + std::to_string(i), ComponentKind::Radiator, i, rad, ""});
  }
  for (int i = 1; i <= 2; ++i) {
    const std::string r = "radiator" + std::to_string(i);
    const std::string z = std::to_string(i);
    cfg.wiring.link(r, "T_rw_r" + z, "zone", "T_rw_r" + z);
    cfg.wiring.link("zone", "T_z" + z, r, "T_z" + z);
    cfg.wiring.alias("zone", "T_sa" + z, "T_sa");
  }
  return cfg;
}

/// Two zones with dynamic walls (7 states), fixed air flow, AHU return water
/// at steady state, common supply-air temperature T_sa. Disturbances
/// (T_out, T_hall, CO2_1, CO2_2, T_rw_r1, T_rw_r2).
inline Configuration cs2_configuration(const std::map<ComponentKind, ComponentParams>& params,
                                       double ahu_return_water = 35.0, const ModeSettings& settings = {}) {
  auto it = params.find(ComponentKind::Zone);
  if (it == params.end()) throw Error(ErrorCode::MissingParameter, "no parameters for Zone");
  Component zone = make_component("zone", ComponentKind::Zone, it->second);
  ModeConfig mode;
  mode.fan = FanMode::Medium;
  zone = apply_mode(zone, mode, settings);
  zone.model = freeze_channel(zone.dynamics(), "T_rw_a", ahu_return_water);
  Configuration cfg;
  cfg.components.push_back(std::move(zone));
  cfg.wiring.alias("zone", "T_sa1", "T_sa").alias("zone", "T_sa2", "T_sa");
  return cfg;
}

}  // namespace basbench
