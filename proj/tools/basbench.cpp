// basbench command-line driver.

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "basbench.hpp"

using namespace basbench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// Files are kept in memory until the run succeeds.
struct Artifacts {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string content) { files[name] = std::move(content); }
  void add_csv(const std::string& name, const CsvTable& t) { add(name, to_csv_string(t)); }
  void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }

  void commit(const fs::path& dir, const std::string& command, const json& config) const {
    fs::create_directories(dir);
    json manifest{{"command", command}, {"config", config}, {"files", json::array()}};
    for (const auto& [name, content] : files) {
      std::ofstream(dir / name, std::ios::binary) << content;
      manifest["files"].push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    }
    std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  }
};

json num(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

json vec_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(num(v(i)));
  return j;
}

Eigen::VectorXd parse_vector(const std::string& s, const std::string& what) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(parse_double(item, what));
  if (vals.empty()) throw Error(ErrorCode::InvalidArgument, what + " is empty");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Flags win over --config values; both feed one JSON object.
struct Settings {
  json values = json::object();

  template <class T>
  void flag(const std::string& key, const std::optional<T>& v) {
    if (v) values[key] = *v;
  }
  bool has(const std::string& key) const { return values.contains(key) && !values[key].is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return values.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::InvalidArgument, "configuration value '" + key + "' has the wrong type");
    }
  }
  std::string need(const std::string& key) const {
    if (!has(key)) throw Error(ErrorCode::InvalidArgument, "missing required setting '" + key + "'");
    return get<std::string>(key, "");
  }
  void allow_only(const std::vector<std::string>& keys, const std::string& command) const {
    for (const auto& [k, v] : values.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw Error(ErrorCode::InvalidArgument, "setting '" + k + "' does not apply to '" + command + "'");
      }
    }
  }
};

std::uint64_t default_seed() {
  if (const char* s = std::getenv("BAS_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used == std::string(s).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidArgument, std::string("BAS_SEED is not an unsigned integer: '") + s + "'");
  }
  return 0;
}

std::size_t positive(const Settings& s, const std::string& key, long long fallback, long long lo = 1) {
  const auto v = s.get<long long>(key, fallback);
  if (v < lo) {
    throw Error(ErrorCode::InvalidArgument, key + " must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
  }
  return static_cast<std::size_t>(v);
}

DiscreteModel discrete_of(const Benchmark& b) {
  if (!b.discrete) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(b.id)) + " is a hybrid model; use hybrid-reach");
  }
  return *b.discrete;
}

// ---------------------------------------------------------------------------

void run_simulate(const Settings& s, Artifacts& out) {
  s.allow_only({"benchmark", "k", "seed", "x0", "u", "overlay"}, "simulate");
  const auto b = build_benchmark(s.need("benchmark"));
  const auto m = discrete_of(b);
  const auto K = positive(s, "k", 192, 0);
  const auto seed = s.has("seed") ? s.get<std::uint64_t>("seed", 0) : default_seed();
  Eigen::VectorXd x0 = b.x0;
  if (s.has("x0")) x0 = parse_vector(s.get<std::string>("x0", ""), "x0");
  if (x0.size() != m.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "x0 has " + std::to_string(x0.size()) + " entries, " + m.id + " has " + std::to_string(m.n()) + " states");
  }
  InputSchedule sched;
  if (s.has("u")) {
    const auto u = parse_vector(s.get<std::string>("u", ""), "u");
    if (u.size() != m.m()) throw Error(ErrorCode::DimensionMismatch, "u must have " + std::to_string(m.m()) + " entries");
    sched = InputSchedule::constant(u);
  } else if (m.states.contains("T_rw_r1") && m.n() == 4) {
    sched = InputSchedule::cs1_weekday();
  } else {
    sched = InputSchedule::constant(b.input_set ? b.input_set->center() : Eigen::VectorXd::Zero(m.m()));
  }
  std::optional<MeasuredTrace> measured;
  if (s.has("overlay")) measured = load_trace_csv(s.get<std::string>("overlay", ""));

  const auto tr = simulate(m, x0, sched, b.law, seed, K);
  out.add_csv("trace.csv", trace_table(tr, m.states, m.inputs));
  auto meta = trace_metadata(tr);
  meta["schedule"] = sched.name;
  out.add_json("trace.json", meta);

  if (measured) {
    // long format: one row per (time, source, channel)
    CsvTable t;
    t.header = {"t_min", "source", "channel", "value"};
    for (Eigen::Index k = 0; k < tr.states.rows(); ++k) {
      for (Eigen::Index i = 0; i < m.n(); ++i) {
        t.rows.push_back({format_double(static_cast<double>(k) * m.delta_minutes), "simulated",
                          m.states.names()[static_cast<std::size_t>(i)], format_double(tr.states(k, i))});
      }
    }
    for (std::size_t r = 0; r < measured->size(); ++r) {
      for (std::size_t c = 0; c < measured->channels.size(); ++c) {
        t.rows.push_back({format_double(measured->t_min(static_cast<Eigen::Index>(r))), "measured", measured->channels[c],
                          format_double(measured->values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))});
      }
    }
    out.add_csv("overlay.csv", t);
  }
  std::cout << m.id << ": " << K << " steps, seed " << seed << "\n";
}

void run_reach(const Settings& s, Artifacts& out) {
  s.allow_only({"benchmark", "n"}, "reach");
  const auto b = build_benchmark(s.need("benchmark"));
  const auto m = discrete_of(b);
  const auto N = positive(s, "n", 6, 0);
  const auto D = octagon_directions(m.n());
  const Box U = b.input_set.value_or(Box::empty_space());
  const Box Dset = b.disturbance_set.value_or(Box::empty_space());
  const auto rt = reach_tube(m, Box::point(b.x0), U, Dset, N, D);
  for (std::size_t k = 0; k < rt.steps.size(); ++k) {
    out.add_csv("step_" + std::to_string(k) + ".csv", polytope_table(rt.steps[k]));
  }
  out.add_csv("tube.csv", polytope_table(rt.tube));
  json summary{{"benchmark", to_string(b.id)}, {"N", N}, {"facets", D.rows()}};
  try {
    const auto ref = reference_tube(b.id);
    const auto margins = facet_margins(rt.tube, ref);
    CsvTable t;
    t.header = {"facet", "ours", "reference", "margin"};
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      t.rows.push_back({std::to_string(i), format_double(rt.tube.bounds(i)), format_double(ref.bounds(i)),
                        format_double(margins(i))});
    }
    out.add_csv("margins.csv", t);
    summary["min_margin"] = num(margins.minCoeff());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MissingKey) throw;
  }
  out.add_json("reach.json", summary);
  std::cout << to_string(b.id) << ": " << rt.steps.size() << " step polytopes and the union tube\n";
}

void run_psafe(const Settings& s, Artifacts& out) {
  s.allow_only({"grid", "actions", "n", "set_point", "tolerance"}, "psafe");
  const auto cells = positive(s, "grid", 40);
  const auto actions = positive(s, "actions", 15);
  const auto N = positive(s, "n", 6, 0);
  const double sp = s.get<double>("set_point", 20.0), tol = s.get<double>("tolerance", 0.5);
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  const auto k = build_kernel_cs1_2d();
  const SafetySpec spec{Box::uniform(2, sp - tol, sp + tol), N, "G<=N zones within tolerance of the set point"};
  const auto mdp = grid_abstraction(k, spec, cells, uniform_actions(k.U.lo(0), k.U.hi(0), actions));
  const auto res = safety_value_iteration(mdp, N);
  const auto V = res.final_values();
  CsvTable vt;
  vt.header = {"cell", "T_z1", "T_z2", "value", "action"};
  for (std::size_t i = 0; i < mdp.cells(); ++i) {
    const auto c = mdp.center(i);
    const std::string act = N > 0 ? format_double(mdp.actions()[res.policy.per_step[0][i]](0)) : "";
    vt.rows.push_back({std::to_string(i), format_double(c(0)), format_double(c(1)), format_double(V[i]), act});
  }
  out.add_csv("values.csv", vt);
  CsvTable pt;
  pt.header = {"k", "cell", "action"};
  for (std::size_t t = 0; t < res.policy.per_step.size(); ++t) {
    for (std::size_t i = 0; i < mdp.cells(); ++i) {
      pt.rows.push_back({std::to_string(t), std::to_string(i), format_double(mdp.actions()[res.policy.per_step[t][i]](0))});
    }
  }
  out.add_csv("policy.csv", pt);
  const auto best = std::max_element(V.begin(), V.end());
  out.add_json("psafe.json", {{"cells", mdp.cells()},
                              {"actions", mdp.num_actions()},
                              {"N", N},
                              {"eta", num(mdp.eta())},
                              {"max_value", num(*best)},
                              {"argmax", vec_json(mdp.center(static_cast<std::size_t>(best - V.begin())))}});
  std::cout << "grid " << mdp.cells() << " cells, max safety " << format_double(*best) << "\n";
}

void run_synth(const Settings& s, Artifacts& out) {
  s.allow_only({"n", "actions", "eta", "delta", "runs", "seed"}, "synth");
  Cs2Options opt;
  opt.horizon = positive(s, "n", 16);
  opt.num_actions = positive(s, "actions", 15);
  opt.eta_target = s.get<double>("eta", 0.005);
  opt.delta = s.get<double>("delta", 1e-2);
  opt.mc_runs = positive(s, "runs", 10'000);
  opt.seed = s.has("seed") ? s.get<std::uint64_t>("seed", 0) : default_seed();
  if (!(opt.eta_target > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  sim_rel_lookup(opt.abstract_order, opt.delta);  // validates delta against the table
  const auto rep = synthesize_cs2(opt);
  json j{{"abstract_model", "cs2-abs1"},
         {"cells", rep.cells},
         {"actions", rep.actions},
         {"N", rep.horizon},
         {"p_prime", num(rep.p_prime)},
         {"eta_step", num(rep.eta)},
         {"eta_horizon", num(rep.eta_horizon)},
         {"epsilon", num(rep.epsilon)},
         {"delta", num(rep.delta)},
         {"p", num(rep.p)},
         {"reference_formula_value", num(rep.printed_formula)},
         {"reference_printed_value", num(rep.printed_p)},
         {"mc_concrete", {{"p", num(rep.concrete.p)}, {"lo", num(rep.concrete.lo)}, {"hi", num(rep.concrete.hi)},
                          {"runs", rep.concrete.trials}}},
         {"mc_abstract", {{"p", num(rep.abstract.p)}, {"lo", num(rep.abstract.lo)}, {"hi", num(rep.abstract.hi)},
                          {"runs", rep.abstract.trials}}},
         {"x0", vec_json(rep.x0)},
         {"seed", opt.seed}};
  out.add_json("synth.json", j);
  CsvTable pt;
  pt.header = {"k", "T_z1", "T_sa"};
  const auto& mdp = *rep.mdp;
  for (std::size_t t = 0; t < rep.safety.policy.per_step.size(); ++t) {
    for (std::size_t i = 0; i < mdp.cells(); ++i) {
      pt.rows.push_back({std::to_string(t), format_double(mdp.center(i)(0)),
                         format_double(mdp.actions()[rep.safety.policy.per_step[t][i]](0))});
    }
  }
  out.add_csv("policy.csv", pt);
  std::cout << "p' " << format_double(rep.p_prime) << ", p " << format_double(rep.p) << ", epsilon "
            << format_double(rep.epsilon) << ", MC " << format_double(rep.concrete.p) << "\n";
}

void run_hybrid(const Settings& s, Artifacts& out) {
  s.allow_only({"x0", "horizon", "step", "radius", "recirculation"}, "hybrid-reach");
  const auto x0 = parse_vector(s.get<std::string>("x0", "15,15"), "x0");
  if (x0.size() != 2) throw Error(ErrorCode::DimensionMismatch, "x0 must have two entries (T_z1, T_sa)");
  const double horizon = s.get<double>("horizon", 120.0);
  const double step = s.get<double>("step", 0.01);
  const double radius = s.get<double>("radius", 0.0);
  if (!(horizon >= 0.0) || !(step > 0.0) || !(radius >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "horizon and radius must be >= 0 and step > 0");
  }
  HybridParams hp;
  hp.recirculation = s.get<bool>("recirculation", false);
  const auto ha = build_hybrid_cs3(hp);
  const auto tr = integrate(ha, x0, ha.initial, horizon, step);
  CsvTable tt;
  tt.header = {"t_min", "mode", "T_z1", "T_sa"};
  for (const auto& smp : tr.samples) {
    tt.rows.push_back({format_double(smp.t), ha.modes[smp.mode].name, format_double(smp.x(0)), format_double(smp.x(1))});
  }
  out.add_csv("trajectory.csv", tt);
  CsvTable et;
  et.header = {"t_min", "source", "target", "guard"};
  for (const auto& e : tr.events) {
    et.rows.push_back({format_double(e.t), ha.modes[e.source].name, ha.modes[e.target].name, e.guard});
  }
  out.add_csv("events.csv", et);
  const Box X0(x0.array() - radius, x0.array() + radius);
  const auto fp = box_flowpipe(ha, X0, ha.initial, horizon, step);
  CsvTable ft;
  ft.header = {"t_lo", "t_hi", "mode", "T_z1_lo", "T_z1_hi", "T_sa_lo", "T_sa_hi"};
  for (const auto& seg : fp.segments) {
    ft.rows.push_back({format_double(seg.t_lo), format_double(seg.t_hi), ha.modes[seg.mode].name,
                       format_double(seg.box.lo(0)), format_double(seg.box.hi(0)), format_double(seg.box.lo(1)),
                       format_double(seg.box.hi(1))});
  }
  out.add_csv("flowpipe.csv", ft);
  json diag = json::array();
  for (const auto& d : tr.diagnostics) diag.push_back(d);
  for (const auto& w : fp.warnings) diag.push_back(w);
  out.add_json("hybrid.json", {{"events", tr.events.size()}, {"segments", fp.segments.size()}, {"diagnostics", diag}});
  std::cout << tr.events.size() << " events, " << fp.segments.size() << " flowpipe segments\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building automation benchmark models and analyses"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with settings; flags override it");
    sub->add_option("--out", out_dir, "artifact directory");
  };

  app.add_subcommand("list-benchmarks", "print the registry ids");

  std::optional<std::string> benchmark, x0, u, overlay;
  std::optional<long long> k, n, grid, actions, runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> set_point, tolerance, eta, delta, horizon, step, radius;
  std::optional<bool> recirc;

  auto* sim = app.add_subcommand("simulate", "simulate a discrete benchmark");
  add_common(sim);
  sim->add_option("--benchmark", benchmark);
  sim->add_option("--k", k, "number of steps");
  sim->add_option("--seed", seed);
  sim->add_option("--x0", x0, "comma-separated initial state");
  sim->add_option("--u", u, "constant input instead of the default schedule");
  sim->add_option("--overlay", overlay, "measured trace CSV for a combined export");

  auto* reach = app.add_subcommand("reach", "template reach tube of a deterministic benchmark");
  add_common(reach);
  reach->add_option("--benchmark", benchmark);
  reach->add_option("--n", n, "horizon in steps");

  auto* psafe = app.add_subcommand("psafe", "safety probability on a grid over the cs1 zone temperatures");
  add_common(psafe);
  psafe->add_option("--grid", grid, "cells per axis");
  psafe->add_option("--actions", actions);
  psafe->add_option("--n", n);
  psafe->add_option("--set-point", set_point);
  psafe->add_option("--tolerance", tolerance);

  auto* synth = app.add_subcommand("synth", "policy synthesis for cs2 through the one-state abstraction");
  add_common(synth);
  synth->add_option("--n", n);
  synth->add_option("--actions", actions);
  synth->add_option("--eta", eta, "target per-step abstraction error");
  synth->add_option("--delta", delta);
  synth->add_option("--runs", runs, "Monte-Carlo runs");
  synth->add_option("--seed", seed);

  auto* hyb = app.add_subcommand("hybrid-reach", "simulate and bound the cs3 hybrid model");
  add_common(hyb);
  hyb->add_option("--x0", x0, "T_z1,T_sa");
  hyb->add_option("--horizon", horizon, "minutes");
  hyb->add_option("--step", step, "minutes");
  hyb->add_option("--radius", radius, "half-width of the initial box");
  hyb->add_flag("--recirculation", recirc, "add the closed-mixer modes");

  CLI11_PARSE(app, argc, argv);
  auto* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  if (name == "list-benchmarks") {
    for (auto id : kAllBenchmarks) std::cout << to_string(id) << "\n";
    return 0;
  }

  try {
    Settings s;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config '" + config_path + "'");
      try {
        s.values = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
      }
      if (!s.values.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
      if (s.values.contains("out")) {
        if (cmd->count("--out") == 0) out_dir = s.values["out"].get<std::string>();
        s.values.erase("out");
      }
    }
    s.flag("benchmark", benchmark);
    s.flag("x0", x0);
    s.flag("u", u);
    s.flag("overlay", overlay);
    s.flag("k", k);
    s.flag("n", n);
    s.flag("grid", grid);
    s.flag("actions", actions);
    s.flag("runs", runs);
    s.flag("seed", seed);
    s.flag("set_point", set_point);
    s.flag("tolerance", tolerance);
    s.flag("eta", eta);
    s.flag("delta", delta);
    s.flag("horizon", horizon);
    s.flag("step", step);
    s.flag("radius", radius);
    s.flag("recirculation", recirc);

    Artifacts art;
    if (name == "simulate") run_simulate(s, art);
    else if (name == "reach") run_reach(s, art);
    else if (name == "psafe") run_psafe(s, art);
    else if (name == "synth") run_synth(s, art);
    else run_hybrid(s, art);
    art.commit(out_dir, name, s.values);
  } catch (const Error& e) {
    std::cerr << "basbench " << name << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "basbench " << name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
