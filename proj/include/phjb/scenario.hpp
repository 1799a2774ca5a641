#pragma once

// JSON scenario files (schema "pareto-hjb/1"). Parsing collects every
// problem it finds and reports them together, one field per line.
// to_json() emits the canonical form: all fields, defaults filled in,
// schedules expanded, fixed key order.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phjb/constraints.hpp"
#include "phjb/core.hpp"
#include "phjb/dynamics.hpp"
#include "phjb/grid.hpp"
#include "phjb/hjb_solver.hpp"
#include "phjb/models.hpp"

namespace phjb {

using json = nlohmann::ordered_json;

inline constexpr const char* kScenarioSchema = "pareto-hjb/1";

enum class Mode { Toy, Axisymmetric, Planar, Cartesian3d };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Toy: return "toy";
    case Mode::Axisymmetric: return "axisymmetric";
    case Mode::Planar: return "planar";
    case Mode::Cartesian3d: return "cartesian3d";
  }
  return "?";
}

inline std::size_t mode_dims(Mode m) {
  switch (m) {
    case Mode::Toy: return 3;
    case Mode::Axisymmetric: return 4;
    case Mode::Planar: return 5;
    case Mode::Cartesian3d: return 7;
  }
  return 0;
}

struct GridSpec {
  std::vector<double> lower, upper;  // periodic dims: upper = lower + period
  std::vector<std::size_t> counts;
};

// Defaults for the front and traj commands.
struct QuerySpec {
  std::vector<double> r0;
  std::optional<std::array<double, 2>> z;
  int rays = 64;
  std::size_t steps = 400;
};

struct Scenario {
  Mode mode = Mode::Toy;
  std::string name;
  std::string time_unit = "s";
  ToyProblem toy;
  AsteroidParams asteroid;
  double thrust_newtons = 0.0;
  SpacecraftParams spacecraft;
  ConstraintConfig constraints;
  TargetConfig target;
  GridSpec grid;
  std::vector<double> z1s, t_fs;
  SolverConfig solver;
  QuerySpec query;

  std::size_t dims() const { return mode_dims(mode); }
  double m_max() const { return mode == Mode::Toy ? toy.m_max() : spacecraft.m_max(); }

  Grid make_grid() const {
    std::vector<bool> per(dims(), false);
    if (mode == Mode::Planar || mode == Mode::Cartesian3d) per[1] = true;
    std::vector<double> period(grid.upper);
    for (std::size_t d = 0; d < dims(); ++d)
      if (per[d]) period[d] = grid.upper[d] - grid.lower[d];
    return Grid::with_period(grid.lower, period, grid.counts, per);
  }

  json to_json() const;
};

namespace detail {

// Field-by-field reader that records every error instead of stopping at the
// first one.
class FieldReader {
 public:
  std::vector<std::string> errors;

  const json* child(const json& j, const std::string& key, const std::string& path,
                    bool required = true) {
    if (!j.is_object()) {
      errors.push_back(path + ": expected an object");
      return nullptr;
    }
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) errors.push_back(join(path, key) + ": missing required field");
      return nullptr;
    }
    return &*it;
  }

  void number(const json& j, const std::string& key, const std::string& path, double& out,
              bool required = true) {
    const json* v = child(j, key, path, required);
    if (!v) return;
    if (!v->is_number()) {
      errors.push_back(join(path, key) + ": expected a number");
      return;
    }
    out = v->get<double>();
  }

  template <class Int>
  void integer(const json& j, const std::string& key, const std::string& path, Int& out,
               bool required = true) {
    const json* v = child(j, key, path, required);
    if (!v) return;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      errors.push_back(join(path, key) + ": expected a non-negative integer");
      return;
    }
    out = Int(v->get<long long>());
  }

  void numbers(const json& j, const std::string& key, const std::string& path,
               std::vector<double>& out, bool required = true) {
    const json* v = child(j, key, path, required);
    if (!v) return;
    if (!v->is_array()) {
      errors.push_back(join(path, key) + ": expected an array of numbers");
      return;
    }
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_number()) {
        errors.push_back(join(path, key) + ": expected an array of numbers");
        return;
      }
      out.push_back(e.get<double>());
    }
  }

  // Either an explicit array or {"from", "to", "count"}.
  void schedule(const json& j, const std::string& key, const std::string& path,
                std::vector<double>& out) {
    const json* v = child(j, key, path);
    if (!v) return;
    const std::string p = join(path, key);
    if (v->is_object()) {
      double a = 0, b = 0;
      std::size_t n = 0;
      const auto before = errors.size();
      number(*v, "from", p, a);
      number(*v, "to", p, b);
      integer(*v, "count", p, n);
      if (errors.size() != before) return;
      if (n < 1) {
        errors.push_back(p + ".count: must be >= 1");
        return;
      }
      out.clear();
      for (std::size_t i = 0; i < n; ++i)
        out.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
    } else {
      numbers(j, key, path, out);
    }
    if (out.empty()) errors.push_back(p + ": schedule must be non-empty");
    for (std::size_t i = 1; i < out.size(); ++i)
      if (!(out[i] > out[i - 1])) {
        errors.push_back(p + ": schedule must be strictly increasing");
        break;
      }
  }

  // Runs a validate() and records its message under `path`, unless field
  // errors were already recorded since `since` (avoids cascades).
  template <class F>
  void check(const std::string& path, F&& f, std::size_t since = 0) {
    if (errors.size() > since) return;
    try {
      f();
    } catch (const ConfigError& e) {
      errors.push_back(path + ": " + e.what());
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
  detail::FieldReader rd;
  Scenario s;
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");

  if (const json* v = rd.child(j, "schema", "")) {
    if (!v->is_string() || v->get<std::string>() != kScenarioSchema)
      rd.errors.push_back(std::string("schema: expected \"") + kScenarioSchema + "\"");
  }
  if (const json* v = rd.child(j, "name", "", false)) {
    if (v->is_string()) s.name = v->get<std::string>();
    else rd.errors.push_back("name: expected a string");
  }
  if (const json* v = rd.child(j, "time_unit", "", false)) {
    if (v->is_string()) s.time_unit = v->get<std::string>();
    else rd.errors.push_back("time_unit: expected a string");
  }
  bool mode_ok = false;
  if (const json* v = rd.child(j, "mode", "")) {
    const std::string m = v->is_string() ? v->get<std::string>() : "";
    mode_ok = true;
    if (m == "toy") s.mode = Mode::Toy;
    else if (m == "axisymmetric") s.mode = Mode::Axisymmetric;
    else if (m == "planar") s.mode = Mode::Planar;
    else if (m == "cartesian3d") s.mode = Mode::Cartesian3d;
    else {
      mode_ok = false;
      rd.errors.push_back("mode: expected one of toy, axisymmetric, planar, cartesian3d");
    }
  }

  const std::size_t toy_since = rd.errors.size();
  if (mode_ok && s.mode == Mode::Toy) {
    if (const json* t = rd.child(j, "toy", "")) {
      auto& p = s.toy;
      rd.number(*t, "m_dry", "toy", p.m_dry);
      rd.number(*t, "m_propellant", "toy", p.m_propellant);
      rd.number(*t, "t_max", "toy", p.t_max);
      rd.number(*t, "v_exhaust", "toy", p.v_exhaust);
      rd.number(*t, "x_min", "toy", p.x_min);
      rd.number(*t, "x_max", "toy", p.x_max);
      rd.number(*t, "v_limit", "toy", p.v_limit);
      rd.number(*t, "length_scale", "toy", p.length_scale, false);
      rd.number(*t, "velocity_scale", "toy", p.velocity_scale, false);
      rd.number(*t, "mass_scale", "toy", p.mass_scale, false);
    }
  } else if (mode_ok) {
    if (const json* a = rd.child(j, "asteroid", "")) {
      const std::size_t since = rd.errors.size();
      const bool has_gm = a->is_object() && a->contains("gm");
      const bool has_mass = a->is_object() && a->contains("mass");
      if (has_gm == has_mass) {
        rd.errors.push_back("asteroid: give exactly one of gm (km^3/s^2) or mass (kg)");
      } else if (has_gm) {
        rd.number(*a, "gm", "asteroid", s.asteroid.gm);
      } else {
        double mass = 0.0;
        rd.number(*a, "mass", "asteroid", mass);
        s.asteroid.gm = kGravitationalConstant * mass;
      }
      rd.number(*a, "omega", "asteroid", s.asteroid.omega);
      rd.number(*a, "singularity_guard", "asteroid", s.asteroid.singularity_guard, false);
      if (const json* h = rd.child(*a, "harmonics", "asteroid", false)) {
        if (!h->is_null()) {
          Harmonics hm;
          rd.number(*h, "c20", "asteroid.harmonics", hm.c20);
          rd.number(*h, "c22", "asteroid.harmonics", hm.c22);
          rd.number(*h, "reference_radius", "asteroid.harmonics", hm.reference_radius);
          s.asteroid.harmonics = hm;
        }
      }
      rd.check("asteroid", [&] { s.asteroid.validate(); }, since);
    }
    if (const json* c = rd.child(j, "spacecraft", "")) {
      const std::size_t since = rd.errors.size();
      double m_dry = 0, m_prop = 0, ve = 0;
      rd.number(*c, "m_dry", "spacecraft", m_dry);
      rd.number(*c, "m_propellant", "spacecraft", m_prop);
      rd.number(*c, "thrust_newtons", "spacecraft", s.thrust_newtons);
      rd.number(*c, "v_exhaust", "spacecraft", ve);
      s.spacecraft = SpacecraftParams::from_newtons(m_dry, m_prop, s.thrust_newtons, ve);
      rd.check("spacecraft", [&] { s.spacecraft.validate(); }, since);
    }
    if (const json* c = rd.child(j, "constraints", "")) {
      const std::size_t since = rd.errors.size();
      rd.number(*c, "rho_min", "constraints", s.constraints.rho_min);
      rd.number(*c, "rho_max", "constraints", s.constraints.rho_max);
      rd.number(*c, "length_scale", "constraints", s.constraints.length_scale, false);
      rd.number(*c, "mass_scale", "constraints", s.constraints.mass_scale, false);
      rd.number(*c, "velocity_scale", "constraints", s.constraints.velocity_scale, false);
      s.constraints.m_min = s.spacecraft.m_min();
      s.constraints.m_max = s.spacecraft.m_max();
      rd.check("constraints", [&] { s.constraints.validate(); }, since);
    }
  }

  const std::size_t dims = mode_ok ? s.dims() : 0;
  const std::size_t target_since = rd.errors.size();
  if (const json* t = rd.child(j, "target", "")) {
    rd.numbers(*t, "state", "target", s.target.state);
    rd.numbers(*t, "weights", "target", s.target.weights);
    rd.number(*t, "epsilon", "target", s.target.epsilon);
    if (mode_ok) rd.check("target", [&] { s.target.validate(dims - 1); }, target_since);
  }
  if (mode_ok && s.mode == Mode::Toy) {
    s.toy.target = s.target;
    rd.check("toy", [&] { s.toy.validate(); }, toy_since);
  }

  if (const json* g = rd.child(j, "grid", "")) {
    const std::size_t since = rd.errors.size();
    rd.numbers(*g, "lower", "grid", s.grid.lower);
    rd.numbers(*g, "upper", "grid", s.grid.upper);
    if (const json* c = rd.child(*g, "counts", "grid")) {
      bool ok = c->is_array();
      if (ok)
        for (const auto& e : *c) ok = ok && e.is_number_integer() && e.get<long long>() > 0;
      if (ok) s.grid.counts = c->get<std::vector<std::size_t>>();
      else rd.errors.push_back("grid.counts: expected an array of positive integers");
    }
    if (mode_ok) {
      if (s.grid.lower.size() != dims || s.grid.upper.size() != dims ||
          s.grid.counts.size() != dims)
        rd.errors.push_back("grid: mode " + to_string(s.mode) + " needs " +
                            std::to_string(dims) + " entries in lower, upper and counts");
      else
        rd.check("grid", [&] { (void)s.make_grid(); }, since);
    }
  }

  if (const json* sc = rd.child(j, "schedule", "")) {
    rd.schedule(*sc, "z1", "schedule", s.z1s);
    rd.schedule(*sc, "t_f", "schedule", s.t_fs);
    for (double t : s.t_fs)
      if (!(t >= 0.0)) {
        rd.errors.push_back("schedule.t_f: horizons must be >= 0");
        break;
      }
  }

  if (const json* v = rd.child(j, "solver", "", false)) {
    const std::size_t since = rd.errors.size();
    rd.number(*v, "cfl", "solver", s.solver.cfl, false);
    rd.integer(*v, "kappa_steps", "solver", s.solver.kappa_steps, false);
    rd.integer(*v, "history_levels", "solver", s.solver.history_levels, false);
    rd.integer(*v, "threads", "solver", s.solver.threads, false);
    rd.number(*v, "trim_band", "solver", s.solver.trim_band, false);
    rd.integer(*v, "trim_directions", "solver", s.solver.trim_directions, false);
    if (const json* d = rd.child(*v, "dissipation", "solver", false)) {
      if (*d == "local" || *d == "global")
        s.solver.local_dissipation = *d == "local";
      else
        rd.errors.push_back("solver.dissipation: expected \"global\" or \"local\"");
    }
    rd.check("solver", [&] { s.solver.validate(); }, since);
  }

  if (const json* q = rd.child(j, "query", "", false)) {
    rd.numbers(*q, "r0", "query", s.query.r0, false);
    std::vector<double> z;
    rd.numbers(*q, "z", "query", z, false);
    if (!z.empty()) {
      if (z.size() != 2) rd.errors.push_back("query.z: expected [z1, z2]");
      else s.query.z = std::array<double, 2>{z[0], z[1]};
    }
    rd.integer(*q, "rays", "query", s.query.rays, false);
    rd.integer(*q, "steps", "query", s.query.steps, false);
    if (mode_ok && !s.query.r0.empty() && s.query.r0.size() != dims)
      rd.errors.push_back("query.r0: expected " + std::to_string(dims) + " entries");
  }

  if (!rd.errors.empty()) {
    std::string msg = "scenario has " + std::to_string(rd.errors.size()) + " error(s):";
    for (const auto& e : rd.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

inline Scenario load_scenario(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("scenario: cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline json Scenario::to_json() const {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = name;
  j["mode"] = to_string(mode);
  j["time_unit"] = time_unit;
  if (mode == Mode::Toy) {
    j["toy"] = {{"m_dry", toy.m_dry},
                {"m_propellant", toy.m_propellant},
                {"t_max", toy.t_max},
                {"v_exhaust", toy.v_exhaust},
                {"x_min", toy.x_min},
                {"x_max", toy.x_max},
                {"v_limit", toy.v_limit},
                {"length_scale", toy.length_scale},
                {"velocity_scale", toy.velocity_scale},
                {"mass_scale", toy.mass_scale}};
  } else {
    json a = {{"gm", asteroid.gm},
              {"omega", asteroid.omega},
              {"singularity_guard", asteroid.singularity_guard}};
    if (asteroid.harmonics)
      a["harmonics"] = {{"c20", asteroid.harmonics->c20},
                        {"c22", asteroid.harmonics->c22},
                        {"reference_radius", asteroid.harmonics->reference_radius}};
    else
      a["harmonics"] = nullptr;
    j["asteroid"] = a;
    j["spacecraft"] = {{"m_dry", spacecraft.m_dry},
                       {"m_propellant", spacecraft.m_propellant},
                       {"thrust_newtons", thrust_newtons},
                       {"v_exhaust", spacecraft.v_exhaust}};
    j["constraints"] = {{"rho_min", constraints.rho_min},
                        {"rho_max", constraints.rho_max},
                        {"length_scale", constraints.length_scale},
                        {"mass_scale", constraints.mass_scale},
                        {"velocity_scale", constraints.velocity_scale}};
  }
  j["target"] = {{"state", target.state}, {"weights", target.weights}, {"epsilon", target.epsilon}};
  j["grid"] = {{"lower", grid.lower}, {"upper", grid.upper}, {"counts", grid.counts}};
  j["schedule"] = {{"z1", z1s}, {"t_f", t_fs}};
  j["solver"] = {{"cfl", solver.cfl},
                 {"kappa_steps", solver.kappa_steps},
                 {"history_levels", solver.history_levels},
                 {"threads", solver.threads},
                 {"trim_band", solver.trim_band},
                 {"trim_directions", solver.trim_directions},
                 {"dissipation", solver.local_dissipation ? "local" : "global"}};
  json q = {{"r0", query.r0}, {"rays", query.rays}, {"steps", query.steps}};
  if (query.z) q["z"] = {(*query.z)[0], (*query.z)[1]};
  j["query"] = q;
  return j;
}

/// Calls f(model) with the model selected by the scenario mode.
template <class F>
decltype(auto) with_model(const Scenario& s, F&& f) {
  switch (s.mode) {
    case Mode::Toy: return f(ToyModel(s.toy));
    case Mode::Axisymmetric:
      return f(AxisymmetricModel(s.asteroid, s.spacecraft, s.constraints, s.target));
    case Mode::Planar: return f(PlanarModel(s.asteroid, s.spacecraft, s.constraints, s.target));
    case Mode::Cartesian3d:
      return f(SpatialModel(s.asteroid, s.spacecraft, s.constraints, s.target));
  }
  throw ConfigError("unknown mode");
}

}  // namespace phjb
