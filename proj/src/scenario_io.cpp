#include "spdesim/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>

#include "spdesim/errors.hpp"
#include "spdesim/spectral.hpp"

namespace spdesim::io {
namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  fail(Errc::schema, where + ": " + what);
}

// Re-raise an expression error with the JSON path of the offending field.
exprlang::Expr parse_expr(const std::string& where, const std::string& src,
                          std::vector<std::string> variables) {
  try {
    return exprlang::Expr::parse(src, std::move(variables));
  } catch (const Error& e) {
    fail(e.code(), where + ": " + e.what());
  }
}

const json& member(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(where, std::string("missing key '") + key + "'");
  return *it;
}

// Object shape check: required keys present, no keys outside the allowed set.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) schema_fail(where, "expected an object");
  for (const char* key : required) member(obj, where, key);
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) schema_fail(where, "unknown key '" + key + "'");
  }
}

double number_at(const json& obj, const std::string& where, const char* key) {
  const json& v = member(obj, where, key);
  if (!v.is_number()) schema_fail(where + "." + key, "expected a number");
  return v.get<double>();
}

int integer_at(const json& obj, const std::string& where, const char* key) {
  const json& v = member(obj, where, key);
  if (!v.is_number_integer()) schema_fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string string_at(const json& obj, const std::string& where, const char* key) {
  const json& v = member(obj, where, key);
  if (!v.is_string()) schema_fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& where) {
  if (!v.is_array()) schema_fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number())
      schema_fail(where + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

std::vector<std::string> string_array(const json& v, const std::string& where) {
  if (!v.is_array()) schema_fail(where, "expected an array of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_string())
      schema_fail(where + "[" + std::to_string(k) + "]", "expected a string");
    out.push_back(v[k].get<std::string>());
  }
  return out;
}

ctmc::GeneratorMatrix parse_generator(const json& doc) {
  const json& g = member(doc, "scenario", "generator");
  if (!g.is_array() || g.empty()) schema_fail("generator", "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    rows.push_back(number_array(g[i], "generator[" + std::to_string(i) + "]"));
  return ctmc::GeneratorMatrix::validate(rows);
}

spectral::SpectralBasis parse_spectral(const json& doc) {
  const json& s = member(doc, "scenario", "spectral");
  std::string where = "spectral";
  if (!s.is_object()) schema_fail(where, "expected an object");
  std::string kind = string_at(s, where, "kind");
  if (kind == "dirichlet_interval") {
    check_keys(s, where, {"kind", "length", "modes"});
    return spectral::SpectralBasis::dirichlet(integer_at(s, where, "modes"),
                                              number_at(s, where, "length"));
  }
  if (kind == "user_supplied") {
    check_keys(s, where, {"kind", "eigenvalues"});
    return spectral::SpectralBasis::user_supplied(
        number_array(s["eigenvalues"], where + ".eigenvalues"));
  }
  schema_fail(where + ".kind", "unknown kind '" + kind + "'");
}

spectral::ModeVector parse_initial(const json& doc, const spectral::SpectralBasis& basis) {
  const json& s = member(doc, "scenario", "initial");
  std::string where = "initial";
  if (!s.is_object()) schema_fail(where, "expected an object");
  std::string kind = string_at(s, where, "kind");
  if (kind == "mode") {
    check_keys(s, where, {"kind", "index", "amplitude"});
    return spectral::mode_initial(integer_at(s, where, "index"),
                                  number_at(s, where, "amplitude"),
                                  basis.mode_count());
  }
  if (kind == "modes") {
    check_keys(s, where, {"kind", "coefficients"});
    return spectral::coefficients_initial(
        number_array(s["coefficients"], where + ".coefficients"));
  }
  if (kind == "grid_expr") {
    check_keys(s, where, {"kind", "expr", "points"});
    int points = integer_at(s, where, "points");
    if (points < 1) schema_fail(where + ".points", "expected a positive integer");
    auto expr = parse_expr(where + ".expr", string_at(s, where, "expr"), {"x"});
    spectral::SineTransform transform(basis, points);
    spectral::GridField field;
    field.values.resize(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j)
      field.values[static_cast<std::size_t>(j)] = expr.eval(transform.grid_point(j));
    return spectral::grid_initial(field, basis);
  }
  schema_fail(where + ".kind", "unknown kind '" + kind + "'");
}

std::vector<exprlang::Expr> parse_expr_array(const json& v, const std::string& where,
                                             std::vector<std::string> variables) {
  auto sources = string_array(v, where);
  std::vector<exprlang::Expr> out;
  out.reserve(sources.size());
  for (std::size_t k = 0; k < sources.size(); ++k)
    out.push_back(parse_expr(where + "[" + std::to_string(k) + "]", sources[k], variables));
  return out;
}

engine::Dynamics parse_dynamics(const json& doc, std::optional<SemilinearCriterion>& semi) {
  const json& s = member(doc, "scenario", "dynamics");
  std::string where = "dynamics";
  if (!s.is_object()) schema_fail(where, "expected an object");
  std::string kind = string_at(s, where, "kind");
  if (kind == "linear") {
    check_keys(s, where, {"kind", "alpha_bar", "beta_bar"});
    engine::LinearDynamics dyn;
    dyn.alpha_bar = number_array(s["alpha_bar"], where + ".alpha_bar");
    dyn.beta_bar = number_array(s["beta_bar"], where + ".beta_bar");
    return dyn;
  }
  if (kind == "semilinear") {
    check_keys(s, where, {"kind", "drift", "diffusion", "b", "d", "nu"},
               {"collocation"});
    engine::SemilinearDynamics dyn;
    dyn.drift = parse_expr_array(s["drift"], where + ".drift", {"x"});
    dyn.diffusion = parse_expr_array(s["diffusion"], where + ".diffusion", {"x"});
    dyn.nu = number_at(s, where, "nu");
    if (s.contains("collocation")) dyn.collocation = integer_at(s, where, "collocation");
    SemilinearCriterion crit;
    crit.b = number_array(s["b"], where + ".b");
    crit.d = number_array(s["d"], where + ".d");
    crit.nu = dyn.nu;
    if (crit.b.size() != dyn.drift.size() || crit.d.size() != dyn.drift.size())
      fail(Errc::domain_violation,
           where + ": b and d must have one entry per regime expression");
    semi = std::move(crit);
    return dyn;
  }
  schema_fail(where + ".kind", "unknown kind '" + kind + "'");
}

std::optional<engine::JumpInputs> parse_jumps(const json& doc) {
  const json& s = member(doc, "scenario", "jumps");
  std::string where = "jumps";
  if (!s.is_object()) schema_fail(where, "expected an object");
  std::string kind = string_at(s, where, "kind");
  if (kind == "none") {
    check_keys(s, where, {"kind"});
    return std::nullopt;
  }
  if (kind == "atomic") {
    check_keys(s, where, {"kind", "atoms"});
    const json& atoms = s["atoms"];
    if (!atoms.is_array() || atoms.empty())
      schema_fail(where + ".atoms", "expected a non-empty array");
    std::vector<double> rates;
    std::vector<std::vector<double>> per_atom;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      std::string entry = where + ".atoms[" + std::to_string(k) + "]";
      check_keys(atoms[k], entry, {"rate", "gamma"});
      rates.push_back(number_at(atoms[k], entry, "rate"));
      per_atom.push_back(number_array(atoms[k]["gamma"], entry + ".gamma"));
    }
    auto measure = jumps::JumpMeasure::atomic(std::move(rates));
    auto profile = jumps::GammaProfile::atomic(std::move(per_atom));
    return engine::JumpInputs{std::move(measure), std::move(profile)};
  }
  if (kind == "parametric") {
    check_keys(s, where, {"kind", "rate", "density", "gamma"}, {"support"});
    double rate = number_at(s, where, "rate");
    auto density = parse_expr(where + ".density", string_at(s, where, "density"), {"y"});
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    if (s.contains("support")) {
      auto bounds = number_array(s["support"], where + ".support");
      if (bounds.size() != 2) schema_fail(where + ".support", "expected [lo, hi]");
      lo = bounds[0];
      hi = bounds[1];
    }
    auto measure = jumps::JumpMeasure::parametric(rate, std::move(density), lo, hi);
    auto profile = jumps::GammaProfile::parametric(
        parse_expr_array(s["gamma"], where + ".gamma", {"y"}), measure);
    return engine::JumpInputs{std::move(measure), std::move(profile)};
  }
  schema_fail(where + ".kind", "unknown kind '" + kind + "'");
}

SimParams parse_sim(const json& doc) {
  const json& s = member(doc, "scenario", "sim");
  std::string where = "sim";
  check_keys(s, where, {"T", "dt"}, {"paths", "seed", "burn_in", "sample_stride"});
  SimParams sim;
  sim.T = number_at(s, where, "T");
  sim.dt = number_at(s, where, "dt");
  if (s.contains("paths")) {
    sim.paths = integer_at(s, where, "paths");
    if (sim.paths < 1) schema_fail(where + ".paths", "expected a positive integer");
  }
  if (s.contains("seed")) {
    const json& v = s["seed"];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      schema_fail(where + ".seed", "expected a nonnegative integer");
    sim.seed = v.get<std::uint64_t>();
  }
  if (s.contains("burn_in")) sim.burn_in = number_at(s, where, "burn_in");
  if (s.contains("sample_stride")) {
    sim.sample_stride = integer_at(s, where, "sample_stride");
    if (sim.sample_stride < 1)
      schema_fail(where + ".sample_stride", "expected a positive integer");
  }
  return sim;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::schema, "cannot open scenario file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(Errc::schema, "scenario file '" + path + "': " + e.what());
  }
}

LoadedScenario load_scenario(const json& doc) {
  check_keys(doc, "scenario",
             {"generator", "r0", "spectral", "initial", "dynamics", "jumps", "sim"});

  auto generator = parse_generator(doc);
  int r0 = integer_at(doc, "scenario", "r0");  // 1-based in the file
  auto basis = parse_spectral(doc);
  auto initial = parse_initial(doc, basis);
  std::optional<SemilinearCriterion> semi;
  auto dynamics = parse_dynamics(doc, semi);
  auto jump_inputs = parse_jumps(doc);
  SimParams sim = parse_sim(doc);

  std::vector<jumps::JumpMoments> moments;
  if (jump_inputs) {
    moments.reserve(static_cast<std::size_t>(generator.size()));
    for (int i = 0; i < generator.size(); ++i)
      moments.push_back(jumps::jump_moments(jump_inputs->measure, jump_inputs->profile, i));
  }

  engine::Scenario scenario(std::move(generator), r0 - 1, std::move(basis),
                            std::move(initial), std::move(dynamics),
                            std::move(jump_inputs), sim.T, sim.dt);
  return LoadedScenario{std::move(scenario), sim, std::move(semi), std::move(moments)};
}

LoadedScenario load_scenario_file(const std::string& path) {
  return load_scenario(read_json_file(path));
}

void set_numeric(json& doc, const std::string& param, double value) {
  auto bad = [&](const std::string& why) -> void {
    fail(Errc::bad_param_path, "parameter path '" + param + "': " + why);
  };

  json* node = &doc;
  std::size_t pos = 0;
  if (param.empty()) bad("empty path");
  while (pos < param.size()) {
    if (param[pos] == '.') {
      ++pos;
      if (pos == param.size()) bad("trailing '.'");
      continue;
    }
    if (param[pos] == '[') {
      std::size_t close = param.find(']', pos);
      if (close == std::string::npos) bad("unterminated '['");
      std::string digits = param.substr(pos + 1, close - pos - 1);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        bad("index '" + digits + "' is not a nonnegative integer");
      std::size_t index = std::stoul(digits);
      if (!node->is_array() || index >= node->size())
        bad("no array element at index " + digits);
      node = &(*node)[index];
      pos = close + 1;
      continue;
    }
    std::size_t end = param.find_first_of(".[", pos);
    if (end == std::string::npos) end = param.size();
    std::string key = param.substr(pos, end - pos);
    if (!node->is_object() || !node->contains(key)) bad("no member named '" + key + "'");
    node = &(*node)[key];
    pos = end;
  }
  if (!node->is_number()) bad("does not address a numeric field");
  *node = value;
}

}  // namespace spdesim::io
