#include "besovlab/config.hpp"

#include <algorithm>
#include <cstdio>

#include "besovlab/energy.hpp"
#include "besovlab/errors.hpp"

namespace besovlab {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string base_family(const std::string& tag) {
  if (tag == "cube" || tag == "gluedcubes") return "cube";
  if (tag == "gasket" || tag == "gluedgaskets") return "gasket";
  if (tag == "carpet" || tag == "gluedcarpets") return "carpet";
  throw ArgumentError("unknown space family: " + tag);
}

namespace {

std::vector<double> vec_or_empty(const json& j, const char* key) {
  return j.contains(key) ? j.at(key).get<std::vector<double>>() : std::vector<double>{};
}

}  // namespace

FunctionGenerator FunctionSpec::generator(double p) const {
  const std::string kind = spec.at("kind").get<std::string>();
  const std::string label = spec.value("label", "");
  FunctionGenerator g;
  if (kind == "constant") g = constant_generator(spec.value("value", 1.0));
  else if (kind == "indicator") g = label_indicator(spec.at("label").get<std::string>());
  else if (kind == "coordinate") g = coordinate_function(spec.value("axis", std::size_t{0}), label);
  else if (kind == "cone") g = cone_function(vec_or_empty(spec, "center"), spec.at("radius").get<double>(), label);
  else if (kind == "ball") g = ball_indicator(vec_or_empty(spec, "center"), spec.at("radius").get<double>());
  else if (kind == "mollified_ball")
    g = mollified_ball(vec_or_empty(spec, "center"), spec.at("radius").get<double>(), spec.at("width").get<double>());
  else if (kind == "harmonic") g = harmonic_function(label, p);
  else if (kind == "loglog") g = {"loglog", [](const SpacePtr& s) { return loglog_witness(s); }};
  else throw ArgumentError("unknown function kind: " + kind);
  g.name = name();
  return g;
}

std::string FunctionSpec::name() const {
  if (spec.contains("name")) return spec.at("name").get<std::string>();
  std::string kind = spec.at("kind").get<std::string>();
  std::string out = kind;
  if (kind == "coordinate") out = "x" + std::to_string(spec.value("axis", 0));
  if (spec.contains("label")) out += "_" + spec.at("label").get<std::string>();
  return out;
}

std::vector<double> RadiiSpec::resolve(const Space& space) const {
  double h = hi > 0 ? hi : space.diameter();
  double l = lo > 0 ? lo : 2 * space.min_distance();
  if (!(l < h)) throw ResolutionError("radius window is empty on level " + std::to_string(space.level()));
  return radius_grid(h, l, per_decade);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  static const std::vector<std::string> known{
      "space", "p", "theta", "theta_grid", "radii", "functions", "targets", "kappa_grid", "star_levels",
      "capacity", "run", "k_max", "thresholds", "output", "seed", "jobs", "oracle"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ArgumentError("unknown config field: " + key);
  ExperimentConfig c;
  try {
    if (j.contains("space")) {
      const auto& s = j["space"];
      c.family = s.value("family", c.family);
      c.n = s.value("n", c.n);
      if (s.contains("levels")) c.levels = s["levels"].get<std::vector<int>>();
    }
    c.p = j.value("p", c.p);
    if (j.contains("theta") && j.contains("theta_grid")) throw ArgumentError("give either theta or theta_grid");
    if (j.contains("theta")) c.theta_grid = {j["theta"].get<double>()};
    if (j.contains("theta_grid")) c.theta_grid = j["theta_grid"].get<std::vector<double>>();
    if (j.contains("radii")) {
      const auto& r = j["radii"];
      c.radii.hi = r.value("hi", c.radii.hi);
      c.radii.lo = r.value("lo", c.radii.lo);
      c.radii.per_decade = r.value("per_decade", c.radii.per_decade);
      c.radii.dyadic = r.value("dyadic", c.radii.dyadic);
    }
    if (j.contains("functions"))
      for (const auto& f : j["functions"]) c.functions.push_back({f});
    if (j.contains("targets"))
      for (const auto& f : j["targets"]) c.targets.push_back({f});
    if (j.contains("kappa_grid")) c.kappa_grid = j["kappa_grid"].get<std::vector<double>>();
    if (j.contains("star_levels")) c.star_levels = j["star_levels"].get<std::vector<int>>();
    if (j.contains("capacity")) {
      const auto& cap = j["capacity"];
      if (cap.contains("levels")) c.capacity_levels = cap["levels"].get<std::vector<int>>();
      c.capacity_tol = cap.value("tol", c.capacity_tol);
      c.capacity_max_iter = cap.value("max_iter", c.capacity_max_iter);
    }
    if (j.contains("run")) {
      const auto& r = j["run"];
      c.run_rho = r.value("rho", c.run_rho);
      c.run_theta_p = r.value("theta_p", c.run_theta_p);
      c.run_theta_star = r.value("theta_star", c.run_theta_star);
    }
    c.k_max = j.value("k_max", c.k_max);
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      c.thresholds.slope = t.value("slope", c.thresholds.slope);
      c.thresholds.density = t.value("density", c.thresholds.density);
      c.thresholds.mass_tol = t.value("mass_tol", c.thresholds.mass_tol);
      c.thresholds.value_tol = t.value("value_tol", c.thresholds.value_tol);
      c.thresholds.tail_fraction = t.value("tail_fraction", c.thresholds.tail_fraction);
    }
    c.output = j.value("output", c.output);
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    c.oracle = j.value("oracle", c.oracle);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json fns = json::array(), tgs = json::array();
  for (const auto& f : functions) fns.push_back(f.spec);
  for (const auto& f : targets) tgs.push_back(f.spec);
  return {
      {"space", {{"family", family}, {"n", n}, {"levels", levels}}},
      {"p", p},
      {"theta_grid", theta_grid},
      {"radii", {{"hi", radii.hi}, {"lo", radii.lo}, {"per_decade", radii.per_decade}, {"dyadic", radii.dyadic}}},
      {"functions", fns},
      {"targets", tgs},
      {"kappa_grid", kappa_grid},
      {"star_levels", star_levels.empty() ? levels : star_levels},
      {"capacity",
       {{"levels", capacity_levels.empty() ? levels : capacity_levels},
        {"tol", capacity_tol},
        {"max_iter", capacity_max_iter}}},
      {"run", {{"rho", run_rho}, {"theta_p", run_theta_p}, {"theta_star", run_theta_star}}},
      {"k_max", k_max},
      {"thresholds",
       {{"slope", thresholds.slope},
        {"density", thresholds.density},
        {"mass_tol", thresholds.mass_tol},
        {"value_tol", thresholds.value_tol},
        {"tail_fraction", thresholds.tail_fraction}}},
      {"output", output},
      {"seed", seed},
      {"jobs", jobs},
      {"oracle", oracle},
  };
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output");
  j.erase("jobs");
  j.erase("oracle");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

void ExperimentConfig::validate() const {
  base_family(family);
  if (n < 1) throw ArgumentError("space.n must be at least 1");
  auto check_levels = [](const std::vector<int>& lv, const char* what) {
    if (lv.empty()) return;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      if (lv[i] < 0) throw ArgumentError(std::string(what) + " must be nonnegative");
      if (i > 0 && lv[i] <= lv[i - 1]) throw ArgumentError(std::string(what) + " must be strictly ascending");
    }
  };
  if (levels.empty()) throw ArgumentError("space.levels must not be empty");
  check_levels(levels, "space.levels");
  check_levels(star_levels, "star_levels");
  check_levels(capacity_levels, "capacity.levels");
  if (!(p > 1) || !std::isfinite(p)) throw ArgumentError("p must lie in (1, inf)");
  if (theta_grid.empty()) throw ArgumentError("theta grid must not be empty");
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > 0)) throw ArgumentError("theta values must be positive");
    if (i > 0 && !(theta_grid[i] > theta_grid[i - 1])) throw ArgumentError("theta grid must be ascending");
  }
  for (std::size_t i = 0; i < kappa_grid.size(); ++i)
    if (!(kappa_grid[i] > 0) || (i > 0 && !(kappa_grid[i] > kappa_grid[i - 1])))
      throw ArgumentError("kappa grid must be positive and ascending");
  if (radii.per_decade < 2) throw ArgumentError("radii.per_decade must be at least 2");
  if (radii.hi < 0 || radii.lo < 0) throw ArgumentError("radii bounds must be nonnegative");
  if (k_max == 0) throw ArgumentError("k_max must be positive");
  if (!(thresholds.tail_fraction > 0 && thresholds.tail_fraction <= 1))
    throw ArgumentError("thresholds.tail_fraction must lie in (0, 1]");
  for (const auto* list : {&functions, &targets}) {
    std::vector<std::string> names;
    for (const auto& f : *list) {
      if (!f.spec.is_object() || !f.spec.contains("kind")) throw ArgumentError("function specs need a kind");
      f.generator(p);
      names.push_back(f.name());
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw ArgumentError("function names must be unique; add a name field");
  }
}

}  // namespace besovlab
