#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "besovlab/exponents.hpp"
#include "besovlab/space.hpp"

namespace besovlab {

// One function of a config: {"kind": ..., parameters}. Kinds: constant (value),
// indicator (label), coordinate (axis, label), cone (center, radius, label),
// ball (center, radius), mollified_ball (center, radius, width),
// harmonic (label), loglog.
struct FunctionSpec {
  nlohmann::json spec;
  std::string name() const;
  FunctionGenerator generator(double p) const;
};

struct RadiiSpec {
  double hi = 0.0;           // 0: diameter
  double lo = 0.0;           // 0: 2x minimum interpoint distance
  std::size_t per_decade = 16;
  bool dyadic = false;
  std::vector<double> resolve(const Space& space) const;
};

struct Thresholds {
  double slope = 0.1;
  double density = 0.05;
  double mass_tol = 1e-3;
  double value_tol = 1e-6;
  double tail_fraction = 0.5;
};

struct ExperimentConfig {
  std::string family = "gluedcubes";
  int n = 2;
  std::vector<int> levels{2, 3, 4};
  double p = 2.0;
  std::vector<double> theta_grid{1.0};
  RadiiSpec radii;
  std::vector<FunctionSpec> functions;  // profile functions and theta_p candidates
  std::vector<FunctionSpec> targets;    // theta_p* targets
  std::vector<double> kappa_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<int> star_levels;         // theta_p* levels, defaults to levels
  std::vector<int> capacity_levels;     // rho_p graph levels, defaults to levels
  double capacity_tol = 1e-12;
  int capacity_max_iter = 2000;
  bool run_rho = true;
  bool run_theta_p = true;
  bool run_theta_star = true;
  std::size_t k_max = 8;
  Thresholds thresholds;
  std::string output = "out";
  std::uint64_t seed = 20240611;
  unsigned jobs = 0;
  bool oracle = false;

  static ExperimentConfig from_json(const nlohmann::json& j);
  // Complete document with every default filled in.
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON, excluding output, jobs and oracle.
  std::string hash() const;
  void validate() const;
};

std::uint64_t fnv1a(const std::string& bytes);

// Graph family behind a space family tag (gluedcubes -> cube).
std::string base_family(const std::string& tag);

}  // namespace besovlab
