#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "besovlab/energy.hpp"
#include "besovlab/space.hpp"

namespace besovlab {

// Builds a function on each level of a family.
struct FunctionGenerator {
  std::string name;
  std::function<FunctionOnSpace(const SpacePtr&)> make;
};

FunctionGenerator constant_generator(double c = 1.0);
FunctionGenerator label_indicator(const std::string& label);
FunctionGenerator coordinate_function(std::size_t axis, const std::string& label = "");
// max(1 - |x - center| / radius, 0), restricted to `label` when given.
FunctionGenerator cone_function(std::vector<double> center, double radius, const std::string& label = "");
FunctionGenerator ball_indicator(std::vector<double> center, double radius);
// Ball indicator with a linear ramp of the given width across the sphere.
FunctionGenerator mollified_ball(std::vector<double> center, double radius, double width);
// p-harmonic function on the atoms of `label` (all atoms when empty), 0 at the
// atom nearest the gluing point (or the first anchor) and 1 at the atom farthest
// from it; 0 off the label. Neighbouring atoms are those within 1.2x the
// smallest interpoint distance.
FunctionGenerator harmonic_function(const std::string& label, double p);

// Growth of besov_pp across refinement levels. With three or more levels the
// slope is taken from successive increments, which separates slow convergence
// from slow divergence; the plain two-level slope is kept for reference and
// used when the last increment is below 1% of the energy.
struct GrowthSlope {
  double slope = 0.0;
  double plain_slope = 0.0;
  bool increment_based = false;
  bool zero_energy = false;
};

GrowthSlope level_growth_slope(const std::vector<double>& energies, const std::vector<double>& spacings);
std::vector<double> level_spacings(const SpaceFamily& family);

struct ThetaEvidence {
  double theta = 0.0;
  std::string function;
  std::vector<double> energies;  // per level
  GrowthSlope growth;
  double kappa = 0.0;            // theta_p* only: relative penalty, 0 for the target itself
  double error = 0.0;            // theta_p* only: relative L^p error at the finest level
  bool pass = false;
};

struct ThetaEstimate {
  std::optional<double> value;   // empty when no grid value passes
  double threshold = 0.0;
  double slope_threshold = 0.1;
  std::vector<double> theta_grid;
  std::vector<double> statistic;  // per theta: best slope (theta_p) or D(theta) (theta_p*)
  std::vector<ThetaEvidence> evidence;
};

struct ThetaOptions {
  double slope_threshold = 0.1;
  double density_threshold = 0.05;
  unsigned jobs = 0;
};

// Largest theta whose best non-constant candidate has growth slope <= threshold.
ThetaEstimate theta_p_estimate(const SpaceFamily& family, double p,
                               const std::vector<FunctionGenerator>& candidates,
                               const std::vector<double>& theta_grid, const ThetaOptions& options = {});

// Scans theta upward; D(theta) is the largest over targets of the smallest
// finest-level relative error among level-stable approximants g_eps, where
// eps = kappa * ||f - mean f||_p^p / besov_pp(f) on the finest level and
// kappa = 0 stands for g = f. The estimate is the last theta before D first
// exceeds the density threshold.
ThetaEstimate theta_p_star_estimate(const SpaceFamily& family, double p,
                                    const std::vector<FunctionGenerator>& targets,
                                    const std::vector<double>& theta_grid,
                                    const std::vector<double>& kappa_grid,
                                    const ThetaOptions& options = {});

}  // namespace besovlab
