#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "besovlab/space.hpp"

namespace besovlab {

class FunctionOnSpace {
 public:
  FunctionOnSpace() = default;
  FunctionOnSpace(SpacePtr space, std::vector<double> values);

  bool bound() const { return static_cast<bool>(space_); }
  const Space& space() const;
  const SpacePtr& space_ptr() const { return space_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

FunctionOnSpace constant_function(const SpacePtr& space, double c);
FunctionOnSpace indicator(const SpacePtr& space, const std::vector<std::size_t>& set);
FunctionOnSpace scaled(const FunctionOnSpace& u, double c);
FunctionOnSpace sum(const FunctionOnSpace& u, const FunctionOnSpace& v);
void require_same_space(const FunctionOnSpace& u, const FunctionOnSpace& v);

struct EnergyProfile {
  double p = 2.0;
  double theta = 1.0;
  std::vector<double> radii;
  std::vector<double> values;
  std::optional<double> besov_pp;
  std::vector<double> dyadic_radii;
  std::vector<double> dyadic_values;
  double dyadic_sum = 0.0;
};

struct ScalingFit {
  double alpha = 0.0;
  double log_constant = 0.0;
  double r_squared = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t count = 0;
};

enum class TailClass { vanishing, positive, indeterminate };
const char* to_string(TailClass c);

// Thresholds of the tail classification.
struct TailThresholds {
  double vanishing_r_squared = 0.9;
  double positive_alpha = 0.1;
};

struct KsTail {
  double energy = 0.0;
  ScalingFit fit;
  TailClass classification = TailClass::indeterminate;
};

// Discrete B^theta_{p,p} energy: sum over x != y of
// |u(x)-u(y)|^p w_x w_y / (d^{theta p} mu(B(x, d))), open balls, d = 0 pairs skipped.
double besov_pp_energy(const FunctionOnSpace& u, double p, double theta);

// Same sum for several functions and exponents; result[f][t].
std::vector<std::vector<double>> besov_pp_batch(const Space& space,
                                                const std::vector<std::vector<double>>& functions,
                                                double p, const std::vector<double>& thetas);

// 16 per decade from diam down to 2x the minimum interpoint distance.
std::vector<double> default_radii(const Space& space, std::size_t per_decade = 16);
// per_decade log-spaced radii from hi down to lo.
std::vector<double> radius_grid(double hi, double lo, std::size_t per_decade = 16);
std::vector<double> dyadic_radii(const Space& space, double r_min);

struct MultiscaleOptions {
  bool with_besov = true;
  std::size_t besov_limit = 20000;  // besov_pp left empty above this size
  bool with_dyadic = true;
};

EnergyProfile multiscale_energy(const FunctionOnSpace& u, double p, double theta,
                                const std::vector<double>& radii,
                                const MultiscaleOptions& options = {});
std::vector<EnergyProfile> multiscale_energies(const FunctionOnSpace& u, double p,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& radii,
                                               const MultiscaleOptions& options = {});
// Sum_x (w_x / mu(B(x,t))) Sum_{y in B(x,t)} |u(x)-u(y)|^p w_y, without the t^{-theta p} factor.
std::vector<double> multiscale_unscaled(const FunctionOnSpace& u, double p,
                                        const std::vector<double>& radii);

double besov_pinfty_energy(const EnergyProfile& profile);

ScalingFit fit_power_law(const std::vector<double>& radii, const std::vector<double>& values,
                         double r_lo, double r_hi);

TailClass classify_tail(double energy, const ScalingFit& fit, const TailThresholds& th = {});
KsTail ks_energy_tail(const EnergyProfile& profile, double tail_fraction = 0.5,
                      const TailThresholds& th = {});
// Radii of the tail window used by ks_energy_tail.
std::vector<std::size_t> tail_window(const std::vector<double>& radii, double tail_fraction);

FunctionOnSpace normal_contraction(const FunctionOnSpace& u, double alpha, double beta);
FunctionOnSpace product(const FunctionOnSpace& u, const FunctionOnSpace& v);

struct IksProfile {
  std::vector<double> radii;
  std::vector<double> values;
  double normalization_exponent = 0.0;
  std::optional<ScalingFit> fit;
  TailClass classification = TailClass::indeterminate;
};

double iks_normalization_cube(int n);
double iks_normalization_fractal(double d_f, double p, double theta);

// r -> sum_{x in E1, y in E2, both in B(o, r)} |u1(x) - u2(y)|^p w_x w_y / r^{normalization}.
// u1 and u2 are either bound to the glued space or to spaces the size of E1 / E2.
IksProfile cross_coupling_iks(const FunctionOnSpace& u1, const FunctionOnSpace& u2,
                              const SpacePtr& glued, double p, double theta,
                              const std::vector<double>& radii, double normalization_exponent);

FunctionOnSpace loglog_witness(const SpacePtr& glued);

enum class RatioFlag { finite, infinite, degenerate };
const char* to_string(RatioFlag f);

struct RatioResult {
  double ratio = 1.0;
  RatioFlag flag = RatioFlag::finite;
  double numerator = 0.0;
  double denominator = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
};

RatioResult wmax_ratio(const FunctionOnSpace& u, double p, double theta,
                       const std::vector<double>& radii);
RatioResult sobolev_ratio(const FunctionOnSpace& u, double p, double theta,
                          const std::vector<double>& radii = {});

}  // namespace besovlab
