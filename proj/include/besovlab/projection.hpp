#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "besovlab/energy.hpp"

namespace besovlab {

// Upper-triangular pair data of the Besov kernel, independent of p and theta:
// mass_factor = w_x w_y (1/mu(B(x,d)) + 1/mu(B(y,d))) and log d, stored as float.
// besov_pp(u) = sum_{x<y} mass_factor * d^{-theta p} * |u(x) - u(y)|^p.
class PairKernel {
 public:
  static constexpr std::size_t kMaxPoints = 16384;

  explicit PairKernel(SpacePtr space, unsigned jobs = 0);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return n_; }
  std::size_t pair_count() const { return mass_factor_.size(); }

  // S_xy = mass_factor * d^{-theta p}, same layout as the pairs.
  std::vector<float> weights(double p, double theta) const;
  double energy(const std::vector<float>& s, const std::vector<double>& u, double p) const;

  // Visits pairs (x, y), x < y, in storage order.
  template <typename F>
  void for_each_pair(F&& f) const {
    std::size_t k = 0;
    for (std::uint32_t x = 0; x < n_; ++x)
      for (std::uint32_t y = x + 1; y < n_; ++y, ++k) f(x, y, k);
  }

 private:
  SpacePtr space_;
  std::size_t n_ = 0;
  std::vector<float> mass_factor_;
  std::vector<float> log_distance_;
};

struct ProjectionOptions {
  double tol = 1e-9;      // relative objective decrease that ends a smoothing stage
  int max_newton = 400;   // Newton steps over all stages
  int max_cg = 500;
};

struct ProjectionResult {
  FunctionOnSpace g;
  double objective = 0.0;  // fidelity + eps * energy
  double fidelity = 0.0;   // sum_x w_x |g - f|^p
  double energy = 0.0;     // besov_pp(g)
  int iterations = 0;
};

// argmin_g sum_x w_x |g(x) - f(x)|^p + eps * besov_pp(g).
ProjectionResult besov_projection(const FunctionOnSpace& f, double p, double theta, double eps,
                                  const ProjectionOptions& options = {});
// Same with a prepared kernel and weights (from kernel.weights(p, theta)).
ProjectionResult besov_projection(const PairKernel& kernel, const std::vector<float>& s,
                                  const FunctionOnSpace& f, double p, double eps,
                                  const ProjectionOptions& options = {});

// Relative L^p error ||g - f||_p / ||f||_p; 0 when both vanish, +inf when only f does.
double relative_lp_error(const FunctionOnSpace& g, const FunctionOnSpace& f, double p);

}  // namespace besovlab
