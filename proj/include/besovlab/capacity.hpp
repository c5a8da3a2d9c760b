#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "besovlab/graphs.hpp"

namespace besovlab {

struct CapacityOptions {
  double tol = 1e-12;         // relative energy decrease between outer rounds
  int max_iter = 2000;        // Newton steps over all rounds
  double eps_start = 1e-2;    // smoothing of |du| at the first round
  double eps_end = 1e-12;
  double kkt_factor = 1e-8;   // certificate: residual <= kkt_factor * capacity
};

struct CapacityResult {
  double p = 2.0;
  int level = 0;
  double capacity = 0.0;
  std::vector<double> minimizer;
  int iterations = 0;
  double gradient_norm = 0.0;  // true gradient on free vertices
};

// Sum over edges of |u(x) - u(y)|^p for the given potential.
double graph_p_energy(const GraphApprox& g, const std::vector<double>& u, double p);

// min sum_edges |du|^p with u = 0 on boundary_a and u = 1 on boundary_b.
CapacityResult p_capacity(const GraphApprox& g, double p, const CapacityOptions& options = {});
CapacityResult p_capacity(const GraphApprox& g, double p, double tol, int max_iter);

// One solve per graph, run in parallel over graphs.
std::vector<CapacityResult> p_capacities(const std::vector<GraphApprox>& graphs, double p,
                                         const CapacityOptions& options = {}, unsigned jobs = 0);

struct RhoEstimate {
  std::string family;
  double p = 2.0;
  std::vector<int> levels;
  std::vector<double> ratios;  // cap(m) / cap(m+1)
  double rho_p = 0.0;
  bool extrapolated = false;
  bool quality_warning = false;
  double walk_dimension = 0.0;
};

RhoEstimate rho_p_estimate(const std::vector<CapacityResult>& results, const std::string& family,
                           int n);

}  // namespace besovlab
