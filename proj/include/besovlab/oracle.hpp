#pragma once

#include <vector>

#include "besovlab/energy.hpp"

namespace besovlab {

// Direct double loops over all pairs, for cross-checking the fast kernels on
// small spaces.
double brute_besov_pp(const FunctionOnSpace& u, double p, double theta);
std::vector<double> brute_multiscale(const FunctionOnSpace& u, double p, double theta,
                                     const std::vector<double>& radii);

// max |a - b| / max(|a|, |b|) over entries, 0 where both vanish.
double max_relative_difference(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace besovlab
