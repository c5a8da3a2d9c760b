#include "besovlab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "besovlab/errors.hpp"

namespace besovlab {

double brute_besov_pp(const FunctionOnSpace& u, double p, double theta) {
  const Space& s = u.space();
  const std::size_t n = s.size();
  long double total = 0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      double d = s.distance(x, y);
      if (d == 0) continue;
      long double ball = 0;
      for (std::size_t z = 0; z < n; ++z)
        if (s.distance(x, z) < d) ball += s.weight(z);
      double diff = std::abs(u[x] - u[y]);
      total += std::pow(diff, p) * s.weight(x) * s.weight(y) / (std::pow(d, theta * p) * ball);
    }
  return static_cast<double>(total);
}

std::vector<double> brute_multiscale(const FunctionOnSpace& u, double p, double theta,
                                     const std::vector<double>& radii) {
  const Space& s = u.space();
  const std::size_t n = s.size();
  std::vector<double> out;
  for (double t : radii) {
    long double total = 0;
    for (std::size_t x = 0; x < n; ++x) {
      long double ball = 0, inner = 0;
      for (std::size_t y = 0; y < n; ++y) {
        if (s.distance(x, y) >= t) continue;
        ball += s.weight(y);
        inner += std::pow(std::abs(u[x] - u[y]), p) * s.weight(y);
      }
      total += s.weight(x) * inner / ball;
    }
    out.push_back(static_cast<double>(total / std::pow(t, theta * p)));
  }
  return out;
}

double max_relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("length mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double den = std::max(std::abs(a[i]), std::abs(b[i]));
    if (den > 0) m = std::max(m, std::abs(a[i] - b[i]) / den);
  }
  return m;
}

}  // namespace besovlab
