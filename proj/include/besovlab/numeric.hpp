#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace besovlab {

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  void add(const CompensatedSum& o) {
    add(o.sum);
    add(o.comp);
  }
  double value() const { return sum + comp; }
};

inline double pow_p(double a, double p) {
  if (p == 2.0) return a * a;
  if (p == 1.5) return a * std::sqrt(a);
  return std::pow(a, p);
}

// Worker count used by kernels when none is given explicitly.
void set_default_jobs(unsigned jobs);
unsigned default_jobs();

// Point budget from BESOVLAB_BUDGET, default 4,000,000.
std::size_t point_budget();
void check_budget(const char* what, std::size_t requested);

// Runs body(begin, end) over fixed chunks of [0, n). Chunk boundaries do not
// depend on the worker count, so per-chunk results are reproducible.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t chunk_index, std::size_t begin,
                                              std::size_t end)>& body,
                     unsigned jobs = 0);

// Fixed-chunk tree reduction of per-index compensated contributions.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term,
                         unsigned jobs = 0);

// Pairwise (tree) reduction in fixed order.
double tree_reduce(const std::vector<CompensatedSum>& parts);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_rms = 0.0;
  std::size_t count = 0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// n log-spaced values from hi down to lo inclusive.
std::vector<double> log_spaced_desc(double hi, double lo, std::size_t n);

}  // namespace besovlab
