#pragma once

#include <cstddef>
#include <vector>

#include "besovlab/space.hpp"

namespace besovlab {

// Per-function data aligned with the index's internal ordering.
struct IndexedValues {
  std::vector<double> values;  // internal order
  std::vector<double> node_min;
  std::vector<double> node_max;
};

struct BallSums {
  double mass = 0.0;
  double diff = 0.0;  // sum of |u(x) - u(y)|^p w_y over the ball
};

// Open-ball range queries. Euclidean spaces with at least kBruteLimit points
// use a kd-tree with per-node mass aggregates; smaller or explicit-metric
// spaces scan.
class BallIndex {
 public:
  static constexpr std::size_t kBruteLimit = 2000;

  BallIndex(std::size_t dim, const std::vector<double>& coords, const std::vector<double>& weights,
            const std::vector<double>* matrix, std::size_t leaf_size = 16);

  bool brute() const { return brute_; }
  std::size_t size() const { return n_; }

  std::vector<std::size_t> ball(std::size_t x, double r) const;
  // Ball around arbitrary coordinates (Euclidean only).
  std::vector<std::size_t> ball_at(const double* q, double r) const;
  double volume(std::size_t x, double r) const;

  IndexedValues prepare(const std::vector<double>& values) const;
  BallSums sums(std::size_t x, double r, const IndexedValues& f, double p) const;

  // Distance to the nearest y with f(y) != f(x); +inf when f is constant.
  double nearest_different(std::size_t x, const IndexedValues& f) const;
  // Smallest positive distance from x to another point.
  double nearest_other(std::size_t x) const;
  double diameter() const;

 private:
  struct Node {
    std::size_t begin, end;
    int left = -1, right = -1;
    double mass = 0.0;
  };

  double dist_internal(std::size_t ia, const double* q) const {
    return euclid(pts_.data() + ia * dim_, q, dim_);
  }
  double dist_brute(std::size_t i, std::size_t j) const;
  int build(std::size_t begin, std::size_t end, std::size_t leaf);
  void box_bounds(int node, const double* q, double& dmin, double& dmax) const;
  double box_pair_max(int a, int b) const;

  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  bool brute_ = true;
  std::vector<double> pts_;      // internal order (tree) or original order (brute)
  std::vector<double> w_;
  std::vector<double> matrix_;   // explicit metric only
  std::vector<std::size_t> order_;  // internal -> original
  std::vector<std::size_t> rank_;   // original -> internal
  std::vector<Node> nodes_;
  std::vector<double> lo_, hi_;
};

}  // namespace besovlab
