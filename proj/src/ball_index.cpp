#include "besovlab/ball_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"

namespace besovlab {

namespace {
constexpr double kInside = 1.0 - 1e-12;
constexpr double kOutside = 1.0 + 1e-12;
}  // namespace

BallIndex::BallIndex(std::size_t dim, const std::vector<double>& coords,
                     const std::vector<double>& weights, const std::vector<double>* matrix,
                     std::size_t leaf_size)
    : n_(weights.size()), dim_(dim) {
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (matrix) {
    brute_ = true;
    matrix_ = *matrix;
    w_ = weights;
    rank_ = order_;
    return;
  }
  brute_ = n_ < kBruteLimit;
  if (brute_) {
    pts_ = coords;
    w_ = weights;
    rank_ = order_;
    return;
  }
  pts_ = coords;  // temporary, permuted below
  nodes_.reserve(2 * n_ / std::max<std::size_t>(leaf_size, 1) + 4);
  build(0, n_, std::max<std::size_t>(leaf_size, 1));
  std::vector<double> permuted(n_ * dim_);
  w_.resize(n_);
  rank_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::copy_n(coords.data() + order_[i] * dim_, dim_, permuted.data() + i * dim_);
    w_[i] = weights[order_[i]];
    rank_[order_[i]] = i;
  }
  pts_.swap(permuted);
  // Node masses in internal order.
  for (auto& nd : nodes_) {
    CompensatedSum s;
    for (std::size_t i = nd.begin; i < nd.end; ++i) s.add(w_[i]);
    nd.mass = s.value();
  }
}

int BallIndex::build(std::size_t begin, std::size_t end, std::size_t leaf) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  lo_.resize(nodes_.size() * dim_);
  hi_.resize(nodes_.size() * dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      double v = pts_[order_[i] * dim_ + k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    lo_[id * dim_ + k] = lo;
    hi_[id * dim_ + k] = hi;
  }
  if (end - begin <= leaf) return id;
  std::size_t axis = 0;
  double widest = -1;
  for (std::size_t k = 0; k < dim_; ++k) {
    double w = hi_[id * dim_ + k] - lo_[id * dim_ + k];
    if (w > widest) {
      widest = w;
      axis = k;
    }
  }
  if (widest <= 0) return id;
  std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     double va = pts_[a * dim_ + axis], vb = pts_[b * dim_ + axis];
                     return va < vb || (va == vb && a < b);
                   });
  int l = build(begin, mid, leaf);
  int r = build(mid, end, leaf);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

double BallIndex::dist_brute(std::size_t i, std::size_t j) const {
  if (!matrix_.empty()) return matrix_[i * n_ + j];
  return euclid(pts_.data() + i * dim_, pts_.data() + j * dim_, dim_);
}

void BallIndex::box_bounds(int node, const double* q, double& dmin, double& dmax) const {
  double smin = 0, smax = 0;
  const double* lo = lo_.data() + node * dim_;
  const double* hi = hi_.data() + node * dim_;
  for (std::size_t k = 0; k < dim_; ++k) {
    double a = lo[k] - q[k], b = q[k] - hi[k];
    double out = std::max({a, b, 0.0});
    smin += out * out;
    double far = std::max(std::abs(q[k] - lo[k]), std::abs(q[k] - hi[k]));
    smax += far * far;
  }
  dmin = std::sqrt(smin);
  dmax = std::sqrt(smax);
}

double BallIndex::box_pair_max(int a, int b) const {
  double s = 0;
  for (std::size_t k = 0; k < dim_; ++k) {
    double far = std::max(hi_[a * dim_ + k] - lo_[b * dim_ + k], hi_[b * dim_ + k] - lo_[a * dim_ + k]);
    s += far * far;
  }
  return std::sqrt(s);
}

std::vector<std::size_t> BallIndex::ball(std::size_t x, double r) const {
  if (!(r > 0)) throw ArgumentError("ball radius must be positive");
  if (x >= n_) throw ArgumentError("point index out of range");
  if (brute_) {
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < n_; ++y)
      if (dist_brute(x, y) < r) out.push_back(y);
    return out;
  }
  return ball_at(pts_.data() + rank_[x] * dim_, r);
}

std::vector<std::size_t> BallIndex::ball_at(const double* q, double r) const {
  if (!matrix_.empty()) throw ArgumentError("coordinate queries need a Euclidean space");
  std::vector<std::size_t> out;
  if (brute_) {
    for (std::size_t y = 0; y < n_; ++y)
      if (euclid(pts_.data() + y * dim_, q, dim_) < r) out.push_back(y);
    return out;
  }
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    double dmin, dmax;
    box_bounds(id, q, dmin, dmax);
    if (dmin >= r * kOutside) continue;
    const Node& nd = nodes_[id];
    if (dmax < r * kInside || nd.left < 0) {
      bool all = dmax < r * kInside;
      for (std::size_t i = nd.begin; i < nd.end; ++i)
        if (all || dist_internal(i, q) < r) out.push_back(order_[i]);
      continue;
    }
    stack.push_back(nd.left);
    stack.push_back(nd.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double BallIndex::volume(std::size_t x, double r) const {
  if (!(r > 0)) throw ArgumentError("ball radius must be positive");
  if (x >= n_) throw ArgumentError("point index out of range");
  CompensatedSum s;
  if (brute_) {
    for (std::size_t y = 0; y < n_; ++y)
      if (dist_brute(x, y) < r) s.add(w_[y]);
    return s.value();
  }
  const double* q = pts_.data() + rank_[x] * dim_;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    double dmin, dmax;
    box_bounds(id, q, dmin, dmax);
    if (dmin >= r * kOutside) continue;
    const Node& nd = nodes_[id];
    if (dmax < r * kInside) {
      s.add(nd.mass);
      continue;
    }
    if (nd.left < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i)
        if (dist_internal(i, q) < r) s.add(w_[i]);
      continue;
    }
    stack.push_back(nd.left);
    stack.push_back(nd.right);
  }
  return s.value();
}

IndexedValues BallIndex::prepare(const std::vector<double>& values) const {
  if (values.size() != n_) throw BindingError("function length does not match the space");
  IndexedValues f;
  f.values.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) f.values[i] = values[order_[i]];
  f.node_min.resize(nodes_.size());
  f.node_max.resize(nodes_.size());
  for (std::size_t id = nodes_.size(); id-- > 0;) {
    const Node& nd = nodes_[id];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    if (nd.left < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i) {
        lo = std::min(lo, f.values[i]);
        hi = std::max(hi, f.values[i]);
      }
    } else {
      lo = std::min(f.node_min[nd.left], f.node_min[nd.right]);
      hi = std::max(f.node_max[nd.left], f.node_max[nd.right]);
    }
    f.node_min[id] = lo;
    f.node_max[id] = hi;
  }
  return f;
}

BallSums BallIndex::sums(std::size_t x, double r, const IndexedValues& f, double p) const {
  CompensatedSum mass, diff;
  const std::size_t ix = rank_[x];
  const double ux = f.values[ix];
  if (brute_) {
    for (std::size_t y = 0; y < n_; ++y) {
      if (dist_brute(x, y) < r) {
        mass.add(w_[y]);
        double d = std::abs(ux - f.values[y]);
        if (d != 0) diff.add(pow_p(d, p) * w_[y]);
      }
    }
    return {mass.value(), diff.value()};
  }
  const double* q = pts_.data() + ix * dim_;
  // Balanced tree: depth stays far below the stack capacity.
  std::pair<int, bool> stack[128];
  int top = 0;
  stack[top++] = {0, false};
  while (top > 0) {
    auto [id, inside] = stack[--top];
    const Node& nd = nodes_[id];
    if (!inside) {
      double dmin, dmax;
      box_bounds(id, q, dmin, dmax);
      if (dmin >= r * kOutside) continue;
      if (dmax < r * kInside) {
        mass.add(nd.mass);
        inside = true;
      }
    }
    if (inside) {
      double lo = f.node_min[id], hi = f.node_max[id];
      if (lo == hi) {
        if (lo != ux) diff.add(pow_p(std::abs(ux - lo), p) * nd.mass);
        continue;
      }
      if (nd.left < 0) {
        for (std::size_t i = nd.begin; i < nd.end; ++i) {
          double d = std::abs(ux - f.values[i]);
          if (d != 0) diff.add(pow_p(d, p) * w_[i]);
        }
        continue;
      }
      stack[top++] = {nd.left, true};
      stack[top++] = {nd.right, true};
      continue;
    }
    if (nd.left < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i) {
        if (dist_internal(i, q) < r) {
          mass.add(w_[i]);
          double d = std::abs(ux - f.values[i]);
          if (d != 0) diff.add(pow_p(d, p) * w_[i]);
        }
      }
      continue;
    }
    stack[top++] = {nd.left, false};
    stack[top++] = {nd.right, false};
  }
  return {mass.value(), diff.value()};
}

double BallIndex::nearest_different(std::size_t x, const IndexedValues& f) const {
  const std::size_t ix = rank_[x];
  const double ux = f.values[ix];
  double best = std::numeric_limits<double>::infinity();
  if (brute_) {
    for (std::size_t y = 0; y < n_; ++y)
      if (f.values[y] != ux) best = std::min(best, dist_brute(x, y));
    return best;
  }
  const double* q = pts_.data() + ix * dim_;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (f.node_min[id] == ux && f.node_max[id] == ux) continue;
    double dmin, dmax;
    box_bounds(id, q, dmin, dmax);
    if (dmin * (1 - 1e-12) >= best) continue;
    const Node& nd = nodes_[id];
    if (nd.left < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i)
        if (f.values[i] != ux) best = std::min(best, dist_internal(i, q));
      continue;
    }
    double dl, dr, tmp;
    box_bounds(nd.left, q, dl, tmp);
    box_bounds(nd.right, q, dr, tmp);
    if (dl < dr) {
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    } else {
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  return best;
}

double BallIndex::nearest_other(std::size_t x) const {
  double best = std::numeric_limits<double>::infinity();
  if (brute_) {
    for (std::size_t y = 0; y < n_; ++y) {
      double d = dist_brute(x, y);
      if (d > 0) best = std::min(best, d);
    }
    return best;
  }
  const double* q = pts_.data() + rank_[x] * dim_;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    double dmin, dmax;
    box_bounds(id, q, dmin, dmax);
    if (dmin * (1 - 1e-12) >= best || dmax == 0) continue;
    const Node& nd = nodes_[id];
    if (nd.left < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i) {
        double d = dist_internal(i, q);
        if (d > 0) best = std::min(best, d);
      }
      continue;
    }
    double lmin, lmax, rmin, rmax;
    box_bounds(nd.left, q, lmin, lmax);
    box_bounds(nd.right, q, rmin, rmax);
    if (lmin <= rmin) {
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    } else {
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  return best;
}

double BallIndex::diameter() const {
  double best = 0;
  if (brute_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) best = std::max(best, dist_brute(i, j));
    return best;
  }
  // Seed with a farthest-point sweep, then refine with a dual-tree search.
  std::size_t a = 0;
  for (int round = 0; round < 3; ++round) {
    std::size_t far = a;
    double fd = -1;
    for (std::size_t i = 0; i < n_; ++i) {
      double d = euclid(pts_.data() + i * dim_, pts_.data() + a * dim_, dim_);
      if (d > fd) {
        fd = d;
        far = i;
      }
    }
    best = std::max(best, fd);
    a = far;
  }
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [u, v] = stack.back();
    stack.pop_back();
    if (box_pair_max(u, v) * (1 + 1e-12) <= best) continue;
    const Node& nu = nodes_[u];
    const Node& nv = nodes_[v];
    if (nu.left < 0 && nv.left < 0) {
      for (std::size_t i = nu.begin; i < nu.end; ++i)
        for (std::size_t j = nv.begin; j < nv.end; ++j)
          best = std::max(best, euclid(pts_.data() + i * dim_, pts_.data() + j * dim_, dim_));
      continue;
    }
    bool split_u = nv.left < 0 || (nu.left >= 0 && (nu.end - nu.begin) >= (nv.end - nv.begin));
    if (split_u) {
      stack.push_back({nu.left, v});
      stack.push_back({nu.right, v});
    } else {
      stack.push_back({u, nv.left});
      stack.push_back({u, nv.right});
    }
  }
  return best;
}

}  // namespace besovlab
