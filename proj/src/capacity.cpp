#include "besovlab/capacity.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"

namespace besovlab {

namespace {

std::vector<int> bfs_distance(const std::vector<std::vector<std::uint32_t>>& adj,
                              const std::vector<std::size_t>& sources) {
  std::vector<int> dist(adj.size(), -1);
  std::vector<std::size_t> queue;
  for (std::size_t s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (auto v : adj[queue[h]])
      if (dist[v] < 0) {
        dist[v] = dist[queue[h]] + 1;
        queue.push_back(v);
      }
  return dist;
}

struct Smoothed {
  const GraphApprox& g;
  double p;

  double energy(const std::vector<double>& u, double eps) const {
    CompensatedSum s;
    for (auto [a, b] : g.edges) {
      double du = u[a] - u[b];
      s.add(std::pow(du * du + eps * eps, 0.5 * p));
    }
    return s.value();
  }
};

}  // namespace

double graph_p_energy(const GraphApprox& g, const std::vector<double>& u, double p) {
  if (u.size() != g.size()) throw ArgumentError("potential length does not match the graph");
  CompensatedSum s;
  for (auto [a, b] : g.edges) {
    double du = std::abs(u[a] - u[b]);
    if (du != 0) s.add(pow_p(du, p));
  }
  return s.value();
}

CapacityResult p_capacity(const GraphApprox& g, double p, const CapacityOptions& opt) {
  if (!(p > 1) || !std::isfinite(p)) throw ArgumentError("p must lie in (1, inf)");
  const std::size_t n = g.size();
  if (g.boundary_a.empty() || g.boundary_b.empty()) throw ArgumentError("boundary sets must be nonempty");
  std::vector<int> role(n, 0);  // 0 free, 1 A, 2 B, 3 unreachable
  for (std::size_t v : g.boundary_a) {
    if (v >= n) throw ArgumentError("boundary vertex out of range");
    role[v] = 1;
  }
  for (std::size_t v : g.boundary_b) {
    if (v >= n) throw ArgumentError("boundary vertex out of range");
    if (role[v] == 1) throw ArgumentError("boundary sets overlap");
    role[v] = 2;
  }
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (auto [a, b] : g.edges) {
    if (a >= n || b >= n || a == b) throw ArgumentError("invalid edge");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  auto da = bfs_distance(adj, g.boundary_a);
  auto db = bfs_distance(adj, g.boundary_b);
  for (std::size_t v : g.boundary_b)
    if (da[v] < 0) throw InfeasibilityError("boundary sets are not connected in the graph");

  std::vector<double> u(n, 0.0);
  std::vector<std::ptrdiff_t> slot(n, -1);
  std::size_t nfree = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (role[v] == 2) u[v] = 1.0;
    if (role[v] != 0) continue;
    if (da[v] < 0) {
      // Component without boundary: fixed at 0, contributes nothing.
      role[v] = 3;
      continue;
    }
    u[v] = double(da[v]) / double(da[v] + db[v]);
    slot[v] = static_cast<std::ptrdiff_t>(nfree++);
  }

  CapacityResult res;
  res.p = p;
  res.level = g.level;
  Smoothed sm{g, p};

  auto true_gradient_norm = [&](const std::vector<double>& x) {
    std::vector<double> grad(nfree, 0.0);
    for (auto [a, b] : g.edges) {
      double du = x[a] - x[b];
      if (std::abs(du) < 1e-14) continue;
      double t = p * std::pow(std::abs(du), p - 1) * (du > 0 ? 1.0 : -1.0);
      if (slot[a] >= 0) grad[slot[a]] += t;
      if (slot[b] >= 0) grad[slot[b]] -= t;
    }
    double s = 0;
    for (double v : grad) s += v * v;
    return std::sqrt(s);
  };

  if (nfree == 0) {
    res.minimizer = u;
    res.capacity = graph_p_energy(g, u, p);
    return res;
  }

  // Sparsity pattern of the free-vertex Laplacian.
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t v = 0; v < n; ++v)
    if (slot[v] >= 0) trip.emplace_back(slot[v], slot[v], 1.0);
  for (auto [a, b] : g.edges)
    if (slot[a] >= 0 && slot[b] >= 0) {
      trip.emplace_back(slot[a], slot[b], -1.0);
      trip.emplace_back(slot[b], slot[a], -1.0);
    }
  Eigen::SparseMatrix<double> H(nfree, nfree);
  H.setFromTriplets(trip.begin(), trip.end());
  H.makeCompressed();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.analyzePattern(H);

  std::vector<double> hw(g.edges.size()), gw(g.edges.size());
  Eigen::VectorXd grad(nfree), step(nfree);
  std::vector<double> trial(n);
  int iters = 0;
  double prev_round = std::numeric_limits<double>::infinity();
  bool last_round = false;

  for (double eps = opt.eps_start;; eps *= 0.5) {
    if (eps <= opt.eps_end) {
      eps = opt.eps_end;
      last_round = true;
    }
    double f = sm.energy(u, eps);
    for (int inner = 0; inner < 100; ++inner) {
      if (iters >= opt.max_iter)
        throw ConvergenceError("p-capacity solver exceeded " + std::to_string(opt.max_iter) +
                                   " iterations",
                               u, graph_p_energy(g, u, p));
      grad.setZero();
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [a, b] = g.edges[e];
        double du = u[a] - u[b];
        double s = du * du + eps * eps;
        gw[e] = p * std::pow(s, 0.5 * p - 1) * du;
        hw[e] = p * std::pow(s, 0.5 * p - 2) * ((p - 1) * du * du + eps * eps);
        if (slot[a] >= 0) grad[slot[a]] += gw[e];
        if (slot[b] >= 0) grad[slot[b]] -= gw[e];
      }
      double hmax = *std::max_element(hw.begin(), hw.end());
      for (double& h : hw) h = std::max(h, 1e-13 * hmax);
      std::fill(H.valuePtr(), H.valuePtr() + H.nonZeros(), 0.0);
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [a, b] = g.edges[e];
        if (slot[a] >= 0) H.coeffRef(slot[a], slot[a]) += hw[e];
        if (slot[b] >= 0) H.coeffRef(slot[b], slot[b]) += hw[e];
        if (slot[a] >= 0 && slot[b] >= 0) {
          H.coeffRef(slot[a], slot[b]) -= hw[e];
          H.coeffRef(slot[b], slot[a]) -= hw[e];
        }
      }
      solver.factorize(H);
      if (solver.info() != Eigen::Success) throw ConvergenceError("singular Newton system", u, graph_p_energy(g, u, p));
      step = solver.solve(-grad);
      ++iters;
      double slope = grad.dot(step);
      if (!(slope < 0)) break;
      double t = 1.0, fnew = f;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        trial = u;
        for (std::size_t v = 0; v < n; ++v)
          if (slot[v] >= 0) trial[v] += t * step[slot[v]];
        fnew = sm.energy(trial, eps);
        if (fnew <= f + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      u.swap(trial);
      double decrease = f - fnew;
      f = fnew;
      if (-slope <= 1e-15 * f || decrease <= 1e-16 * f) break;
    }
    if (last_round) {
      double cap = graph_p_energy(g, u, p);
      double gn = true_gradient_norm(u);
      bool stalled = std::abs(prev_round - cap) <= opt.tol * cap;
      if (gn <= opt.kkt_factor * cap || stalled) {
        res.capacity = cap;
        res.gradient_norm = gn;
        break;
      }
      prev_round = cap;
      last_round = false;
      // Repeat the final round until the certificate holds or progress stops.
      eps = 2 * opt.eps_end;
      continue;
    }
    prev_round = graph_p_energy(g, u, p);
  }
  res.minimizer = u;
  res.iterations = iters;
  if (!(res.capacity > 0)) throw ConvergenceError("non-positive capacity", u, res.capacity);
  return res;
}

CapacityResult p_capacity(const GraphApprox& g, double p, double tol, int max_iter) {
  CapacityOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return p_capacity(g, p, opt);
}

std::vector<CapacityResult> p_capacities(const std::vector<GraphApprox>& graphs, double p,
                                         const CapacityOptions& options, unsigned jobs) {
  std::vector<CapacityResult> out(graphs.size());
  parallel_chunks(graphs.size(), 1, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = p_capacity(graphs[i], p, options);
  }, jobs);
  return out;
}

RhoEstimate rho_p_estimate(const std::vector<CapacityResult>& results, const std::string& family, int n) {
  if (results.size() < 3) throw ResolutionError("rho_p needs at least 3 consecutive levels");
  RhoEstimate est;
  est.family = family;
  est.p = results.front().p;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].p != est.p) throw ArgumentError("capacity results use different p");
    if (i > 0 && results[i].level != results[i - 1].level + 1)
      throw ArgumentError("capacity results must be consecutive levels");
    if (!(results[i].capacity > 0)) throw ArgumentError("capacity must be positive");
    est.levels.push_back(results[i].level);
  }
  for (std::size_t i = 0; i + 1 < results.size(); ++i)
    est.ratios.push_back(results[i].capacity / results[i + 1].capacity);
  const auto [N, L] = ifs_parameters(family, n);
  const auto& r = est.ratios;
  bool increasing = true, decreasing = true;
  for (std::size_t i = 1; i < r.size(); ++i) {
    increasing &= r[i] >= r[i - 1];
    decreasing &= r[i] <= r[i - 1];
  }
  est.rho_p = r.back();
  if (increasing || decreasing) {
    // One Richardson step assuming the error contracts by 1/L per level.
    est.rho_p = r.back() + (r.back() - r[r.size() - 2]) / (L - 1);
    est.extrapolated = r.back() != r[r.size() - 2];
  } else {
    auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    est.quality_warning = (*hi - *lo) > 0.2 * std::abs(r.back());
  }
  if (!(est.rho_p > 0)) est.rho_p = r.back();
  est.walk_dimension = std::log(N * est.rho_p) / std::log(L);
  return est;
}

}  // namespace besovlab
