#include "besovlab/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"
#include "besovlab/space.hpp"

namespace besovlab {

namespace {

std::size_t checked_pow(std::size_t b, int e, const char* what) {
  double approx = std::pow(double(b), e);
  if (approx > 1e15) throw ResourceError(std::string(what) + " is too large", std::size_t(-1), point_budget());
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

void validate(const GraphApprox& g) {
  const std::size_t n = g.size();
  if (n == 0) throw ArgumentError("graph has no vertices");
  if (g.boundary_a.empty() || g.boundary_b.empty()) throw ArgumentError("boundary sets must be nonempty");
  std::vector<char> in_a(n, 0);
  for (std::size_t v : g.boundary_a) {
    if (v >= n) throw ArgumentError("boundary vertex out of range");
    in_a[v] = 1;
  }
  for (std::size_t v : g.boundary_b) {
    if (v >= n) throw ArgumentError("boundary vertex out of range");
    if (in_a[v]) throw ArgumentError("boundary sets overlap");
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (auto [a, b] : g.edges) {
    if (a >= n || b >= n) throw ArgumentError("edge endpoint out of range");
    if (a == b) throw ArgumentError("self-loop in graph");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) throw ArgumentError("repeated edge");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> vis(n, 0);
  std::vector<std::uint32_t> queue{0};
  vis[0] = 1;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (auto v : adj[queue[h]])
      if (!vis[v]) {
        vis[v] = 1;
        queue.push_back(v);
      }
  if (queue.size() != n) throw ArgumentError("graph is not connected");
}

GraphApprox make_cube_graph(int n, int m) {
  if (n < 1) throw ArgumentError("cube dimension must be >= 1");
  if (m < 1) throw ArgumentError("cube graph needs level >= 1");
  std::size_t side = checked_pow(3, m, "cube graph");
  std::size_t count = checked_pow(side, n, "cube graph");
  check_budget("cube graph", count);
  GraphApprox g;
  g.family = "cube";
  g.n = n;
  g.level = m;
  g.dim = n;
  g.coords.resize(count * n);
  std::vector<std::size_t> stride(n);
  stride[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * side;
  for (std::size_t i = 0; i < count; ++i) {
    for (int d = 0; d < n; ++d) {
      std::size_t k = (i / stride[d]) % side;
      g.coords[i * n + d] = (double(k) + 0.5) / double(side);
      if (k + 1 < side) g.edges.push_back({std::uint32_t(i), std::uint32_t(i + stride[d])});
    }
    std::size_t k0 = i / stride[0];
    if (k0 == 0) g.boundary_a.push_back(i);
    if (k0 == side - 1) g.boundary_b.push_back(i);
  }
  return g;
}

GraphApprox make_gasket_graph(int n, int m) {
  if (n < 2) throw ArgumentError("gasket ambient dimension must be >= 2");
  if (m < 0) throw ArgumentError("level must be >= 0");
  std::size_t cells = checked_pow(n + 1, m, "gasket graph");
  check_budget("gasket graph", cells * (n + 1));
  GraphApprox g;
  g.family = "gasket";
  g.n = n;
  g.level = m;
  g.dim = n;
  auto simplex = regular_simplex(n);
  // Vertices in integer coordinates along the simplex edge vectors.
  std::map<std::vector<long long>, std::uint32_t> ids;
  std::vector<std::vector<long long>> keys;
  auto vertex = [&](const std::vector<long long>& key) {
    auto [it, fresh] = ids.emplace(key, static_cast<std::uint32_t>(keys.size()));
    if (fresh) keys.push_back(key);
    return it->second;
  };
  std::vector<std::uint32_t> corner(n + 1);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<long long> offset(n, 0);
    std::size_t r = c;
    std::vector<int> word(m);
    for (int l = m - 1; l >= 0; --l) {
      word[l] = static_cast<int>(r % (n + 1));
      r /= (n + 1);
    }
    for (int l = 0; l < m; ++l)
      if (word[l] > 0) offset[word[l] - 1] += 1LL << (m - 1 - l);
    for (int i = 0; i <= n; ++i) {
      auto key = offset;
      if (i > 0) key[i - 1] += 1;
      corner[i] = vertex(key);
    }
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) g.edges.push_back({corner[i], corner[j]});
  }
  const double scale = std::ldexp(1.0, -m);
  g.coords.assign(keys.size() * n, 0.0);
  for (std::size_t v = 0; v < keys.size(); ++v)
    for (int k = 0; k < n; ++k)
      for (int d = 0; d < n; ++d) g.coords[v * n + d] += double(keys[v][k]) * scale * simplex[k + 1][d];
  g.boundary_a.push_back(ids.at(std::vector<long long>(n, 0)));
  std::vector<long long> far(n, 0);
  far[0] = 1LL << m;
  g.boundary_b.push_back(ids.at(far));
  return g;
}

GraphApprox make_carpet_graph(int m) {
  if (m < 1) throw ArgumentError("carpet graph needs level >= 1");
  std::size_t count = checked_pow(8, m, "carpet graph");
  check_budget("carpet graph", count);
  static const int kMaps[8][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};
  GraphApprox g;
  g.family = "carpet";
  g.n = 2;
  g.level = m;
  g.dim = 2;
  g.coords.resize(count * 2);
  const long long side = static_cast<long long>(checked_pow(3, m, "carpet graph"));
  std::map<std::pair<long long, long long>, std::uint32_t> cell;
  std::vector<std::pair<long long, long long>> pos(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t r = i;
    std::vector<int> word(m);
    for (int l = m - 1; l >= 0; --l) {
      word[l] = static_cast<int>(r % 8);
      r /= 8;
    }
    long long ix = 0, iy = 0;
    for (int l = 0; l < m; ++l) {
      ix = 3 * ix + kMaps[word[l]][0];
      iy = 3 * iy + kMaps[word[l]][1];
    }
    pos[i] = {ix, iy};
    cell[{ix, iy}] = static_cast<std::uint32_t>(i);
    g.coords[2 * i] = (double(ix) + 0.5) / double(side);
    g.coords[2 * i + 1] = (double(iy) + 0.5) / double(side);
    if (ix == 0) g.boundary_a.push_back(i);
    if (ix == side - 1) g.boundary_b.push_back(i);
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto [ix, iy] = pos[i];
    for (auto [dx, dy] : {std::pair{1LL, 0LL}, std::pair{0LL, 1LL}}) {
      auto it = cell.find({ix + dx, iy + dy});
      if (it != cell.end()) g.edges.push_back({std::uint32_t(i), it->second});
    }
  }
  return g;
}

GraphApprox make_path_graph(std::size_t edges) {
  if (edges < 1) throw ArgumentError("path needs at least one edge");
  GraphApprox g;
  g.family = "path";
  g.n = 1;
  g.level = 0;
  g.dim = 1;
  for (std::size_t i = 0; i <= edges; ++i) {
    g.coords.push_back(double(i) / double(edges));
    if (i < edges) g.edges.push_back({std::uint32_t(i), std::uint32_t(i + 1)});
  }
  g.boundary_a = {0};
  g.boundary_b = {edges};
  return g;
}

std::vector<GraphApprox> build_graph_family(const std::string& family, int n,
                                            const std::vector<int>& levels) {
  if (levels.empty()) throw ArgumentError("no levels requested");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1]) throw ArgumentError("levels must be strictly ascending");
  std::vector<GraphApprox> out;
  for (int m : levels) {
    if (family == "cube") out.push_back(make_cube_graph(n, m));
    else if (family == "gasket") out.push_back(make_gasket_graph(n, m));
    else if (family == "carpet") out.push_back(make_carpet_graph(m));
    else throw ArgumentError("unknown graph family: " + family);
  }
  return out;
}

std::pair<double, double> ifs_parameters(const std::string& family, int n) {
  if (family == "cube") return {std::pow(3.0, n), 3.0};
  if (family == "gasket") return {double(n + 1), 2.0};
  if (family == "carpet") return {8.0, 3.0};
  throw ArgumentError("no IFS parameters for family: " + family);
}

}  // namespace besovlab
