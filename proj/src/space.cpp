#include "besovlab/space.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "besovlab/ball_index.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"

namespace besovlab {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(b, 1))
      return std::numeric_limits<std::size_t>::max();
    r *= b;
  }
  return r;
}

}  // namespace

std::vector<std::vector<double>> regular_simplex(int n) {
  std::vector<std::vector<double>> v(n + 1, std::vector<double>(n, 0.0));
  for (int k = 1; k <= n; ++k) {
    std::vector<double> c(n, 0.0);
    for (int j = 0; j < k; ++j)
      for (int d = 0; d < n; ++d) c[d] += v[j][d] / k;
    double r2 = 0;
    for (int d = 0; d < n; ++d) r2 += (c[d] - v[0][d]) * (c[d] - v[0][d]);
    v[k] = c;
    v[k][k - 1] = std::sqrt(std::max(0.0, 1.0 - r2));
  }
  return v;
}

Space::Space(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
    : dim_(dim), kind_(MetricKind::euclidean), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) throw ArgumentError("dimension must be at least 1");
  if (coords_.size() != weights_.size() * dim_)
    throw ArgumentError("coordinate count does not match weights");
  for (double c : coords_)
    if (!std::isfinite(c)) throw ArgumentError("non-finite coordinate");
  finish();
}

Space Space::from_matrix(std::vector<double> matrix, std::vector<double> weights) {
  Space s;
  std::size_t n = weights.size();
  if (matrix.size() != n * n) throw ArgumentError("distance matrix must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i * n + i] != 0.0) throw ArgumentError("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      double a = matrix[i * n + j], b = matrix[j * n + i];
      if (!std::isfinite(a) || a < 0) throw ArgumentError("distances must be finite and >= 0");
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw ArgumentError("distance matrix is not symmetric");
    }
  }
  auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
    if (matrix[i * n + k] > matrix[i * n + j] + matrix[j * n + k] + 1e-9)
      throw ArgumentError("distance matrix violates the triangle inequality");
  };
  if (n <= 40) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) check(i, j, k);
  } else {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int t = 0; t < 20000; ++t) check(pick(rng), pick(rng), pick(rng));
  }
  s.dim_ = 1;
  s.kind_ = MetricKind::explicit_matrix;
  s.matrix_ = std::move(matrix);
  s.weights_ = std::move(weights);
  s.coords_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s.coords_[i] = double(i);
  s.finish();
  return s;
}

void Space::finish() {
  if (weights_.empty()) throw ArgumentError("space needs at least one point");
  CompensatedSum m;
  for (double w : weights_) {
    if (!(w > 0) || !std::isfinite(w)) throw ArgumentError("weights must be positive and finite");
    m.add(w);
  }
  total_mass_ = m.value();
  index_ = std::make_shared<BallIndex>(dim_, coords_, weights_,
                                       kind_ == MetricKind::explicit_matrix ? &matrix_ : nullptr);
  diameter_ = index_->diameter();
  id_ = g_next_id.fetch_add(1);
  double md = std::numeric_limits<double>::infinity();
  if (kind_ == MetricKind::explicit_matrix) {
    for (double d : matrix_)
      if (d > 0) md = std::min(md, d);
  } else {
    for (std::size_t i = 0; i < size(); ++i) md = std::min(md, index_->nearest_other(i));
  }
  min_distance_ = md;
}

double Space::min_distance() const { return min_distance_; }

void Space::set_labels(std::vector<int> labels, std::vector<std::string> names) {
  if (!labels.empty() && labels.size() != size()) throw ArgumentError("label count mismatch");
  for (int l : labels)
    if (l < -1 || l >= static_cast<int>(names.size())) throw ArgumentError("label id out of range");
  labels_ = std::move(labels);
  label_names_ = std::move(names);
}

std::vector<std::size_t> Space::points_with_label(const std::string& name) const {
  std::vector<std::size_t> out;
  auto it = std::find(label_names_.begin(), label_names_.end(), name);
  if (it == label_names_.end()) return out;
  int id = static_cast<int>(it - label_names_.begin());
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == id) out.push_back(i);
  return out;
}

Space make_cube_grid(int n, int m, int base) {
  if (n < 1) throw ArgumentError("cube dimension must be >= 1");
  if (m < 0) throw ArgumentError("level must be >= 0");
  if (base < 1 || base % 2 == 0) throw ArgumentError("base must be an odd positive integer");
  std::size_t side = ipow(base, m);
  std::size_t count = ipow(side, n);
  check_budget("cube grid", count);
  double h = 1.0 / double(side);
  std::vector<double> coords(count * n);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t r = i;
    for (int d = n - 1; d >= 0; --d) {
      coords[i * n + d] = (double(r % side) + 0.5) * h;
      r /= side;
    }
  }
  Space s(n, std::move(coords), std::vector<double>(count, 1.0 / double(count)));
  std::vector<double> anchors;
  for (std::size_t c = 0; c < (std::size_t{1} << n); ++c)
    for (int d = 0; d < n; ++d) anchors.push_back(((c >> (n - 1 - d)) & 1) ? 1.0 : 0.0);
  s.set_anchors(std::move(anchors));
  s.set_family("cube", m);
  return s;
}

Space make_sierpinski_gasket(int n, int m) {
  if (n < 2) throw ArgumentError("gasket ambient dimension must be >= 2");
  if (m < 0) throw ArgumentError("level must be >= 0");
  std::size_t count = ipow(n + 1, m);
  check_budget("sierpinski gasket", count);
  auto v = regular_simplex(n);
  std::vector<double> centroid(n, 0.0);
  for (auto& p : v)
    for (int d = 0; d < n; ++d) centroid[d] += p[d] / (n + 1);
  std::vector<double> coords(count * n);
  double scale = std::ldexp(1.0, -m);
  for (std::size_t i = 0; i < count; ++i) {
    // Digits of i in base n+1, most significant first, are the IFS word.
    std::vector<int> word(m);
    std::size_t r = i;
    for (int l = m - 1; l >= 0; --l) {
      word[l] = static_cast<int>(r % (n + 1));
      r /= (n + 1);
    }
    for (int d = 0; d < n; ++d) {
      double x = scale * centroid[d];
      double f = 0.5;
      for (int l = 0; l < m; ++l) {
        x += f * v[word[l]][d];
        f *= 0.5;
      }
      coords[i * n + d] = x;
    }
  }
  Space s(n, std::move(coords), std::vector<double>(count, 1.0 / double(count)));
  std::vector<double> anchors;
  for (auto& p : v) anchors.insert(anchors.end(), p.begin(), p.end());
  s.set_anchors(std::move(anchors));
  s.set_family("gasket", m);
  return s;
}

Space make_sierpinski_carpet(int m) {
  if (m < 0) throw ArgumentError("level must be >= 0");
  std::size_t count = ipow(8, m);
  check_budget("sierpinski carpet", count);
  static const int kMaps[8][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};
  std::vector<double> coords(count * 2);
  double h = std::pow(3.0, -m);
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
    coords[2 * i] = (double(ix) + 0.5) * h;
    coords[2 * i + 1] = (double(iy) + 0.5) * h;
  }
  Space s(2, std::move(coords), std::vector<double>(count, 1.0 / double(count)));
  s.set_anchors({0, 0, 0, 1, 1, 0, 1, 1});
  s.set_family("carpet", m);
  return s;
}

namespace {

// The anchor whose unique nearest atom is `atom`, else the atom itself.
std::vector<double> glue_point_for(const Space& s, std::size_t atom) {
  const std::size_t dim = s.dim();
  const auto& anchors = s.anchors();
  for (std::size_t a = 0; a + dim <= anchors.size(); a += dim) {
    const double* q = anchors.data() + a;
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    bool unique = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double d = euclid(s.point(i), q, dim);
      if (d < best - 1e-12) {
        best = d;
        arg = i;
        unique = true;
      } else if (std::abs(d - best) <= 1e-12) {
        unique = false;
      }
    }
    if (unique && arg == atom) return std::vector<double>(q, q + dim);
  }
  return std::vector<double>(s.point(atom), s.point(atom) + dim);
}

}  // namespace

Space glue_at_point(const Space& a, std::size_t oa, const Space& b, std::size_t ob, bool renormalize) {
  if (oa >= a.size() || ob >= b.size()) throw ArgumentError("gluing index out of range");
  if (a.metric_kind() != MetricKind::euclidean || b.metric_kind() != MetricKind::euclidean)
    throw ArgumentError("gluing needs Euclidean spaces");
  if (a.dim() != b.dim()) throw ArgumentError("gluing needs equal ambient dimensions");
  const std::size_t dim = a.dim();
  auto ga = glue_point_for(a, oa);
  auto gb = glue_point_for(b, ob);
  std::vector<double> coords;
  coords.reserve((a.size() + b.size()) * dim);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t d = 0; d < dim; ++d) coords.push_back(-(a.point(i)[d] - ga[d]));
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t d = 0; d < dim; ++d) coords.push_back(b.point(i)[d] - gb[d]);

  // Overlap check between the two copies.
  {
    std::vector<double> bc(coords.begin() + a.size() * dim, coords.end());
    BallIndex bi(dim, bc, b.weights(), nullptr);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j : bi.ball_at(coords.data() + i * dim, 1e-12)) {
        if (i == oa && j == ob) continue;
        throw GeometryError("gluing overlaps beyond the glue point: atom " + std::to_string(i) +
                            " of the first space meets atom " + std::to_string(j) +
                            " of the second");
      }
    }
  }

  std::vector<double> weights;
  weights.reserve(a.size() + b.size());
  weights.insert(weights.end(), a.weights().begin(), a.weights().end());
  weights.insert(weights.end(), b.weights().begin(), b.weights().end());
  if (renormalize) {
    double total = a.total_mass() + b.total_mass();
    for (double& w : weights) w /= total;
  }
  Space s(dim, std::move(coords), std::move(weights));
  std::vector<int> labels(a.size(), 0);
  labels.resize(a.size() + b.size(), 1);
  s.set_labels(std::move(labels), {"E1", "E2"});
  s.set_glue(GlueInfo{std::vector<double>(dim, 0.0), oa, a.size() + ob});
  s.set_family("glued" + a.family() + "s", a.level());
  return s;
}

double ball_volume(const Space& space, std::size_t x, double r) {
  if (!(r > 0)) throw ArgumentError("ball radius must be positive");
  if (x >= space.size()) throw ArgumentError("point index out of range");
  return space.index().volume(x, r);
}

DoublingReport doubling_report(const Space& space, const DoublingOptions& options) {
  if (space.size() < 2) throw ArgumentError("doubling report needs at least two points");
  if (options.sample_count == 0) throw ArgumentError("sample_count must be positive");
  if (!(options.radius_decades > 0)) throw ArgumentError("radius_decades must be positive");
  DoublingReport rep;
  rep.seed = options.seed;
  rep.r_max = options.r_max > 0 ? options.r_max : space.diameter() / 8;
  rep.r_min = std::max(rep.r_max * std::pow(10.0, -options.radius_decades), 2 * space.min_distance());
  if (!(rep.r_min < rep.r_max)) rep.r_min = rep.r_max / 2;
  double decades = std::log10(rep.r_max / rep.r_min);
  std::size_t nr = std::max<std::size_t>(
      4, static_cast<std::size_t>(std::ceil(decades * options.radii_per_decade)) + 1);
  auto radii = log_spaced_desc(rep.r_max, rep.r_min, nr);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
  std::vector<std::size_t> centers(options.sample_count);
  for (auto& c : centers) c = pick(rng);
  rep.samples = centers.size();

  const BallIndex& idx = space.index();
  std::vector<double> xs, ys;
  double cd = 1.0;
  for (double r : radii) {
    for (std::size_t x : centers) {
      double v1 = idx.volume(x, r);
      double v2 = idx.volume(x, 2 * r);
      cd = std::max(cd, v2 / v1);
      xs.push_back(std::log(r));
      ys.push_back(std::log(v1));
    }
  }
  LinearFit fit = least_squares(xs, ys);
  rep.doubling_constant = cd;
  rep.ahlfors_dimension = fit.slope;
  rep.fit_residual = fit.residual_rms;
  return rep;
}

DoublingReport doubling_report(const Space& space, std::size_t sample_count, double radius_decades) {
  DoublingOptions o;
  o.sample_count = sample_count;
  o.radius_decades = radius_decades;
  return doubling_report(space, o);
}

Space make_family_space(const std::string& tag, int n, int level) {
  if (tag == "cube") return make_cube_grid(n, level);
  if (tag == "gasket") return make_sierpinski_gasket(n, level);
  if (tag == "carpet") return make_sierpinski_carpet(level);
  if (tag == "gluedcubes") {
    Space c = make_cube_grid(n, level);
    return glue_at_point(c, 0, c, 0, false);
  }
  if (tag == "gluedgaskets") {
    Space g = make_sierpinski_gasket(n, level);
    return glue_at_point(g, 0, g, 0, false);
  }
  if (tag == "gluedcarpets") {
    Space c = make_sierpinski_carpet(level);
    return glue_at_point(c, 0, c, 0, false);
  }
  throw ArgumentError("unknown space family: " + tag);
}

SpaceFamily make_family(const std::string& tag, int n, const std::vector<int>& levels) {
  if (levels.empty()) throw ArgumentError("family needs at least one level");
  if (!std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw ArgumentError("levels must be strictly ascending");
  SpaceFamily f;
  f.tag = tag;
  f.n = n;
  f.levels = levels;
  for (int m : levels) f.spaces.push_back(std::make_shared<const Space>(make_family_space(tag, n, m)));
  return f;
}

}  // namespace besovlab
