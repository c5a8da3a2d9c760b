#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace besovlab {

enum class MetricKind { euclidean, explicit_matrix };

inline double euclid(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

class BallIndex;

// Gluing metadata: the common point and the atoms that were matched.
struct GlueInfo {
  std::vector<double> point;
  std::size_t atom_a = 0;  // index in the glued space
  std::size_t atom_b = 0;
};

class Space {
 public:
  // Euclidean space; coords is row-major, size() * dim entries.
  Space(std::size_t dim, std::vector<double> coords, std::vector<double> weights);
  // Explicit distance matrix (row-major size n*n).
  static Space from_matrix(std::vector<double> matrix, std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }
  MetricKind metric_kind() const { return kind_; }
  const double* point(std::size_t i) const { return coords_.data() + i * dim_; }
  const std::vector<double>& coords() const { return coords_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& matrix() const { return matrix_; }
  double total_mass() const { return total_mass_; }
  double diameter() const { return diameter_; }
  double distance(std::size_t i, std::size_t j) const {
    if (kind_ == MetricKind::explicit_matrix) return matrix_[i * size() + j];
    return euclid(point(i), point(j), dim_);
  }
  // Smallest positive interpoint distance.
  double min_distance() const;

  const BallIndex& index() const { return *index_; }

  // Identity token; equal for copies of the same constructed space.
  std::uint64_t id() const { return id_; }

  // Component labels: per-point id into label_names(); empty when unlabeled.
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  void set_labels(std::vector<int> labels, std::vector<std::string> names);
  std::vector<std::size_t> points_with_label(const std::string& name) const;

  // Geometric corner points of the generating cell (cube corners, simplex vertices).
  const std::vector<double>& anchors() const { return anchors_; }
  void set_anchors(std::vector<double> anchors) { anchors_ = std::move(anchors); }

  const std::optional<GlueInfo>& glue() const { return glue_; }
  void set_glue(GlueInfo g) { glue_ = std::move(g); }

  const std::string& family() const { return family_; }
  int level() const { return level_; }
  void set_family(std::string family, int level) {
    family_ = std::move(family);
    level_ = level;
  }

 private:
  Space() = default;
  void finish();

  std::size_t dim_ = 0;
  MetricKind kind_ = MetricKind::euclidean;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::vector<double> matrix_;
  double total_mass_ = 0.0;
  double diameter_ = 0.0;
  mutable double min_distance_ = -1.0;
  std::shared_ptr<const BallIndex> index_;
  std::uint64_t id_ = 0;
  std::vector<int> labels_;
  std::vector<std::string> label_names_;
  std::vector<double> anchors_;
  std::optional<GlueInfo> glue_;
  std::string family_ = "custom";
  int level_ = 0;
};

using SpacePtr = std::shared_ptr<const Space>;

// Vertices of a regular n-simplex with unit edges, v0 at the origin.
std::vector<std::vector<double>> regular_simplex(int n);

Space make_cube_grid(int n, int m, int base = 3);
Space make_sierpinski_gasket(int n, int m);
Space make_sierpinski_carpet(int m);

// Glues copies of a and b so that atom oa of a and atom ob of b meet at the
// origin; a is point-reflected. When the atom is the nearest atom to a corner
// anchor, the corner itself is the gluing point.
Space glue_at_point(const Space& a, std::size_t oa, const Space& b, std::size_t ob,
                    bool renormalize);

double ball_volume(const Space& space, std::size_t x, double r);

struct DoublingOptions {
  std::size_t sample_count = 64;
  double radius_decades = 1.0;
  double r_max = 0.0;  // 0: diameter / 8
  std::size_t radii_per_decade = 16;
  std::uint64_t seed = 20240611;
};

struct DoublingReport {
  double doubling_constant = 1.0;
  double ahlfors_dimension = 0.0;
  double fit_residual = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

DoublingReport doubling_report(const Space& space, const DoublingOptions& options = {});
DoublingReport doubling_report(const Space& space, std::size_t sample_count,
                               double radius_decades);

// A space per refinement level, ascending.
struct SpaceFamily {
  std::string tag;  // cube, gasket, carpet, gluedcubes, gluedgaskets, gluedcarpets
  int n = 2;
  std::vector<int> levels;
  std::vector<SpacePtr> spaces;

  const Space& finest() const { return *spaces.back(); }
};

SpaceFamily make_family(const std::string& tag, int n, const std::vector<int>& levels);
Space make_family_space(const std::string& tag, int n, int level);

}  // namespace besovlab
