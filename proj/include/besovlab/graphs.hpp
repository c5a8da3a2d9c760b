#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace besovlab {

// Level-m approximation graph of a self-similar set with unit conductances.
struct GraphApprox {
  std::string family;  // cube, gasket, carpet
  int n = 1;           // ambient dimension of the cube / gasket
  int level = 0;
  std::size_t dim = 1;
  std::vector<double> coords;  // row-major vertex positions
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::size_t> boundary_a;
  std::vector<std::size_t> boundary_b;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
};

// Throws ArgumentError when an invariant is broken (empty or overlapping
// boundaries, self-loops, repeated edges, disconnected graph).
void validate(const GraphApprox& g);

GraphApprox make_cube_graph(int n, int m);
GraphApprox make_gasket_graph(int n, int m);
GraphApprox make_carpet_graph(int m);
// Path with `edges` unit edges, boundaries at the two ends.
GraphApprox make_path_graph(std::size_t edges);

// family: "cube", "gasket" or "carpet"; n is ignored for the carpet.
std::vector<GraphApprox> build_graph_family(const std::string& family, int n,
                                            const std::vector<int>& levels);

// (N, L): number of maps and inverse contraction ratio of the family's IFS.
std::pair<double, double> ifs_parameters(const std::string& family, int n);

}  // namespace besovlab
