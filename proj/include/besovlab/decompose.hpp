#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "besovlab/energy.hpp"
#include "besovlab/exponents.hpp"
#include "besovlab/space.hpp"

namespace besovlab {

using IndexSet = std::vector<std::size_t>;  // sorted point indices

struct SimpleFunctionForm {
  bool simple = true;             // false when more than k_budget levels were found
  std::vector<double> levels;     // ascending, nonzero
  std::vector<IndexSet> sets;     // level sets, aligned with levels
  IndexSet zero_set;
  IndexSet residual;              // points in clusters lighter than mass_tol
  std::size_t cluster_count = 0;  // clusters before residual removal, zero level excluded
};

// mass_tol is relative to the total mass.
SimpleFunctionForm simple_levels(const FunctionOnSpace& f, double value_tol, double mass_tol,
                                 std::size_t k_budget = 8);

// Venn refinement of the sets; pieces lighter than mass_tol (relative to the
// total mass) are merged into the heaviest piece sharing an input set with them.
// Output is ordered by smallest index.
std::vector<IndexSet> disjointify(const Space& space, const std::vector<IndexSet>& sets, double mass_tol);

double set_mass(const Space& space, const IndexSet& set);

// For every point of `to`, the nearest point of `from` (lowest index on ties).
std::vector<std::size_t> nearest_atoms(const Space& from, const Space& to);
// Points of `to` whose nearest atom of `from` lies in the set.
IndexSet transfer_set(const Space& from, const IndexSet& set, const Space& to);

struct CertificateOptions {
  double slope_threshold = 0.1;
  double tail_fraction = 0.5;
  std::vector<double> radii;  // for the KS tail; default_radii of the finest level when empty
};

// Finite-Besov and KS-tail evidence for an indicator.
struct SetCertificate {
  std::vector<double> energies;  // besov_pp(chi_E) per level
  GrowthSlope growth;
  double ks_tail_slope = 0.0;
  TailClass ks_class = TailClass::indeterminate;
  bool level_ok = false;  // growth slope <= threshold
  bool ks_ok = false;     // tail slope > 0
  bool pass() const { return level_ok && ks_ok; }
};

// E is given on the finest level and transferred to the others by nearest atom.
SetCertificate certify_set(const SpaceFamily& family, const IndexSet& set, double p, double theta,
                           const CertificateOptions& options = {});

struct Decomposition {
  std::size_t k = 0;
  std::vector<IndexSet> components;  // on the finest level
  std::vector<double> masses;
  IndexSet residual;
  double residual_mass = 0.0;
  std::vector<SetCertificate> certificates;
  bool indeterminate = false;
  bool finite_mass = true;
  double p = 2.0;
  double theta = 1.0;
  double slope_threshold = 0.1;
  double mass_tol = 0.0;
  int search_level = -1;  // detect_components only

  // Per-point component number on the finest level, -1 for the residual.
  std::vector<int> labels(std::size_t n) const;
};

struct BasisOptions {
  double value_tol = 1e-6;
  double mass_tol = 1e-3;
  std::size_t k_budget = 8;
  CertificateOptions certificate;
};

// Level sets of the candidates on the finest level, pooled with the whole
// space, disjointified, and kept when their indicator is certified.
Decomposition basis_extract(const std::vector<FunctionGenerator>& candidates, double p, double theta,
                            const SpaceFamily& family, const BasisOptions& options = {});

struct DetectOptions {
  std::size_t search_limit = 2000;  // largest level with at most this many points is searched
  double mass_tol = 1e-3;
  CertificateOptions certificate;
};

// Recursive spectral sweep cuts of the Besov coupling graph, each accepted
// only with a passing certificate.
Decomposition detect_components(const SpaceFamily& family, double p, double theta, std::size_t k_max = 8,
                                const DetectOptions& options = {});

struct LocalizationResult {
  std::vector<double> radii;
  std::vector<double> lhs;  // E_theta(u chi_E, t)
  std::vector<double> rhs;  // double sum restricted to E x E
  double max_gap = 0.0;     // max relative gap over the tail window
};

// Throws PreconditionError when the certificate does not pass the level test.
LocalizationResult localization_check(const FunctionOnSpace& u, const IndexSet& set, double p, double theta,
                                      const std::vector<double>& radii, const SetCertificate& certificate,
                                      double tail_fraction = 0.5);

enum class Irreducibility { irreducible, reducible, indeterminate };
const char* to_string(Irreducibility v);

struct IrreducibilityVerdict {
  Irreducibility verdict = Irreducibility::indeterminate;
  std::size_t k = 1;
  Decomposition decomposition;
  std::string witness;  // passing non-constant candidate, if any
  std::vector<ThetaEvidence> evidence;
};

// Default witnesses: coordinate functions, a cone at the centre of mass and
// the harmonic function when the family is a gasket.
std::vector<FunctionGenerator> default_witnesses(const SpaceFamily& family, double p);

IrreducibilityVerdict irreducibility_verdict(const SpaceFamily& family, double p, double theta,
                                             const std::vector<FunctionGenerator>& witnesses = {},
                                             const DetectOptions& options = {});

}  // namespace besovlab
