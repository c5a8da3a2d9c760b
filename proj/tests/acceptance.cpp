// Acceptance criteria. Prints one PASS/FAIL line per criterion; exits 1 when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "besovlab/capacity.hpp"
#include "besovlab/decompose.hpp"
#include "besovlab/energy.hpp"
#include "besovlab/exponents.hpp"
#include "besovlab/graphs.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace besovlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SpacePtr share(Space s) { return std::make_shared<const Space>(std::move(s)); }

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) g.push_back(lo + i * step);
  return g;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> size(10, 200);
  std::uniform_real_distribution<double> pd(1.1, 4.0), td(0.1, 1.5);
  double worst = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < 50; ++k) {
    auto s = oracle::random_space(rng, size(rng), k % 2 == 1);
    FunctionOnSpace f(s, oracle::random_values(rng, s->size()));
    double p = pd(rng), theta = td(rng);
    worst = std::max(worst, oracle::rel(besov_pp_energy(f, p, theta), oracle::besov_pp(*s, f.values(), p, theta)));
    auto radii = radius_grid(s->diameter(), s->diameter() / 30, 6);
    MultiscaleOptions mo;
    mo.with_besov = false;
    mo.with_dyadic = false;
    auto prof = multiscale_energy(f, p, theta, radii, mo);
    auto want = oracle::multiscale(*s, f.values(), p, theta, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) worst = std::max(worst, oracle::rel(prof.values[i], want[i]));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-12 && secs <= 60, "max rel " + fmt("%.2e", worst) + ", " + fmt("%.1f s", secs)};
}

Outcome bowtie_scaling() {
  auto t0 = std::chrono::steady_clock::now();
  auto s = share(make_family_space("gluedcubes", 2, 6));
  const double h = s->min_distance();
  auto radii = radius_grid(0.25, 2 * h, 16);
  auto chi = indicator(s, s->points_with_label("E1"));
  MultiscaleOptions mo;
  mo.with_besov = false;
  mo.with_dyadic = false;
  bool ok = true;
  std::string detail;
  for (double p : {1.5, 2.0}) {
    for (const auto& prof : multiscale_energies(chi, p, {0.6, 0.8, 1.1}, radii, mo)) {
      auto fit = fit_power_law(radii, prof.values, 8 * h, 0.25);
      double want = 2 - p * prof.theta;
      ok = ok && std::abs(fit.alpha - want) <= 0.15 && fit.r_squared >= 0.95;
      char buf[96];
      std::snprintf(buf, sizeof buf, " p=%.1f th=%.1f: %.3f (%.2f, r2 %.4f)", p, prof.theta, fit.alpha, want,
                    fit.r_squared);
      detail += buf;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ok && secs <= 600, "slopes" + detail + ", " + fmt("%.1f s", secs)};
}

Outcome carpet_scaling() {
  auto t0 = std::chrono::steady_clock::now();
  auto s = share(make_family_space("gluedcarpets", 2, 5));
  const double h = s->min_distance();
  auto radii = radius_grid(1.0 / 3, h, 16);
  MultiscaleOptions mo;
  mo.with_besov = false;
  mo.with_dyadic = false;
  auto prof = multiscale_energy(indicator(s, s->points_with_label("E1")), 2, 0.7, radii, mo);
  auto fit = fit_power_law(radii, prof.values, 27 * h, 1.0 / 3);
  double want = std::log(8.0) / std::log(3.0) - 1.4;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::abs(fit.alpha - want) <= 0.2 && secs <= 900,
          "slope " + fmt("%.4f", fit.alpha) + " vs " + fmt("%.4f", want) + ", " + fmt("%.1f s", secs)};
}

Outcome cube_factor() {
  bool ok = true;
  std::string detail;
  auto fam = build_graph_family("cube", 2, {1, 2, 3, 4});
  for (double p : {1.5, 2.0, 3.0}) {
    auto est = rho_p_estimate(p_capacities(fam, p), "cube", 2);
    double want = std::pow(3.0, p - 2), got = est.ratios.back();
    double tol = p == 2.0 ? 0.05 : 0.10;
    ok = ok && std::abs(got / want - 1) <= tol;
    char buf[80];
    std::snprintf(buf, sizeof buf, " p=%.1f: %.4f vs %.4f", p, got, want);
    detail += buf;
  }
  return {ok, "level-4 ratios" + detail};
}

Outcome gasket_rho() {
  auto fam = build_graph_family("gasket", 2, {1, 2, 3, 4});
  auto res = p_capacities(fam, 2.0);
  auto est = rho_p_estimate(res, "gasket", 2);
  double worst = 0;
  for (std::size_t i = 0; i + 1 < fam.size(); ++i) {
    double exact = oracle::dirichlet_capacity(fam[i]) / oracle::dirichlet_capacity(fam[i + 1]);
    worst = std::max(worst, std::abs(est.ratios[i] / exact - 1));
  }
  double dw = std::log(5.0) / std::log(2.0);
  double dw_err = std::abs(est.walk_dimension / dw - 1);
  return {worst <= 0.02 && dw_err <= 0.02,
          "ratio error " + fmt("%.2e", worst) + ", d_w " + fmt("%.4f", est.walk_dimension) + " vs " + fmt("%.4f", dw)};
}

Outcome critical_exponents() {
  auto t0 = std::chrono::steady_clock::now();
  const double p = 1.5;
  auto gc = make_family("gluedcubes", 2, {2, 3, 4});
  auto tp = theta_p_estimate(gc, p,
                             {label_indicator("E1"), cone_function({-0.5, -0.5}, 0.4, "E1"), coordinate_function(0, "E1")},
                             grid(0.8, 1.7, 0.05));
  auto gs = make_family("gluedcubes", 2, {1, 2, 3});
  auto ts = theta_p_star_estimate(gs, p, {cone_function({-0.5, -0.5}, 0.5), cone_function({0.5, 0.5}, 0.5)},
                                  grid(0.8, 1.7, 0.05), {1e-3, 1e-2, 1e-1, 1, 10});
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!tp.value || !ts.value) return {false, "no estimate"};
  double a = *tp.value, b = *ts.value;
  bool ok = a >= 1.20 - 1e-9 && a <= 1.47 + 1e-9 && b >= 0.9 - 1e-9 && b <= 1.1 + 1e-9 && a - b >= 0.1 - 1e-9;
  return {ok, "theta_p " + fmt("%.2f", a) + ", theta_p* " + fmt("%.2f", b) + ", " + fmt("%.1f s", secs)};
}

// Mass of the symmetric difference between a component and a labelled piece.
double mismatch(const Space& s, const IndexSet& comp, int label) {
  std::vector<char> in(s.size(), 0);
  for (auto i : comp) in[i] = 1;
  double m = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (bool(in[i]) != (s.labels()[i] == label)) m += s.weight(i);
  return m;
}

Outcome decomposition() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto [tag, p, theta] : {std::tuple{"gluedcubes", 1.5, 1.2}, std::tuple{"gluedcarpets", 1.3, 1.2}}) {
    auto fam = make_family(tag, 2, {2, 3, 4});
    auto d = detect_components(fam, p, theta);
    const Space& s = fam.finest();
    double worst = 1;
    if (d.k == 2) {
      double straight = std::max(mismatch(s, d.components[0], 0), mismatch(s, d.components[1], 1));
      double swapped = std::max(mismatch(s, d.components[0], 1), mismatch(s, d.components[1], 0));
      worst = std::min(straight, swapped) / s.total_mass();
    }
    ok = ok && d.k == 2 && worst <= 0.01;
    detail += std::string(" ") + tag + " k=" + std::to_string(d.k) + " (mismatch " + fmt("%.1e", worst) + ")";
  }
  for (auto [tag, p, theta, levels] : {std::tuple{"cube", 2.0, 1.0, std::vector<int>{2, 3, 4}},
                                       std::tuple{"gasket", 2.0, 1.16, std::vector<int>{4, 5, 6}}}) {
    auto d = detect_components(make_family(tag, 2, levels), p, theta);
    ok = ok && d.k == 1;
    detail += std::string(" ") + tag + " k=" + std::to_string(d.k);
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ok, detail.substr(1) + ", " + fmt("%.1f s", secs)};
}

Outcome property_suites() {
  using Suite = props::SuiteResult (*)(std::uint64_t, std::size_t);
  const Suite suites[] = {props::contraction_suite, props::leibniz_suite,       props::triangle_suite,
                          props::homogeneity_suite, props::dyadic_suite,        props::ks_vanishing_suite,
                          props::idempotence_suite, props::localization_suite};
  bool ok = true;
  std::size_t cases = 0, failures = 0;
  std::string first;
  std::uint64_t seed = 2001;
  for (auto suite : suites) {
    auto r = suite(seed++, 100);
    ok = ok && r.ok(100);
    cases += r.cases;
    failures += r.failures;
    if (!r.ok(100) && first.empty()) first = "; " + props::describe(r);
  }
  return {ok, std::to_string(cases) + " cases in 8 suites, " + std::to_string(failures) + " failures" + first};
}

// Block means of `v` over blocks of `width` entries, from the largest radius down.
std::vector<double> block_means(const std::vector<double>& v, std::size_t first, std::size_t width) {
  std::vector<double> out;
  for (std::size_t b = first; b + width <= v.size(); b += width) {
    double s = 0;
    for (std::size_t i = b; i < b + width; ++i) s += v[i];
    out.push_back(s / double(width));
  }
  return out;
}

Outcome divergence_witness() {
  auto t0 = std::chrono::steady_clock::now();
  auto s = share(make_family_space("gluedcubes", 2, 6));
  const double h = s->min_distance();
  const std::size_t per_decade = 16;
  auto radii = radius_grid(0.5, 2 * h, per_decade);
  const double norm = iks_normalization_cube(2);
  auto w = cross_coupling_iks(loglog_witness(s), constant_function(s, 0.0), s, 2, 1, radii, norm);
  std::vector<double> a(s->size()), b(s->size());
  for (std::size_t i = 0; i < s->size(); ++i) {
    const double* x = s->point(i);
    a[i] = std::sin(3 * x[0]) + x[1] * x[1];
    b[i] = std::cos(2 * x[1]) - 1 + x[0];
  }
  auto sm = cross_coupling_iks(FunctionOnSpace(s, a), FunctionOnSpace(s, b), s, 2, 1, radii, norm);

  // Smallest two decades in half-decade blocks.
  const std::size_t window = 2 * per_decade, width = per_decade / 2;
  const std::size_t first = radii.size() - window;
  auto wb = block_means(w.values, first, width);
  bool grows = wb.size() == 4;
  for (std::size_t i = 1; i < wb.size(); ++i) grows = grows && wb[i] > wb[i - 1];
  double smooth_max = *std::max_element(sm.values.begin() + first, sm.values.end());
  double smooth_ref = sm.values.front();
  bool bounded = smooth_max <= 2 * smooth_ref;
  std::string detail = "witness blocks";
  for (double v : wb) detail += fmt(" %.4g", v);
  detail += "; smooth max " + fmt("%.4g", smooth_max) + " vs " + fmt("%.4g", smooth_ref);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {grows && bounded, detail + ", " + fmt("%.1f s", secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 oracle equivalence", oracle_equivalence},
      {"2 bow-tie scaling law", bowtie_scaling},
      {"3 glued-carpet scaling", carpet_scaling},
      {"4 cube scaling factor", cube_factor},
      {"5 gasket rho_2", gasket_rho},
      {"6 bow-tie critical exponents", critical_exponents},
      {"7 decomposition", decomposition},
      {"8 property suites", property_suites},
      {"9 divergence witness", divergence_witness},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
