#include <doctest.h>

#include <algorithm>
#include <random>

#include "besovlab/decompose.hpp"
#include "besovlab/errors.hpp"
#include "support/oracles.hpp"

using namespace besovlab;

namespace {

SpacePtr share(Space s) { return std::make_shared<const Space>(std::move(s)); }

IndexSet range(std::size_t lo, std::size_t hi) {
  IndexSet s;
  for (std::size_t i = lo; i < hi; ++i) s.push_back(i);
  return s;
}

IndexSet sorted(IndexSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

TEST_SUITE("decompose") {
  TEST_CASE("simple level extraction") {
    auto s = share(make_cube_grid(1, 3));
    std::vector<double> v(s->size(), 0.0);
    IndexSet A = range(0, 5), B = range(10, 20);
    for (auto i : A) v[i] = 2;
    for (auto i : B) v[i] = -3;
    auto form = simple_levels(FunctionOnSpace(s, v), 1e-6, 1e-3);
    CHECK(form.simple);
    REQUIRE(form.levels.size() == 2);
    CHECK(form.levels[0] == doctest::Approx(-3.0));
    CHECK(form.levels[1] == doctest::Approx(2.0));
    CHECK(form.sets[0] == B);
    CHECK(form.sets[1] == A);
    CHECK(form.zero_set.size() == s->size() - A.size() - B.size());
    CHECK(form.residual.empty());

    auto c = simple_levels(constant_function(s, 1.5), 1e-6, 1e-3);
    REQUIRE(c.levels.size() == 1);
    CHECK(c.levels[0] == doctest::Approx(1.5));
    CHECK(c.sets[0] == range(0, s->size()));

    // Indicator plus small noise.
    auto g = share(make_family_space("gluedcubes", 2, 2));
    auto e1 = g->points_with_label("E1");
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<double> f(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) f[i] = noise(rng);
    for (auto i : e1) f[i] += 1;
    auto nf = simple_levels(FunctionOnSpace(g, f), 0.1, 1e-3);
    REQUIRE(nf.levels.size() == 1);
    CHECK(nf.levels[0] == doctest::Approx(1.0).epsilon(0.01));
    CHECK(nf.sets[0] == e1);

    // Many distinct values exceed the budget.
    std::vector<double> ramp(s->size());
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 1.0 + double(i);
    auto many = simple_levels(FunctionOnSpace(s, ramp), 1e-6, 1e-3, 8);
    CHECK_FALSE(many.simple);

    // Light clusters go to the residual.
    std::vector<double> spike(s->size(), 1.0);
    spike[7] = 5.0;
    auto sp = simple_levels(FunctionOnSpace(s, spike), 1e-6, 0.05);
    CHECK(sp.residual == IndexSet{7});
    CHECK(sp.levels.size() == 1);
    CHECK(sp.cluster_count == 2);
  }

  TEST_CASE("disjointify") {
    auto s = make_cube_grid(1, 2, 5);  // 25 cells of mass 0.04
    IndexSet A = range(0, 15), B = range(10, 25), C = range(20, 25);
    auto same = disjointify(s, {A, {15, 16, 17}}, 0.0);
    REQUIRE(same.size() == 2);
    CHECK(same[0] == A);

    auto dup = disjointify(s, {A, A}, 0.0);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0] == A);

    auto ab = disjointify(s, {A, B}, 0.01);
    REQUIRE(ab.size() == 3);
    std::vector<double> masses;
    for (const auto& e : ab) masses.push_back(set_mass(s, e));
    std::sort(masses.begin(), masses.end());
    CHECK(masses[0] == doctest::Approx(0.2));
    CHECK(masses[1] == doctest::Approx(0.4));
    CHECK(masses[2] == doctest::Approx(0.4));
    // Ordered by smallest index.
    CHECK(ab[0] == range(0, 10));
    CHECK(ab[1] == range(10, 15));
    CHECK(ab[2] == range(15, 25));

    // A shard below mass_tol merges into a heavy overlapping piece.
    auto shard = disjointify(s, {A, range(14, 16)}, 0.05);
    for (const auto& e : shard) CHECK(set_mass(s, e) >= 0.05 - 1e-12);
    IndexSet uni;
    for (const auto& e : shard) uni.insert(uni.end(), e.begin(), e.end());
    CHECK(sorted(uni) == range(0, 16));

    auto again = disjointify(s, disjointify(s, {A, B, C}, 0.05), 0.05);
    CHECK(again == disjointify(s, {A, B, C}, 0.05));
  }

  TEST_CASE("nearest-atom transfer between levels") {
    auto coarse = make_cube_grid(1, 1);
    auto fine = make_cube_grid(1, 2);
    auto near = nearest_atoms(coarse, fine);
    REQUIRE(near.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(near[i] == i / 3);
    CHECK(transfer_set(coarse, {1}, fine) == range(3, 6));
    CHECK(transfer_set(fine, range(3, 6), coarse) == IndexSet{1});
    CHECK(set_mass(fine, range(0, 3)) == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("basis extraction") {
    auto cube = make_family("cube", 2, {1, 2, 3});
    auto one = basis_extract({constant_generator()}, 2, 1, cube);
    CHECK(one.k == 1);
    CHECK(one.residual_mass <= 1e-12);

    auto gg = make_family("gluedgaskets", 2, {5, 6, 7});
    FunctionGenerator mix{"mix", [](const SpacePtr& s) {
                            std::vector<double> v(s->size(), 0.0);
                            for (auto i : s->points_with_label("E1")) v[i] = 0.5;
                            for (auto i : s->points_with_label("E2")) v[i] = 1.0;
                            return FunctionOnSpace(s, v);
                          }};
    auto dec = basis_extract({label_indicator("E1"), mix}, 2, 0.6, gg);
    const auto& fine = gg.finest();
    REQUIRE(dec.k == 2);
    CHECK_FALSE(dec.indeterminate);
    auto e1 = fine.points_with_label("E1"), e2 = fine.points_with_label("E2");
    CHECK(((dec.components[0] == e1 && dec.components[1] == e2) || (dec.components[0] == e2 && dec.components[1] == e1)));
    for (const auto& c : dec.certificates) CHECK(c.pass());
    for (double m : dec.masses) CHECK(m > 0);

    // Piecewise functions on the found components have level-stable energy.
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> coef(-2, 2);
    for (int t = 0; t < 3; ++t) {
      double a = coef(rng), b = coef(rng);
      std::vector<double> energies;
      for (const auto& s : gg.spaces) {
        std::vector<double> v(s->size());
        auto l1 = transfer_set(fine, dec.components[0], *s);
        for (std::size_t i = 0; i < s->size(); ++i) v[i] = b;
        for (auto i : l1) v[i] = a;
        energies.push_back(besov_pp_energy(FunctionOnSpace(s, v), 2, 0.6));
      }
      CHECK(level_growth_slope(energies, level_spacings(gg)).slope <= 0.1);
    }

    // Above the critical exponent the candidate indicator is rejected.
    CHECK_THROWS_AS(basis_extract({label_indicator("E1")}, 2, 1.0, gg), PreconditionError);
  }

  TEST_CASE("component detection is deterministic") {
    auto gg = make_family("gluedgaskets", 2, {5, 6, 7});
    DetectOptions opt;
    opt.search_limit = 500;
    auto a = detect_components(gg, 2, 0.6, 8, opt);
    auto b = detect_components(gg, 2, 0.6, 8, opt);
    CHECK(a.k == b.k);
    CHECK(a.components == b.components);
    // Sub-cell indicators also have finite energy below d_f / p, so k may exceed 2.
    CHECK(a.k >= 2);
    // Components are disjoint with positive mass and a small residual.
    std::vector<int> seen(gg.finest().size(), 0);
    for (const auto& c : a.components)
      for (auto i : c) CHECK(++seen[i] == 1);
    for (double m : a.masses) CHECK(m > 0);
    CHECK(a.residual_mass <= a.mass_tol * gg.finest().total_mass() + 1e-12);
    for (const auto& c : a.certificates) {
      CHECK(c.growth.slope <= 0.1);
      CHECK(c.ks_tail_slope > 0);
    }
  }

  TEST_CASE("localization check") {
    auto gg = make_family("gluedgaskets", 2, {5, 6, 7});
    auto s = gg.spaces.back();
    auto radii = default_radii(*s);
    IndexSet all = range(0, s->size());
    auto cert_all = certify_set(gg, all, 2, 0.6);
    CHECK(cert_all.pass());
    std::mt19937_64 rng(33);
    FunctionOnSpace u(s, oracle::random_values(rng, s->size()));
    auto whole = localization_check(u, all, 2, 0.6, radii, cert_all);
    REQUIRE(whole.lhs.size() == whole.rhs.size());
    for (std::size_t i = 0; i < whole.lhs.size(); ++i) CHECK(oracle::rel(whole.lhs[i], whole.rhs[i]) <= 1e-12);
    CHECK(whole.max_gap <= 1e-12);

    auto e1 = s->points_with_label("E1");
    auto cert = certify_set(gg, e1, 2, 0.6);
    REQUIRE(cert.pass());
    auto flat = localization_check(constant_function(s, 2.0), e1, 2, 0.6, radii, cert);
    for (double v : flat.rhs) CHECK(v == 0.0);

    SetCertificate bad;
    bad.level_ok = false;
    CHECK_THROWS_AS(localization_check(u, e1, 2, 0.6, radii, bad), PreconditionError);
  }

  TEST_CASE("irreducibility verdicts") {
    auto gg = make_family("gluedgaskets", 2, {5, 6, 7});
    DetectOptions opt;
    opt.search_limit = 500;
    auto red = irreducibility_verdict(gg, 2, 0.6, {}, opt);
    CHECK(red.verdict == Irreducibility::reducible);
    CHECK(red.k >= 2);
    CHECK(std::string(to_string(red.verdict)) == "reducible");

    auto gc = make_family("gluedcubes", 2, {1, 2, 3});
    auto only_const = irreducibility_verdict(gc, 1.5, 2.0);
    CHECK(only_const.verdict == Irreducibility::indeterminate);
    CHECK(only_const.k == 1);
    CHECK(only_const.witness.empty());

    auto gasket = make_family("gasket", 2, {5, 6, 7});
    auto irr = irreducibility_verdict(gasket, 2, 1.0);
    CHECK(irr.verdict == Irreducibility::irreducible);
    CHECK_FALSE(irr.witness.empty());
  }
}
