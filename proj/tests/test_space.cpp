#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <random>

#include "besovlab/ball_index.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/space.hpp"
#include "support/oracles.hpp"

using namespace besovlab;

namespace {

double sum_weights(const Space& s) {
  double t = 0;
  for (double w : s.weights()) t += w;
  return t;
}

double brute_diameter(const Space& s) {
  double d = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) d = std::max(d, oracle::dist(s, i, j));
  return d;
}

}  // namespace

TEST_SUITE("space") {
  TEST_CASE("cube grid construction") {
    Space c0 = make_cube_grid(1, 0);
    REQUIRE(c0.size() == 1);
    CHECK(c0.point(0)[0] == doctest::Approx(0.5));
    CHECK(c0.weight(0) == doctest::Approx(1.0));

    Space c = make_cube_grid(2, 1, 3);
    REQUIRE(c.size() == 9);
    for (double w : c.weights()) CHECK(w == doctest::Approx(1.0 / 9));
    CHECK(c.total_mass() == doctest::Approx(1.0));
    CHECK(c.metric_kind() == MetricKind::euclidean);
    for (std::size_t i = 0; i < c.size(); ++i) {
      double x = c.point(i)[0] * 3 - 0.5, y = c.point(i)[1] * 3 - 0.5;
      CHECK(std::abs(x - std::round(x)) < 1e-12);
      CHECK(std::abs(y - std::round(y)) < 1e-12);
    }
    Space c5 = make_cube_grid(2, 2, 5);
    CHECK(c5.size() == 625);
    CHECK(c5.total_mass() == doctest::Approx(1.0));
  }

  TEST_CASE("gasket and carpet construction") {
    Space g0 = make_sierpinski_gasket(2, 0);
    REQUIRE(g0.size() == 1);
    CHECK(g0.weight(0) == doctest::Approx(1.0));
    Space g1 = make_sierpinski_gasket(2, 1);
    REQUIRE(g1.size() == 3);
    for (double w : g1.weights()) CHECK(w == doctest::Approx(1.0 / 3));
    CHECK(make_sierpinski_gasket(3, 2).size() == 16);
    CHECK(make_sierpinski_gasket(2, 6).size() == 729);

    Space k0 = make_sierpinski_carpet(0);
    REQUIRE(k0.size() == 1);
    CHECK(k0.weight(0) == doctest::Approx(1.0));
    Space k1 = make_sierpinski_carpet(1);
    REQUIRE(k1.size() == 8);
    for (double w : k1.weights()) CHECK(w == doctest::Approx(1.0 / 8));
    // The centre cell is removed.
    for (std::size_t i = 0; i < k1.size(); ++i)
      CHECK(std::hypot(k1.point(i)[0] - 0.5, k1.point(i)[1] - 0.5) > 0.2);
  }

  TEST_CASE("space invariants: mass, diameter, explicit metrics") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k) {
      auto s = oracle::random_space(rng, 30, k % 2 == 0);
      CHECK(s->total_mass() == doctest::Approx(sum_weights(*s)).epsilon(1e-14));
      CHECK(std::abs(s->diameter() - brute_diameter(*s)) <= 1e-12);
    }
    Space g = make_sierpinski_gasket(2, 3);
    CHECK(std::abs(g.diameter() - brute_diameter(g)) <= 1e-12);

    CHECK_THROWS_AS(Space::from_matrix({0, 1, 2, 0}, {1, 1}), ArgumentError);          // asymmetric
    CHECK_THROWS_AS(Space::from_matrix({0, 1, 1, 1, 0, 5, 1, 5, 0}, {1, 1, 1}), ArgumentError);  // triangle
    CHECK_THROWS_AS(Space::from_matrix({1, 1, 1, 0}, {1, 1}), ArgumentError);          // diagonal
    CHECK_THROWS_AS(Space(1, {0.0, 1.0}, {1.0, 0.0}), ArgumentError);                  // weight
    CHECK_THROWS_AS(Space(1, {0.0, 1.0}, {1.0, -1.0}), ArgumentError);
  }

  TEST_CASE("budget errors name the offending size") {
    setenv("BESOVLAB_BUDGET", "1000", 1);
    try {
      make_cube_grid(2, 4);
      FAIL("expected a resource error");
    } catch (const ResourceError& e) {
      CHECK(e.requested() == 6561);
      CHECK(e.budget() == 1000);
      CHECK(std::string(e.what()).find("6561") != std::string::npos);
    }
    CHECK_THROWS_AS(make_sierpinski_gasket(2, 7), ResourceError);
    CHECK_THROWS_AS(make_sierpinski_carpet(4), ResourceError);
    CHECK_NOTHROW(make_sierpinski_carpet(3));
    unsetenv("BESOVLAB_BUDGET");
    CHECK_NOTHROW(make_cube_grid(2, 4));
  }

  TEST_CASE("gluing") {
    Space c = make_cube_grid(2, 2);
    Space g = glue_at_point(c, 0, c, 0, false);
    REQUIRE(g.size() == 162);
    CHECK(g.points_with_label("E1").size() == 81);
    CHECK(g.points_with_label("E2").size() == 81);
    CHECK(g.total_mass() == doctest::Approx(2.0));
    REQUIRE(g.glue().has_value());
    // Bow-tie: [-1,0]^2 and [0,1]^2 meeting at the origin.
    for (std::size_t i : g.points_with_label("E1")) CHECK((g.point(i)[0] < 0 && g.point(i)[1] < 0));
    for (std::size_t i : g.points_with_label("E2")) CHECK((g.point(i)[0] > 0 && g.point(i)[1] > 0));

    Space gn = glue_at_point(c, 0, c, 0, true);
    CHECK(gn.total_mass() == doctest::Approx(1.0));

    // Isometry of each labelled component.
    auto e1 = g.points_with_label("E1");
    auto e2 = g.points_with_label("E2");
    for (std::size_t i = 0; i < 81; i += 7)
      for (std::size_t j = 0; j < 81; j += 5) {
        CHECK(std::abs(g.distance(e1[i], e1[j]) - c.distance(i, j)) <= 1e-12);
        CHECK(std::abs(g.distance(e2[i], e2[j]) - c.distance(i, j)) <= 1e-12);
      }

    // Mass additivity with different spaces.
    Space k = make_sierpinski_carpet(2);
    Space ck = glue_at_point(c, 0, k, 0, false);
    CHECK(ck.total_mass() == doctest::Approx(c.total_mass() + k.total_mass()));

    // Gluing the cube to itself at its centre cell overlaps everywhere.
    Space c1 = make_cube_grid(2, 1);
    CHECK_THROWS_AS(glue_at_point(c1, 4, c1, 4, false), GeometryError);
    CHECK_THROWS_AS(glue_at_point(c1, 9, c1, 0, false), ArgumentError);
  }

  TEST_CASE("open-ball queries match a brute-force scan") {
    std::mt19937_64 rng(7);
    // Small space (scan) and a large one (kd-tree).
    for (std::size_t n : {150u, 3000u}) {
      std::uniform_real_distribution<double> u(0, 1);
      std::vector<double> c(2 * n), w(n);
      for (auto& x : c) x = std::round(u(rng) * 40) / 40;  // many exact ties
      for (auto& x : w) x = 0.5 + u(rng);
      // Deduplicate coordinates by nudging repeated points.
      for (std::size_t i = 0; i < n; ++i) c[2 * i] += 1e-3 * static_cast<double>(i % 7);
      Space s(2, c, w);
      CHECK(s.index().brute() == (n < BallIndex::kBruteLimit));
      for (int q = 0; q < 200; ++q) {
        std::size_t x = rng() % n;
        double r = q % 3 == 0 ? s.distance(x, rng() % n) : u(rng) * 0.5;  // radius hitting a point exactly
        if (!(r > 0)) r = 0.01;
        auto got = s.index().ball(x, r);
        std::sort(got.begin(), got.end());
        auto want = oracle::ball(s, x, r);
        CHECK(got == want);
        CHECK(std::abs(ball_volume(s, x, r) - oracle::volume(s, x, r)) <= 1e-12 * s.total_mass());
        CHECK(std::find(got.begin(), got.end(), x) != got.end());
      }
    }
  }

  TEST_CASE("ball_volume examples and errors") {
    Space c = make_cube_grid(2, 1);
    CHECK(ball_volume(c, 4, 0.1) == doctest::Approx(1.0 / 9));
    CHECK(ball_volume(c, 4, 2.0) == doctest::Approx(1.0));
    // Open balls: neighbours at exactly the radius are excluded.
    const double h = std::min({c.distance(4, 1), c.distance(4, 3), c.distance(4, 5), c.distance(4, 7)});
    CHECK(ball_volume(c, 4, h) == doctest::Approx(1.0 / 9));
    CHECK(ball_volume(c, 4, h + 1e-9) == doctest::Approx(5.0 / 9));
    Space c3 = make_cube_grid(2, 3);
    std::size_t interior = 13 * 27 + 13;
    CHECK(ball_volume(c3, interior, 0.2) == doctest::Approx(oracle::volume(c3, interior, 0.2)).epsilon(1e-14));
    CHECK_THROWS_AS(ball_volume(c, 0, 0.0), ArgumentError);
    CHECK_THROWS_AS(ball_volume(c, 0, -1.0), ArgumentError);
  }

  TEST_CASE("doubling reports") {
    DoublingOptions o;
    o.r_max = 0.25;
    o.radius_decades = std::log10(0.25 * 27);
    auto rc = doubling_report(make_cube_grid(2, 3), o);
    CHECK(rc.ahlfors_dimension == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rc.doubling_constant >= 1.0);

    auto rl = doubling_report(make_cube_grid(1, 6), 64, 2.0);
    CHECK(rl.doubling_constant <= 4.0);
    CHECK(rl.ahlfors_dimension == doctest::Approx(1.0).epsilon(0.1));

    const double dg = std::log(3.0) / std::log(2.0);
    CHECK(std::abs(doubling_report(make_sierpinski_gasket(2, 6), 64, 1.5).ahlfors_dimension - dg) <= 0.1);
    CHECK(std::abs(doubling_report(make_family_space("gluedgaskets", 2, 4), 64, 1.0).ahlfors_dimension - dg) <= 0.1);
    CHECK(std::abs(doubling_report(make_sierpinski_carpet(5), 64, 1.5).ahlfors_dimension - std::log(8.0) / std::log(3.0)) <=
          0.1);

    // Radii beyond the diameter: every ratio is 1.
    DoublingOptions big;
    big.r_max = 10;
    big.radius_decades = 0.5;
    CHECK(doubling_report(make_cube_grid(2, 1), big).doubling_constant == doctest::Approx(1.0));

    // Fixed seed: identical reports.
    auto a = doubling_report(make_sierpinski_carpet(3), 32, 1.0);
    auto b = doubling_report(make_sierpinski_carpet(3), 32, 1.0);
    CHECK(a.doubling_constant == b.doubling_constant);
    CHECK(a.ahlfors_dimension == b.ahlfors_dimension);
    CHECK(a.seed == 20240611u);
  }

  TEST_CASE("doubling constant does not grow with the level") {
    for (auto [tag, m0] : {std::pair{"cube", 3}, std::pair{"gasket", 4}, std::pair{"carpet", 3}}) {
      std::vector<double> cd;
      for (int m : {m0, m0 + 1, m0 + 2}) cd.push_back(doubling_report(make_family_space(tag, 2, m), 64, 1.0).doubling_constant);
      INFO(tag, " ", cd[0], " ", cd[1], " ", cd[2]);
      CHECK(cd[1] <= 1.05 * cd[0]);
      CHECK(cd[2] <= 1.05 * cd[1]);
    }
  }
}
