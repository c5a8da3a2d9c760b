#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "besovlab/config.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/io.hpp"

using namespace besovlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("besovlab_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles round-trip through 17 significant digits") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int i = 0; i < 2000; ++i) {
      double v = std::ldexp(u(rng), ex(rng));
      CHECK(parse_double(format_double(v)) == v);
    }
    for (double v : {0.0, 1.0, -1.0 / 3, std::numeric_limits<double>::min(), std::numeric_limits<double>::max(),
                     std::numeric_limits<double>::denorm_min()})
      CHECK(parse_double(format_double(v)) == v);
    CHECK(std::isinf(parse_double(format_double(std::numeric_limits<double>::infinity()))));
    CHECK_THROWS_AS(parse_double("1.5x"), ArgumentError);
    CHECK_THROWS_AS(parse_double(""), ArgumentError);
  }

  TEST_CASE("space, function, profile and graph artifacts round-trip") {
    auto dir = scratch_dir("roundtrip");
    auto g = make_family_space("gluedcubes", 2, 2);
    auto stem = (dir / "space").string();
    write_space(stem, g, {{"family", "gluedcubes"}}, {}, "provenance line");
    auto back = read_space(stem);
    REQUIRE(back.size() == g.size());
    CHECK(back.dim() == g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t k = 0; k < g.dim(); ++k) CHECK(back.point(i)[k] == g.point(i)[k]);
      CHECK(back.weight(i) == g.weight(i));
    }
    CHECK(back.points_with_label("E1") == g.points_with_label("E1"));
    CHECK(back.points_with_label("E2") == g.points_with_label("E2"));
    CHECK(read_text(stem + ".csv").rfind("# provenance line", 0) == 0);

    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(double(i)) / 7;
    auto fpath = (dir / "f.csv").string();
    write_function(fpath, f, "comment");
    CHECK(read_function(fpath, f.size()) == f);
    CHECK_THROWS_AS(read_function(fpath, f.size() + 1), ArgumentError);

    EnergyProfile prof;
    prof.p = 1.5;
    prof.theta = 0.7;
    prof.radii = {0.5, 0.25, 0.125};
    prof.values = {1.0 / 3, 2.0 / 7, 5.0 / 11};
    auto pstem = (dir / "profile").string();
    write_profile(pstem, prof);
    auto pb = read_profile(pstem);
    CHECK(pb.radii == prof.radii);
    CHECK(pb.values == prof.values);

    auto gr = make_gasket_graph(2, 2);
    auto gstem = (dir / "graph").string();
    write_graph(gstem, gr);
    auto grb = read_graph(gstem);
    CHECK(grb.edges == gr.edges);
    CHECK(grb.boundary_a == gr.boundary_a);
    CHECK(grb.boundary_b == gr.boundary_b);

    CHECK_THROWS_AS(read_space((dir / "absent").string()), MissingArtifactError);
    write_text((dir / "bad.csv").string(), "x0,x1,weight,label\n0,0,1\n");
    CHECK_THROWS_AS(read_space((dir / "bad").string()), Error);
    fs::remove_all(dir);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults, round trip and hash") {
    auto c = ExperimentConfig::from_json(nlohmann::json::object());
    auto full = c.to_json();
    auto again = ExperimentConfig::from_json(full);
    CHECK(again.to_json() == full);
    CHECK(again.hash() == c.hash());
    CHECK(c.hash().size() == 16);

    // The hash ignores output, jobs and oracle, and sees everything else.
    auto j = full;
    j["output"] = "elsewhere";
    j["jobs"] = 3;
    j["oracle"] = true;
    CHECK(ExperimentConfig::from_json(j).hash() == c.hash());
    j["p"] = 1.75;
    CHECK(ExperimentConfig::from_json(j).hash() != c.hash());

    // Key order in the input does not matter.
    auto a = ExperimentConfig::from_json(nlohmann::json::parse(R"({"p": 3, "seed": 5})"));
    auto b = ExperimentConfig::from_json(nlohmann::json::parse(R"({"seed": 5, "p": 3})"));
    CHECK(a.hash() == b.hash());

    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  }

  TEST_CASE("parsing and validation errors") {
    using nlohmann::json;
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"thetas": [1]})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"theta": 1, "theta_grid": [1]})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"p": 1})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"p": "two"})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"theta_grid": [1, 0.5]})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"space": {"levels": [3, 2]}})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"space": {"family": "sponge"}})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"kappa_grid": [0.1, 0.01]})")), ArgumentError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(
                        json::parse(R"({"functions": [{"kind": "constant"}, {"kind": "constant"}]})")),
                    ArgumentError);

    auto c = ExperimentConfig::from_json(json::parse(R"({"theta": 0.8, "space": {"levels": [1, 2]}})"));
    CHECK(c.theta_grid == std::vector<double>{0.8});
    CHECK(c.to_json()["star_levels"] == json({1, 2}));
    CHECK(base_family("gluedcubes") == "cube");
    CHECK(base_family("gluedcarpets") == "carpet");
  }

  TEST_CASE("function specs build generators") {
    using nlohmann::json;
    auto s = std::make_shared<const Space>(make_family_space("gluedcubes", 2, 1));
    FunctionSpec ind{json::parse(R"({"kind": "indicator", "label": "E1"})")};
    auto f = ind.generator(2).make(s);
    for (auto i : s->points_with_label("E1")) CHECK(f.values()[i] == 1.0);
    for (auto i : s->points_with_label("E2")) CHECK(f.values()[i] == 0.0);
    FunctionSpec named{json::parse(R"({"kind": "constant", "value": 2, "name": "two"})")};
    CHECK(named.name() == "two");
    CHECK(named.generator(2).name == "two");
    FunctionSpec bad{json::parse(R"({"kind": "wavelet"})")};
    CHECK_THROWS_AS(bad.generator(2), ArgumentError);
  }
}
