#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>

#include "besovlab/config.hpp"
#include "besovlab/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "besovlab_cli_test";

int run(const std::string& args) {
  std::string cmd = std::string("\"") + BESOVLAB_CLI_PATH + "\" " + args + " >>\"" + (kRoot / "log.txt").string() +
                    "\" 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const besovlab::json& j) {
  auto path = kRoot / (name + ".json");
  besovlab::write_json(path.string(), j);
  return path;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = besovlab::read_text(e.path().string());
  return files;
}

besovlab::json small_config(const fs::path& out) {
  auto j = besovlab::json::parse(R"({
    "space": {"family": "gluedcubes", "n": 2, "levels": [1, 2, 3]},
    "p": 2,
    "theta_grid": [0.8, 1.2],
    "functions": [{"kind": "indicator", "label": "E1"}, {"kind": "coordinate", "axis": 0}],
    "targets": [{"kind": "ball", "center": [-0.5, -0.5], "radius": 0.3}],
    "kappa_grid": [0.01, 0.1],
    "seed": 11
  })");
  j["output"] = out.string();
  return j;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("full pipeline is byte-identical on rerun") {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    auto out_a = kRoot / "a", out_b = kRoot / "b";
    auto cfg_a = write_config("a", small_config(out_a));
    auto cfg_b = write_config("b", small_config(out_b));
    for (const auto& cfg : {cfg_a, cfg_b})
      for (const char* cmd : {"gen", "profile", "exponents", "decompose", "report"}) {
        INFO(cmd);
        CHECK(run(std::string(cmd) + " --config \"" + cfg.string() + "\" --jobs 1") == 0);
      }
    auto a = snapshot(out_a), b = snapshot(out_b);
    CHECK(a.size() == b.size());
    for (const auto& [name, text] : a) {
      INFO(name);
      REQUIRE(b.count(name) == 1);
      CHECK(text == b[name]);
    }
    for (const char* f : {"spaces/index.json", "exponents/exponents.json", "decompose/decomposition.json",
                          "profiles/summary.csv", "report.json", "report.md"})
      CHECK(a.count(f) == 1);

    // Every artifact carries the config hash.
    auto h = besovlab::ExperimentConfig::from_json(small_config(out_a)).hash();
    for (const auto& [name, text] : a) {
      INFO(name);
      CHECK(text.find(h) != std::string::npos);
    }

    // A worker-count change leaves the outputs untouched.
    auto out_c = kRoot / "c";
    auto cfg_c = write_config("c", small_config(out_c));
    CHECK(run("gen --config \"" + cfg_c.string() + "\" --jobs 3") == 0);
    CHECK(run("profile --config \"" + cfg_c.string() + "\" --jobs 3") == 0);
    auto c = snapshot(out_c);
    for (const auto& [name, text] : c) {
      INFO(name);
      CHECK(text == a[name]);
    }
  }

  TEST_CASE("command-line flags override the config") {
    fs::create_directories(kRoot);
    auto cfg = write_config("flags", small_config(kRoot / "ignored"));
    auto out = kRoot / "flags_out";
    CHECK(run("gen --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --seed 99") == 0);
    CHECK_FALSE(fs::exists(kRoot / "ignored"));
    auto index = besovlab::read_json((out / "spaces/index.json").string());
    CHECK(index["seed"] == 99);
    auto j = small_config(out);
    j["seed"] = 99;
    CHECK(index["config_hash"] == besovlab::ExperimentConfig::from_json(j).hash());
  }

  TEST_CASE("exit codes") {
    fs::create_directories(kRoot);
    CHECK(run("--help") == 0);
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("gen --jobs notanumber") == 1);

    auto bad = write_config("bad", besovlab::json::parse(R"({"thetas": [1]})"));
    CHECK(run("gen --config \"" + bad.string() + "\"") == 1);
    CHECK(run("gen --config \"" + (kRoot / "absent.json").string() + "\"") == 2);

    auto empty_out = kRoot / "empty";
    auto cfg = write_config("missing", small_config(empty_out));
    CHECK(run("profile --config \"" + cfg.string() + "\"") == 2);
    CHECK(run("decompose --config \"" + cfg.string() + "\"") == 2);
    CHECK(run("report --config \"" + cfg.string() + "\"") == 2);

    // Two levels cannot support a growth slope over three.
    auto two = small_config(kRoot / "two");
    two["space"]["levels"] = {1, 2};
    two["run"] = {{"rho", false}, {"theta_star", false}};
    auto cfg_two = write_config("two", two);
    CHECK(run("gen --config \"" + cfg_two.string() + "\"") == 0);
    CHECK(run("exponents --config \"" + cfg_two.string() + "\"") == 4);

    // One capacity iteration cannot converge.
    auto stiff = small_config(kRoot / "stiff");
    stiff["capacity"] = {{"max_iter", 1}};
    stiff["run"] = {{"theta_p", false}, {"theta_star", false}};
    auto cfg_stiff = write_config("stiff", stiff);
    CHECK(run("exponents --config \"" + cfg_stiff.string() + "\"") == 3);
  }
}
