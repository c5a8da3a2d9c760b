#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "besovlab/capacity.hpp"
#include "besovlab/config.hpp"
#include "besovlab/decompose.hpp"
#include "besovlab/energy.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/exponents.hpp"
#include "besovlab/graphs.hpp"
#include "besovlab/io.hpp"
#include "besovlab/numeric.hpp"
#include "besovlab/oracle.hpp"
#include "besovlab/space.hpp"

namespace fs = std::filesystem;
using namespace besovlab;

namespace {

constexpr std::size_t kOracleLimit = 500;

struct Run {
  ExperimentConfig cfg;
  std::string hash;

  std::string dir(const std::string& sub) const { return (fs::path(cfg.output) / sub).string(); }

  json provenance() const {
    return {{"config_hash", hash},
            {"seed", cfg.seed},
            {"thresholds", cfg.to_json()["thresholds"]},
            {"p", cfg.p}};
  }
  std::string comment() const {
    const auto& t = cfg.thresholds;
    return "config_hash=" + hash + " seed=" + std::to_string(cfg.seed) + " slope=" + format_double(t.slope) +
           " density=" + format_double(t.density) + " mass_tol=" + format_double(t.mass_tol);
  }
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string theta_tag(double theta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", theta);
  return buf;
}

std::vector<int> merged_levels(const ExperimentConfig& c) {
  std::set<int> s(c.levels.begin(), c.levels.end());
  s.insert(c.star_levels.begin(), c.star_levels.end());
  return {s.begin(), s.end()};
}

SpaceFamily load_family(const Run& run, const std::vector<int>& levels) {
  SpaceFamily f;
  f.tag = run.cfg.family;
  f.n = run.cfg.n;
  f.levels = levels;
  for (int m : levels) {
    std::string stem = run.dir("spaces") + "/" + space_stem(run.cfg.family, run.cfg.n, m);
    if (!fs::exists(stem + ".csv") || !fs::exists(stem + ".json"))
      throw MissingArtifactError("missing space artifact " + stem + ".csv (run gen first)");
    check_budget("space", read_json(stem + ".json").value("points", std::size_t{0}));
    f.spaces.push_back(std::make_shared<const Space>(read_space(stem)));
  }
  return f;
}

std::vector<FunctionGenerator> generators(const std::vector<FunctionSpec>& specs, double p) {
  std::vector<FunctionGenerator> out;
  for (const auto& s : specs) out.push_back(s.generator(p));
  return out;
}

int cmd_gen(const Run& run) {
  const auto& c = run.cfg;
  json index = run.provenance();
  index["files"] = json::array();
  for (int m : merged_levels(c)) {
    Space s = make_family_space(c.family, c.n, m);
    DoublingOptions dopt;
    dopt.seed = c.seed;
    json meta = run.provenance();
    try {
      auto rep = doubling_report(s, dopt);
      meta["doubling"] = {{"doubling_constant", rep.doubling_constant},
                          {"ahlfors_dimension", rep.ahlfors_dimension},
                          {"fit_residual", rep.fit_residual},
                          {"r_min", rep.r_min},
                          {"r_max", rep.r_max},
                          {"samples", rep.samples},
                          {"seed", rep.seed}};
    } catch (const Error& e) {
      meta["doubling"] = {{"error", e.what()}};
    }
    std::string stem = run.dir("spaces") + "/" + space_stem(c.family, c.n, m);
    write_space(stem, s, meta, {}, run.comment());
    index["files"].push_back({{"level", m}, {"stem", space_stem(c.family, c.n, m)}, {"points", s.size()},
                              {"total_mass", s.total_mass()}});
    std::cout << stem << ".csv  points=" << s.size() << " mass=" << format_double(s.total_mass()) << "\n";
  }
  write_json(run.dir("spaces") + "/index.json", index);
  return 0;
}

int cmd_profile(const Run& run) {
  const auto& c = run.cfg;
  if (c.functions.empty()) throw ArgumentError("profile needs at least one function in the config");
  auto fam = load_family(run, c.levels);
  MultiscaleOptions mo;
  mo.with_dyadic = c.radii.dyadic;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t l = 0; l < fam.spaces.size(); ++l) {
    const auto& sp = fam.spaces[l];
    auto radii = c.radii.resolve(*sp);
    for (const auto& spec : c.functions) {
      auto u = spec.generator(c.p).make(sp);
      auto profiles = multiscale_energies(u, c.p, c.theta_grid, radii, mo);
      std::vector<double> oracle_diff;
      if (c.oracle && sp->size() <= kOracleLimit) {
        for (const auto& pr : profiles) {
          double d = max_relative_difference(pr.values, brute_multiscale(u, c.p, pr.theta, pr.radii));
          if (pr.besov_pp) d = std::max(d, max_relative_difference({*pr.besov_pp}, {brute_besov_pp(u, c.p, pr.theta)}));
          oracle_diff.push_back(d);
        }
      }
      for (std::size_t t = 0; t < profiles.size(); ++t) {
        const auto& pr = profiles[t];
        json meta = run.provenance();
        meta["function"] = spec.name();
        meta["level"] = fam.levels[l];
        KsTail tail;
        std::string cls = "unresolved";
        try {
          tail = ks_energy_tail(pr, c.thresholds.tail_fraction);
          meta["ks_tail"] = to_json(tail);
          cls = to_string(tail.classification);
        } catch (const ResolutionError& e) {
          meta["ks_tail"] = {{"error", e.what()}};
        }
        if (!oracle_diff.empty()) meta["oracle"] = {{"max_relative_difference", oracle_diff[t]}};
        else if (c.oracle) meta["oracle"] = {{"skipped", "more than " + std::to_string(kOracleLimit) + " points"}};
        std::string stem = run.dir("profiles") + "/" + spec.name() + "_theta" + theta_tag(pr.theta) + "_m" +
                           std::to_string(fam.levels[l]);
        write_profile(stem, pr, meta, run.comment());
        rows.push_back({spec.name(), std::to_string(fam.levels[l]), format_double(pr.theta),
                        format_double(tail.fit.alpha), format_double(tail.fit.r_squared), cls,
                        pr.besov_pp ? format_double(*pr.besov_pp) : "", format_double(pr.dyadic_sum),
                        oracle_diff.empty() ? "" : format_double(oracle_diff[t])});
      }
    }
  }
  write_csv(run.dir("profiles") + "/summary.csv",
            {"function", "level", "theta", "slope", "r_squared", "classification", "besov_pp", "dyadic_sum",
             "oracle_diff"},
            rows, run.comment());
  std::cout << rows.size() << " profiles written to " << run.dir("profiles") << "\n";
  return 0;
}

json evidence_json(const ThetaEstimate& e) {
  json j = {{"value", e.value ? json(*e.value) : json(nullptr)},
            {"threshold", e.threshold},
            {"slope_threshold", e.slope_threshold},
            {"theta_grid", e.theta_grid}};
  json st = json::array();
  for (double v : e.statistic) st.push_back(num(v));
  j["statistic"] = st;
  return j;
}

void write_evidence(const Run& run, const std::string& path, const ThetaEstimate& e) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& ev : e.evidence) {
    std::string energies;
    for (std::size_t i = 0; i < ev.energies.size(); ++i) energies += (i ? ";" : "") + format_double(ev.energies[i]);
    rows.push_back({format_double(ev.theta), ev.function, format_double(ev.kappa), format_double(ev.error),
                    format_double(ev.growth.slope), format_double(ev.growth.plain_slope), energies,
                    ev.pass ? "1" : "0"});
  }
  write_csv(path, {"theta", "function", "kappa", "error", "slope", "plain_slope", "energies", "pass"}, rows,
            run.comment());
}

int cmd_exponents(const Run& run) {
  const auto& c = run.cfg;
  json report = run.provenance();
  report["family"] = c.family;
  report["n"] = c.n;
  if (c.run_rho) {
    auto levels = c.capacity_levels.empty() ? c.levels : c.capacity_levels;
    const std::string gf = base_family(c.family);
    auto graphs = build_graph_family(gf, c.n, levels);
    for (const auto& g : graphs)
      write_graph(run.dir("graphs") + "/graph_" + gf + "_n" + std::to_string(c.n) + "_m" + std::to_string(g.level),
                  g, run.provenance(), run.comment());
    CapacityOptions co;
    co.tol = c.capacity_tol;
    co.max_iter = c.capacity_max_iter;
    auto caps = p_capacities(graphs, c.p, co);
    auto rho = rho_p_estimate(caps, gf, c.n);
    json caps_json = json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : caps) {
      caps_json.push_back({{"level", r.level}, {"capacity", r.capacity}, {"iterations", r.iterations},
                           {"gradient_norm", r.gradient_norm}});
      rows.push_back({std::to_string(r.level), format_double(r.capacity), std::to_string(r.iterations),
                      format_double(r.gradient_norm)});
    }
    write_csv(run.dir("exponents") + "/capacities.csv", {"level", "capacity", "iterations", "gradient_norm"}, rows,
              run.comment());
    report["rho"] = {{"graph_family", gf},      {"levels", rho.levels},
                     {"ratios", rho.ratios},    {"rho_p", rho.rho_p},
                     {"extrapolated", rho.extrapolated}, {"quality_warning", rho.quality_warning},
                     {"walk_dimension", rho.walk_dimension}, {"capacities", caps_json}};
    std::cout << "rho_p=" << format_double(rho.rho_p) << " d_w=" << format_double(rho.walk_dimension) << "\n";
  }
  ThetaOptions to;
  to.slope_threshold = c.thresholds.slope;
  to.density_threshold = c.thresholds.density;
  to.jobs = c.jobs;
  if (c.run_theta_p) {
    if (c.functions.empty()) throw ArgumentError("theta_p needs candidate functions");
    auto fam = load_family(run, c.levels);
    auto est = theta_p_estimate(fam, c.p, generators(c.functions, c.p), c.theta_grid, to);
    report["theta_p"] = evidence_json(est);
    write_evidence(run, run.dir("exponents") + "/theta_p_evidence.csv", est);
    std::cout << "theta_p=" << (est.value ? format_double(*est.value) : "none") << "\n";
  }
  if (c.run_theta_star) {
    if (c.targets.empty()) throw ArgumentError("theta_p* needs target functions");
    auto fam = load_family(run, c.star_levels.empty() ? c.levels : c.star_levels);
    auto est = theta_p_star_estimate(fam, c.p, generators(c.targets, c.p), c.theta_grid, c.kappa_grid, to);
    report["theta_star"] = evidence_json(est);
    report["theta_star"]["kappa_grid"] = c.kappa_grid;
    write_evidence(run, run.dir("exponents") + "/theta_star_evidence.csv", est);
    std::cout << "theta_p*=" << (est.value ? format_double(*est.value) : "none") << "\n";
  }
  write_json(run.dir("exponents") + "/exponents.json", report);
  return 0;
}

json certificate_json(const SetCertificate& c) {
  return {{"energies", c.energies},
          {"level_slope", num(c.growth.slope)},
          {"plain_slope", num(c.growth.plain_slope)},
          {"zero_energy", c.growth.zero_energy},
          {"ks_tail_slope", num(c.ks_tail_slope)},
          {"ks_class", to_string(c.ks_class)},
          {"level_ok", c.level_ok},
          {"ks_ok", c.ks_ok}};
}

int cmd_decompose(const Run& run) {
  const auto& c = run.cfg;
  auto fam = load_family(run, c.levels);
  const Space& fine = fam.finest();
  DetectOptions dopt;
  dopt.mass_tol = c.thresholds.mass_tol;
  dopt.certificate.slope_threshold = c.thresholds.slope;
  dopt.certificate.tail_fraction = c.thresholds.tail_fraction;
  json all = run.provenance();
  all["results"] = json::array();
  for (double theta : c.theta_grid) {
    auto v = irreducibility_verdict(fam, c.p, theta, generators(c.functions, c.p), dopt);
    const auto& d = v.decomposition;
    json j = run.provenance();
    j["theta"] = theta;
    j["family"] = c.family;
    j["levels"] = fam.levels;
    j["search_level"] = d.search_level;
    j["k"] = d.k;
    j["verdict"] = to_string(v.verdict);
    j["witness"] = v.witness.empty() ? json(nullptr) : json(v.witness);
    j["masses"] = d.masses;
    j["residual_mass"] = d.residual_mass;
    j["finite_mass"] = d.finite_mass;
    json comps = json::array();
    for (std::size_t k = 0; k < d.k; ++k) {
      json cj = {{"mass", d.masses[k]}, {"points", d.components[k].size()},
                 {"certificate", certificate_json(d.certificates[k])}};
      if (!fine.label_names().empty()) {
        json by = json::object();
        for (std::size_t i : d.components[k]) {
          const auto& name = fine.label_names()[fine.labels()[i]];
          by[name] = by.value(name, 0.0) + fine.weight(i);
        }
        cj["mass_by_label"] = by;
      }
      comps.push_back(cj);
    }
    j["components"] = comps;
    json wit = json::array();
    for (const auto& ev : v.evidence)
      wit.push_back({{"function", ev.function}, {"energies", ev.energies}, {"slope", num(ev.growth.slope)},
                     {"pass", ev.pass}});
    j["witness_evidence"] = wit;
    const std::string tag = "decomposition_theta" + theta_tag(theta);
    write_json(run.dir("decompose") + "/" + tag + ".json", j);
    write_space(run.dir("decompose") + "/" + space_stem(c.family, c.n, fam.levels.back()) + "_theta" +
                    theta_tag(theta),
                fine, run.provenance(), {{"component", d.labels(fine.size())}}, run.comment());
    all["results"].push_back({{"theta", theta}, {"k", d.k}, {"verdict", to_string(v.verdict)}});
    std::cout << "theta=" << format_double(theta) << " k=" << d.k << " verdict=" << to_string(v.verdict) << "\n";
  }
  write_json(run.dir("decompose") + "/decomposition.json", all);
  return 0;
}

int cmd_report(const Run& run) {
  json rep = run.provenance();
  bool any = false;
  auto take = [&](const std::string& key, const std::string& path) {
    if (!fs::exists(path)) return;
    rep[key] = read_json(path);
    any = true;
  };
  take("spaces", run.dir("spaces") + "/index.json");
  take("exponents", run.dir("exponents") + "/exponents.json");
  take("decompose", run.dir("decompose") + "/decomposition.json");
  if (fs::exists(run.dir("profiles") + "/summary.csv")) {
    rep["profiles"] = {{"summary", "profiles/summary.csv"}};
    any = true;
  }
  if (!any) throw MissingArtifactError("no artifacts under " + run.cfg.output + " (run gen/profile/exponents/decompose)");
  for (const char* key : {"exponents", "decompose"})
    if (rep.contains(key) && rep[key].value("config_hash", "") != run.hash)
      rep["warnings"].push_back(std::string(key) + " was produced with a different config hash");

  std::string md = "# besovlab report\n\nconfig_hash " + run.hash + ", seed " + std::to_string(run.cfg.seed) + "\n";
  if (rep.contains("exponents")) {
    const auto& e = rep["exponents"];
    md += "\n## exponents\n\n";
    if (e.contains("rho"))
      md += "- rho_p " + e["rho"]["rho_p"].dump() + ", walk dimension " + e["rho"]["walk_dimension"].dump() + "\n";
    if (e.contains("theta_p")) md += "- theta_p " + e["theta_p"]["value"].dump() + "\n";
    if (e.contains("theta_star")) md += "- theta_p* " + e["theta_star"]["value"].dump() + "\n";
  }
  if (rep.contains("decompose")) {
    md += "\n## decomposition\n\n";
    for (const auto& r : rep["decompose"]["results"])
      md += "- theta " + r["theta"].dump() + ": k = " + r["k"].dump() + ", " + r["verdict"].get<std::string>() + "\n";
  }
  write_json(run.dir("report.json"), rep);
  write_text((fs::path(run.cfg.output) / "report.md").string(), md);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Besov and Korevaar-Schoen energies on fractal approximations"};
  app.require_subcommand(1);
  std::string config_path;
  int jobs = -1;
  std::string out_dir;
  bool oracle = false;
  std::uint64_t seed = 0;
  auto* opt_cfg = app.add_option("--config", config_path, "experiment config (JSON)");
  auto* opt_jobs = app.add_option("--jobs", jobs, "worker threads (0: hardware)");
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  app.add_flag("--oracle", oracle, "brute-force cross-check on small spaces");
  auto* opt_seed = app.add_option("--seed", seed, "seed recorded in every output");
  (void)opt_cfg;
  std::map<std::string, int (*)(const Run&)> handlers{{"gen", cmd_gen},
                                                        {"profile", cmd_profile},
                                                        {"exponents", cmd_exponents},
                                                        {"decompose", cmd_decompose},
                                                        {"report", cmd_report}};
  const std::map<std::string, std::string> help{
      {"gen", "write the spaces of every configured level"},
      {"profile", "multiscale energy profiles and KS tail fits"},
      {"exponents", "rho_p, walk dimension, theta_p and theta_p*"},
      {"decompose", "component detection and irreducibility verdict"},
      {"report", "collect existing artifacts into report.json and report.md"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    json j = json::object();
    if (!config_path.empty()) j = read_json(config_path);
    if (*opt_jobs) j["jobs"] = jobs < 0 ? 0 : jobs;
    if (*opt_out) j["output"] = out_dir;
    if (oracle) j["oracle"] = true;
    if (*opt_seed) j["seed"] = seed;
    Run run;
    run.cfg = ExperimentConfig::from_json(j);
    run.hash = run.cfg.hash();
    set_default_jobs(run.cfg.jobs);
    for (auto* sub : app.get_subcommands()) return handlers.at(sub->get_name())(run);
  } catch (const MissingArtifactError& e) {
    std::cerr << "besovlab: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "besovlab: convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const ResolutionError& e) {
    std::cerr << "besovlab: insufficient resolution: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "besovlab: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
