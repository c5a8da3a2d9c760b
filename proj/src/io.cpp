#include "besovlab/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "besovlab/errors.hpp"

namespace besovlab {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  // strtod flags subnormals with ERANGE; only overflow is rejected.
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || std::isspace(static_cast<unsigned char>(s[0])) || end != s.c_str() + s.size() ||
      (errno == ERANGE && std::isinf(v)))
    throw ArgumentError("not a number: '" + s + "'");
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("missing artifact: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

std::string space_stem(const std::string& family, int n, int level) {
  return "space_" + family + "_n" + std::to_string(n) + "_m" + std::to_string(level);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line != "\r" && line[0] != '#') out.push_back(line);
  return out;
}

std::string comment_block(const std::string& comment) {
  if (comment.empty()) return "";
  std::string out;
  std::size_t start = 0;
  while (start <= comment.size()) {
    std::size_t end = comment.find('\n', start);
    if (end == std::string::npos) end = comment.size();
    out += "# " + comment.substr(start, end - start) + "\n";
    start = end + 1;
  }
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

}  // namespace

void write_space(const std::string& stem, const Space& space, const json& meta,
                 const std::vector<std::pair<std::string, std::vector<int>>>& extra_columns,
                 const std::string& comment) {
  const std::size_t n = space.size();
  const std::size_t dim = space.metric_kind() == MetricKind::euclidean ? space.dim() : 0;
  for (const auto& name : space.label_names())
    if (name.find_first_of(",\n") != std::string::npos) throw ArgumentError("label names cannot contain commas");
  std::string out = comment_block(comment);
  for (std::size_t d = 0; d < dim; ++d) out += "x" + std::to_string(d) + ",";
  out += "weight,label";
  for (const auto& [name, col] : extra_columns) {
    if (col.size() != n) throw ArgumentError("extra column " + name + " has the wrong length");
    out += "," + name;
  }
  out += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) out += format_double(space.point(i)[d]) + ",";
    out += format_double(space.weight(i)) + ",";
    if (!space.labels().empty()) out += space.label_names()[space.labels()[i]];
    for (const auto& col : extra_columns) out += "," + std::to_string(col.second[i]);
    out += "\n";
  }
  write_text(stem + ".csv", out);

  json side = meta;
  side["metric_kind"] = space.metric_kind() == MetricKind::euclidean ? "euclidean" : "explicit_matrix";
  side["dim"] = space.dim();
  side["points"] = n;
  side["total_mass"] = space.total_mass();
  side["diameter"] = space.diameter();
  side["family"] = space.family();
  side["level"] = space.level();
  side["label_names"] = space.label_names();
  side["anchors"] = space.anchors();
  if (space.glue()) {
    side["glue"] = {{"point", space.glue()->point}, {"atom_a", space.glue()->atom_a}, {"atom_b", space.glue()->atom_b}};
  } else {
    side["glue"] = nullptr;
  }
  if (space.metric_kind() == MetricKind::explicit_matrix) side["matrix"] = space.matrix();
  write_json(stem + ".json", side);
}

Space read_space(const std::string& stem) {
  json side = read_json(stem + ".json");
  auto rows = lines_of(read_text(stem + ".csv"));
  if (rows.empty()) throw ArgumentError(stem + ".csv: empty file");
  auto header = split(rows[0], ',');
  std::size_t dim = 0;
  while (dim < header.size() && header[dim] == "x" + std::to_string(dim)) ++dim;
  if (header.size() < dim + 2 || header[dim] != "weight" || header[dim + 1] != "label")
    throw ArgumentError(stem + ".csv: unexpected header");
  const bool euclid_kind = side.value("metric_kind", "euclidean") == "euclidean";
  std::vector<double> coords, weights;
  std::vector<std::string> label_text;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto cells = split(rows[r], ',');
    if (cells.size() != header.size())
      throw ArgumentError(stem + ".csv: row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                          " cells");
    for (std::size_t d = 0; d < dim; ++d) coords.push_back(parse_double(cells[d]));
    weights.push_back(parse_double(cells[dim]));
    label_text.push_back(cells[dim + 1]);
  }
  Space s = euclid_kind ? Space(dim, std::move(coords), std::move(weights))
                        : Space::from_matrix(side.at("matrix").get<std::vector<double>>(), std::move(weights));
  auto names = side.value("label_names", std::vector<std::string>{});
  if (!names.empty()) {
    std::vector<int> labels;
    for (const auto& t : label_text) {
      auto it = std::find(names.begin(), names.end(), t);
      if (it == names.end()) throw ArgumentError(stem + ".csv: unknown label '" + t + "'");
      labels.push_back(static_cast<int>(it - names.begin()));
    }
    s.set_labels(std::move(labels), names);
  }
  s.set_anchors(side.value("anchors", std::vector<double>{}));
  if (side.contains("glue") && side["glue"].is_object()) {
    const auto& g = side["glue"];
    s.set_glue(GlueInfo{g.at("point").get<std::vector<double>>(), g.at("atom_a").get<std::size_t>(),
                        g.at("atom_b").get<std::size_t>()});
  }
  s.set_family(side.value("family", "custom"), side.value("level", 0));
  return s;
}

void write_function(const std::string& path, const std::vector<double>& values, const std::string& comment) {
  std::string out = comment_block(comment) + "value\n";
  for (double v : values) out += format_double(v) + "\n";
  write_text(path, out);
}

std::vector<double> read_function(const std::string& path, std::size_t expected_size) {
  auto rows = lines_of(read_text(path));
  if (rows.empty() || rows[0] != "value") throw ArgumentError(path + ": expected header 'value'");
  std::vector<double> v;
  for (std::size_t r = 1; r < rows.size(); ++r) v.push_back(parse_double(rows[r]));
  if (v.size() != expected_size)
    throw ArgumentError(path + ": " + std::to_string(v.size()) + " values for " + std::to_string(expected_size) +
                        " points");
  return v;
}

json to_json(const ScalingFit& fit) {
  return {{"alpha", finite_or_null(fit.alpha)},       {"log_constant", finite_or_null(fit.log_constant)},
          {"r_squared", finite_or_null(fit.r_squared)}, {"r_lo", finite_or_null(fit.r_lo)},
          {"r_hi", finite_or_null(fit.r_hi)},           {"count", fit.count}};
}

json to_json(const KsTail& tail) {
  return {{"energy", finite_or_null(tail.energy)}, {"fit", to_json(tail.fit)},
          {"classification", to_string(tail.classification)}};
}

void write_profile(const std::string& stem, const EnergyProfile& profile, const json& meta,
                   const std::string& comment) {
  std::string out = comment_block(comment) + "t,value\n";
  for (std::size_t i = 0; i < profile.radii.size(); ++i)
    out += format_double(profile.radii[i]) + "," + format_double(profile.values[i]) + "\n";
  write_text(stem + ".csv", out);
  json side = meta;
  side["p"] = profile.p;
  side["theta"] = profile.theta;
  side["besov_pp"] = profile.besov_pp ? json(*profile.besov_pp) : json(nullptr);
  side["dyadic_sum"] = profile.dyadic_sum;
  side["dyadic_radii"] = profile.dyadic_radii;
  side["dyadic_values"] = profile.dyadic_values;
  write_json(stem + ".json", side);
}

EnergyProfile read_profile(const std::string& stem) {
  json side = read_json(stem + ".json");
  auto rows = lines_of(read_text(stem + ".csv"));
  if (rows.empty() || rows[0] != "t,value") throw ArgumentError(stem + ".csv: expected header t,value");
  EnergyProfile p;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto cells = split(rows[r], ',');
    if (cells.size() != 2) throw ArgumentError(stem + ".csv: malformed row");
    p.radii.push_back(parse_double(cells[0]));
    p.values.push_back(parse_double(cells[1]));
  }
  p.p = side.at("p").get<double>();
  p.theta = side.at("theta").get<double>();
  if (side.contains("besov_pp") && side["besov_pp"].is_number()) p.besov_pp = side["besov_pp"].get<double>();
  p.dyadic_sum = number_or_nan(side.value("dyadic_sum", json(0.0)));
  p.dyadic_radii = side.value("dyadic_radii", std::vector<double>{});
  p.dyadic_values = side.value("dyadic_values", std::vector<double>{});
  return p;
}

void write_graph(const std::string& stem, const GraphApprox& g, const json& meta, const std::string& comment) {
  std::string out = comment_block(comment);
  out.reserve(g.edges.size() * 12);
  for (auto [a, b] : g.edges) out += std::to_string(a) + " " + std::to_string(b) + "\n";
  write_text(stem + ".edges", out);
  json side = meta;
  side["family"] = g.family;
  side["n"] = g.n;
  side["level"] = g.level;
  side["dim"] = g.dim;
  side["vertices"] = g.size();
  side["edge_count"] = g.edges.size();
  side["coords"] = g.coords;
  side["boundary_a"] = g.boundary_a;
  side["boundary_b"] = g.boundary_b;
  write_json(stem + ".json", side);
}

GraphApprox read_graph(const std::string& stem) {
  json side = read_json(stem + ".json");
  GraphApprox g;
  g.family = side.at("family").get<std::string>();
  g.n = side.at("n").get<int>();
  g.level = side.at("level").get<int>();
  g.dim = side.at("dim").get<std::size_t>();
  g.coords = side.at("coords").get<std::vector<double>>();
  g.boundary_a = side.at("boundary_a").get<std::vector<std::size_t>>();
  g.boundary_b = side.at("boundary_b").get<std::vector<std::size_t>>();
  for (const auto& line : lines_of(read_text(stem + ".edges"))) {
    auto cells = split(line, ' ');
    if (cells.size() != 2) throw ArgumentError(stem + ".edges: malformed line '" + line + "'");
    g.edges.push_back({static_cast<std::uint32_t>(std::stoul(cells[0])), static_cast<std::uint32_t>(std::stoul(cells[1]))});
  }
  validate(g);
  return g;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows, const std::string& comment) {
  std::string out = comment_block(comment);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw ArgumentError(path + ": row width does not match header");
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  }
  write_text(path, out);
}

}  // namespace besovlab
