#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "besovlab/capacity.hpp"
#include "besovlab/energy.hpp"
#include "besovlab/graphs.hpp"
#include "besovlab/space.hpp"

namespace besovlab {

using json = nlohmann::json;

// 17 significant digits, round-trip exact.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);  // MissingArtifactError when absent
void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

std::string space_stem(const std::string& family, int n, int level);

// Text artifacts may start with '#' comment lines (provenance); readers skip them.
// <stem>.csv with header x0,...,xD-1,weight,label and <stem>.json sidecar.
// `extra_columns` are appended after label (one value per point).
void write_space(const std::string& stem, const Space& space, const json& meta = json::object(),
                 const std::vector<std::pair<std::string, std::vector<int>>>& extra_columns = {},
                 const std::string& comment = "");
Space read_space(const std::string& stem);

void write_function(const std::string& path, const std::vector<double>& values, const std::string& comment = "");
std::vector<double> read_function(const std::string& path, std::size_t expected_size);

// <stem>.csv with columns t,value and <stem>.json with the fit fields.
void write_profile(const std::string& stem, const EnergyProfile& profile, const json& meta = json::object(),
                   const std::string& comment = "");
EnergyProfile read_profile(const std::string& stem);

json to_json(const ScalingFit& fit);
json to_json(const KsTail& tail);

// <stem>.edges with "u v" lines and <stem>.json with boundary sets and metadata.
void write_graph(const std::string& stem, const GraphApprox& g, const json& meta = json::object(),
                 const std::string& comment = "");
GraphApprox read_graph(const std::string& stem);

// Writes rows of already formatted cells.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows, const std::string& comment = "");

}  // namespace besovlab
