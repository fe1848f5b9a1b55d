#pragma once

// Run manifests and the on-disk exit-sample format.
//
// CSV layout: a '#'-prefixed JSON manifest line, a header row, then one row
// per sample (seed_index, exit_time, exit_side, steps).  Reruns with the
// same configuration reproduce the data section byte for byte; only the
// wall-clock entry of the manifest varies.  JSON layout mirrors the rows as
// arrays under "rows" with the manifest alongside.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cleradii/diffusion.hpp"
#include "cleradii/errors.hpp"
#include "cleradii/version.hpp"

namespace cleradii::io {

using json = nlohmann::json;

// Formats a double with enough digits to round-trip exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> params;
  std::string rng_version = kRngVersion;
  std::uint64_t seed = 0;
  std::string software_version = kVersion;
  double wall_seconds = 0.0;

  json to_json() const {
    json j;
    j["command"] = command;
    j["params"] = params;
    j["rng_version"] = rng_version;
    j["seed"] = seed;
    j["software_version"] = software_version;
    j["wall_seconds"] = wall_seconds;
    return j;
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    for (const auto& [k, v] : j.at("params").items()) {
      m.params[k] = v.get<std::string>();
    }
    m.rng_version = j.at("rng_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.software_version = j.at("software_version").get<std::string>();
    m.wall_seconds = j.value("wall_seconds", 0.0);
    return m;
  }

  double param_as_double(const std::string& key) const {
    const auto it = params.find(key);
    require(it != params.end(), "manifest: missing parameter " + key);
    return std::stod(it->second);
  }
};

// ---------------------------------------------------------------------------
// exit-sample files
// ---------------------------------------------------------------------------

inline constexpr const char* kSampleHeader =
    "seed_index,exit_time,exit_side,steps";

inline std::string sample_rows_csv(const std::vector<diffusion::ExitSample>& samples) {
  std::string out;
  out.reserve(samples.size() * 32);
  for (const auto& s : samples) {
    out += std::to_string(s.seed_index);
    out += ',';
    out += format_double(s.exit_time);
    out += ',';
    out += std::to_string(s.exit_side);
    out += ',';
    out += std::to_string(s.steps);
    out += '\n';
  }
  return out;
}

inline void write_samples_csv(std::ostream& os, const RunManifest& manifest,
                              const std::vector<diffusion::ExitSample>& samples) {
  os << "# " << manifest.to_json().dump() << "\n";
  os << kSampleHeader << "\n";
  os << sample_rows_csv(samples);
}

inline void write_samples_json(std::ostream& os, const RunManifest& manifest,
                               const std::vector<diffusion::ExitSample>& samples) {
  os << "{\"manifest\": " << manifest.to_json().dump()
     << ", \"columns\": [\"seed_index\",\"exit_time\",\"exit_side\",\"steps\"]"
     << ", \"rows\": [";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (i) os << ',';
    os << '[' << s.seed_index << ',' << format_double(s.exit_time) << ','
       << s.exit_side << ',' << s.steps << ']';
  }
  os << "]}\n";
}

struct SampleFile {
  RunManifest manifest;
  std::vector<diffusion::ExitSample> samples;
};

inline SampleFile read_samples(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open sample file: " + path);
  std::string first;
  std::getline(in, first);
  SampleFile file;
  if (!first.empty() && first[0] == '{') {
    // JSON layout
    std::string rest((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const json j = json::parse(first + rest);
    file.manifest = RunManifest::from_json(j.at("manifest"));
    for (const auto& row : j.at("rows")) {
      diffusion::ExitSample s;
      s.seed_index = row.at(0).get<std::uint64_t>();
      s.exit_time = row.at(1).get<double>();
      s.exit_side = row.at(2).get<int>();
      s.steps = row.at(3).get<std::uint64_t>();
      file.samples.push_back(s);
    }
    return file;
  }
  require(first.size() > 2 && first[0] == '#',
          "sample file missing manifest header: " + path);
  file.manifest = RunManifest::from_json(json::parse(first.substr(1)));
  std::string line;
  std::getline(in, line);  // column header
  require(line == kSampleHeader, "unexpected sample header: " + line);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    diffusion::ExitSample s;
    std::istringstream ss(line);
    char comma;
    ss >> s.seed_index >> comma >> s.exit_time >> comma >> s.exit_side >>
        comma >> s.steps;
    require(!ss.fail(), "malformed sample row: " + line);
    file.samples.push_back(s);
  }
  return file;
}

// ---------------------------------------------------------------------------
// generic tables (law/gasket/martingale outputs)
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  json extra;  // fit summaries and gates, emitted after the rows

  void add_row(std::initializer_list<double> values) {
    rows.emplace_back(values);
  }
};

inline void write_table_csv(std::ostream& os, const RunManifest& manifest,
                            const Table& table) {
  os << "# " << manifest.to_json().dump() << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) os << ',';
    os << table.columns[c];
  }
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << format_double(row[c]);
    }
    os << "\n";
  }
  if (!table.extra.is_null()) {
    os << "# " << table.extra.dump() << "\n";
  }
}

inline void write_table_json(std::ostream& os, const RunManifest& manifest,
                             const Table& table) {
  json j;
  j["manifest"] = manifest.to_json();
  j["columns"] = table.columns;
  json rows = json::array();
  for (const auto& row : table.rows) rows.push_back(row);
  j["rows"] = rows;
  if (!table.extra.is_null()) j["summary"] = table.extra;
  os << j.dump(2) << "\n";
}

}  // namespace cleradii::io
