#pragma once

// Serialization of fields, trajectories and solver problem documents.
// Byte layouts are described in docs/formats.md.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "ouspec/nls.hpp"

namespace ou::io {

using nlohmann::json;

/// 17 significant digits, enough to round-trip any double; nan/inf spelled out.
std::string format_double(double v);

json to_json(const BasisSpec& spec);
BasisSpec basis_from_json(const json& j);
json to_json(const SpectralField& f);
SpectralField field_from_json(const json& j);
json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const json& j);

/// Binary record: a field is stored as a trajectory with zero time nodes.
void write_binary(std::ostream& os, const SpectralField& f);
void write_binary(std::ostream& os, const Trajectory& t);
SpectralField read_binary_field(std::istream& is);
Trajectory read_binary_trajectory(std::istream& is);

void save_field(const std::filesystem::path& path, const SpectralField& f);
SpectralField load_field(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const Trajectory& t);
Trajectory load_trajectory(const std::filesystem::path& path);

json to_json(const PicardReport& rep);

struct CriticalSettings {
  double eta = 0.05;
  bool auto_interval = true;
  int smallness_nodes = 61;
};

struct ProblemDocument {
  NLSProblem problem;
  std::optional<CriticalSettings> critical;
};

/// Parses a problem document; relative u0 file paths resolve against `base_dir`.
ProblemDocument parse_problem(const json& j, const std::filesystem::path& base_dir = {});
ProblemDocument load_problem(const std::filesystem::path& path);
json to_json(const ProblemDocument& doc);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ou::io
