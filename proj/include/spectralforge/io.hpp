#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectralforge/bayes_phase.hpp"
#include "spectralforge/core_spectra.hpp"
#include "spectralforge/schedule_synth.hpp"

namespace spectralforge::io {

using json = nlohmann::ordered_json;

/// %.17g, so values round-trip exactly.
std::string format_double(double x);

std::string read_text(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Throws Error(ParseError) on malformed input.
json parse_json(std::string_view text, std::string_view what = "input");
json read_json(const std::filesystem::path& path);
/// Serializes with doubles at 17 significant digits.
std::string dump_json(const json& j);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t h);

json to_json(const Spectrum& s);
Spectrum spectrum_from_json(const json& j);

json to_json(const TargetVector& t);
TargetVector target_from_json(const json& j);

json to_json(const BistochasticMatrix& r);
BistochasticMatrix weights_from_json(const json& j);

json to_json(const SwitchingSchedule& s);
SwitchingSchedule schedule_from_json(const json& j);

json to_json(const BirkhoffDecomposition& d);

json to_json(const PhasePrior& p);
PhasePrior prior_from_json(const json& j);

json to_json(const ProbeState& p);
ProbeState probe_from_json(const json& j);

/// Minimal CSV writer: header plus rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct OutputRecord {
  std::string path;
  std::string hash;
};

struct RunManifest {
  std::string tool_version;
  std::vector<std::string> command_line;
  std::uint64_t seed = 0;
  std::vector<OutputRecord> inputs;
  std::vector<OutputRecord> outputs;
  json tolerances = json::object();
  json details = json::object();
  double wall_time_s = 0.0;

  /// Hashes a file's current content and records it.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  json to_json() const;
};

/// Default numeric tolerances recorded in every manifest.
json default_tolerances();

}  // namespace spectralforge::io
