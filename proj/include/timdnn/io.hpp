#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "timdnn/cost.hpp"
#include "timdnn/error_model.hpp"
#include "timdnn/graph.hpp"
#include "timdnn/mapping.hpp"

namespace timdnn {

inline constexpr int kSchemaVersion = 1;

/// Every tunable constant of a run.
struct SystemConfig {
  AcceleratorConfig accel;
  CostParams cost;
  BitlineVoltageModel bitline = BitlineVoltageModel::defaults();
  std::string noise_profile = "proportional";
  int mc_samples = 1000;
  double assumed_discharge_per_column = 3.2;

  /// Bitline model with the profile string applied.
  BitlineVoltageModel voltage_model() const;
  void validate() const;
};

using ParamRef = std::variant<double*, int*, long*, std::string*>;

struct Param {
  std::string key;  // dotted, e.g. "tile.n_max"
  std::string unit;
  std::string provenance;  // "paper", "derived" or "assumption"
  ParamRef ref;
};

/// Registry of the config's fields; pointers refer into `cfg`.
std::vector<Param> parameters(SystemConfig& cfg);

/// Reads a params file. Each entry is either a bare value or an object with
/// "value" (and optionally "unit"/"provenance"). Unknown keys throw.
SystemConfig load_config(const std::filesystem::path& path);
void apply_config_json(SystemConfig& cfg, const std::string& json_text);

/// Applies "key=value" overrides.
void apply_override(SystemConfig& cfg, const std::string& assignment);

/// Params file with every constant, its unit and provenance.
std::string config_to_json(const SystemConfig& cfg);

/// Loads a graph descriptor. `name_or_path` is a file path or the stem of a
/// descriptor inside `workload_dir`. Weight blob paths resolve against the
/// descriptor's directory.
DnnGraph load_workload(const std::string& name_or_path, const std::filesystem::path& workload_dir);
DnnGraph parse_workload(const std::string& json_text, const std::filesystem::path& base_dir);

/// Signed-byte trit blob, row-major (inner x cols).
TritMatrix load_weight_blob(const std::filesystem::path& path, long inner, long cols);
void save_weight_blob(const std::filesystem::path& path, const TritMatrix& w);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);
/// Shortest round-trip decimal text of a double.
std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  CsvWriter& row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

std::string report_to_json(const CostReport& r, const ExecutionTrace& t, const std::string& label);
void write_report_csv(std::ostream& os, const CostReport& r, const std::string& label);
std::string trace_summary_json(const ExecutionTrace& t);

}  // namespace timdnn
