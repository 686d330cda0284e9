#include "timdnn/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace timdnn {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

BitlineVoltageModel SystemConfig::voltage_model() const {
  BitlineVoltageModel m = bitline;
  if (noise_profile == "proportional")
    m.profile = NoiseProfile::Proportional;
  else if (noise_profile == "uniform")
    m.profile = NoiseProfile::Uniform;
  else
    throw ConfigError("noise_profile must be 'uniform' or 'proportional'");
  return m;
}

void SystemConfig::validate() const {
  accel.validate();
  cost.validate();
  voltage_model().validate();
  if (mc_samples < 1000) throw ConfigError("mc.samples must be at least 1000");
  if (!(assumed_discharge_per_column >= 0.0))
    throw ConfigError("sim.assumed_discharge_per_column must be non-negative");
}

std::vector<Param> parameters(SystemConfig& c) {
  auto& a = c.accel;
  auto& e = c.cost.energy;
  auto& t = c.cost.timing;
  std::vector<Param> p = {
      {"tile.rows_per_block", "rows", "paper", &a.tile.rows_per_block},
      {"tile.blocks", "blocks", "paper", &a.tile.blocks},
      {"tile.columns", "words", "paper", &a.tile.columns},
      {"tile.pcus", "units", "derived", &a.tile.pcus},
      {"tile.n_max", "count", "paper", &a.tile.adc_max},
      {"accel.num_tiles", "tiles", "paper", &a.num_tiles},
      {"accel.banks", "banks", "assumption", &a.banks},
      {"accel.iso_area_tiles", "tiles", "paper", &a.iso_area_tiles},
      {"accel.act_buffer_bytes", "bytes", "assumption", &a.act_buffer_bytes},
      {"accel.psum_buffer_bytes", "bytes", "assumption", &a.psum_buffer_bytes},
      {"accel.ru_width", "adds/cycle", "assumption", &a.ru_width},
      {"accel.psum_bytes", "bytes", "assumption", &a.psum_bytes},
      {"accel.temporal_policy", "", "assumption", &a.temporal_policy},
      {"sfu.relu_units", "units", "paper", &a.sfu.relu_units},
      {"sfu.vpe", "units", "paper", &a.sfu.vpe},
      {"sfu.vpe_lanes", "lanes", "paper", &a.sfu.vpe_lanes},
      {"sfu.spe", "units", "paper", &a.sfu.spe},
      {"sfu.qu", "units", "paper", &a.sfu.qu},
      {"energy.wl", "J", "paper", &e.wl_energy},
      {"energy.pcu", "J", "paper", &e.pcu_energy},
      {"energy.misc", "J", "paper", &e.misc_energy},
      {"energy.bl_unit", "J/discharge", "derived", &e.bl_energy_unit},
      {"energy.sram_row_read", "J", "assumption", &e.sram_row_read_energy},
      {"energy.row_write", "J", "assumption", &e.row_write_energy},
      {"energy.buffer_per_byte", "J/byte", "assumption", &e.buffer_energy_per_byte},
      {"energy.dram_per_byte", "J/byte", "assumption", &e.dram_energy_per_byte},
      {"energy.ru_op", "J", "assumption", &e.ru_op_energy},
      {"energy.sfu_relu", "J", "assumption", &e.sfu_op_energy[0]},
      {"energy.sfu_vpe", "J", "assumption", &e.sfu_op_energy[1]},
      {"energy.sfu_spe", "J", "assumption", &e.sfu_op_energy[2]},
      {"energy.sfu_qu", "J", "assumption", &e.sfu_op_energy[3]},
      {"timing.tim_access_latency", "s", "paper", &t.tim_access_latency},
      {"timing.pcu_stage_latency", "s", "assumption", &t.pcu_stage_latency},
      {"timing.sram_row_read_latency", "s", "derived", &t.sram_row_read_latency},
      {"timing.row_write_latency", "s", "assumption", &t.row_write_latency},
      {"timing.clock_hz", "Hz", "assumption", &t.clock_hz},
      {"timing.buffer_bandwidth", "bytes/s", "assumption", &t.buffer_bandwidth},
      {"timing.dram_bandwidth", "bytes/s", "assumption", &t.dram_bandwidth},
      {"system.weight_reuse", "inferences", "assumption", &c.cost.weight_reuse},
      {"system.power_watts", "W", "paper", &c.cost.power_watts},
      {"system.area_mm2", "mm^2", "paper", &c.cost.area_mm2},
      {"bitline.supply", "V", "derived", &c.bitline.supply},
      {"bitline.sigma", "V", "derived", &c.bitline.sigma},
      {"bitline.reference_count", "count", "assumption", &c.bitline.reference_count},
      {"bitline.noise_profile", "", "assumption", &c.noise_profile},
      {"mc.samples", "samples/state", "paper", &c.mc_samples},
      {"sim.assumed_discharge_per_column", "units/access", "assumption",
       &c.assumed_discharge_per_column},
  };
  for (int i = 0; i < BitlineVoltageModel::kMaxState; ++i)
    p.push_back({"bitline.margin_" + std::to_string(i + 1), "V", "paper",
                 &c.bitline.margins[static_cast<std::size_t>(i)]});
  return p;
}

namespace {

Param* find_param(std::vector<Param>& ps, const std::string& key) {
  for (auto& p : ps)
    if (p.key == key) return &p;
  return nullptr;
}

void assign_json(Param& p, const json& v) {
  std::visit(
      [&](auto* ptr) {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) throw ConfigError(p.key + " expects a string");
          *ptr = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
          if (!v.is_number()) throw ConfigError(p.key + " expects a number");
          *ptr = v.get<double>();
        } else {
          if (!v.is_number_integer()) throw ConfigError(p.key + " expects an integer");
          *ptr = v.get<T>();
        }
      },
      p.ref);
}

void assign_text(Param& p, const std::string& text) {
  std::visit(
      [&](auto* ptr) {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, std::string>) {
          *ptr = text;
        } else {
          T v{};
          const char* end = text.data() + text.size();
          auto [pos, ec] = std::from_chars(text.data(), end, v);
          if (ec != std::errc() || pos != end)
            throw ConfigError("override " + p.key + ": cannot parse '" + text + "'");
          *ptr = v;
        }
      },
      p.ref);
}

json param_value(const Param& p) {
  return std::visit([](auto* ptr) { return json(*ptr); }, p.ref);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

void apply_config_json(SystemConfig& cfg, const std::string& text) {
  const json j = parse_json(text, "config");
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
    throw ConfigError("config schema_version must be " + std::to_string(kSchemaVersion));
  auto ps = parameters(cfg);
  const json params = j.value("params", json::object());
  if (!params.is_object()) throw ConfigError("config 'params' must be an object");
  for (const auto& [key, v] : params.items()) {
    Param* p = find_param(ps, key);
    if (!p) throw ConfigError("unknown parameter '" + key + "'");
    if (v.is_object()) {
      if (!v.contains("value")) throw ConfigError(key + ": missing 'value'");
      assign_json(*p, v["value"]);
    } else {
      assign_json(*p, v);
    }
  }
  cfg.validate();
}

SystemConfig load_config(const fs::path& path) {
  SystemConfig cfg;
  apply_config_json(cfg, read_file(path));
  return cfg;
}

void apply_override(SystemConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  auto ps = parameters(cfg);
  Param* p = find_param(ps, key);
  if (!p) throw ConfigError("unknown parameter '" + key + "'");
  assign_text(*p, assignment.substr(eq + 1));
}

std::string config_to_json(const SystemConfig& cfg) {
  SystemConfig copy = cfg;
  json j;
  j["schema_version"] = kSchemaVersion;
  json params = json::object();
  for (const auto& p : parameters(copy))
    params[p.key] = {{"value", param_value(p)}, {"unit", p.unit}, {"provenance", p.provenance}};
  j["params"] = params;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- workloads

TritMatrix load_weight_blob(const fs::path& path, long inner, long cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read weight blob " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (static_cast<long>(buf.size()) != inner * cols)
    throw ShapeError("weight blob " + path.string() + " has " + std::to_string(buf.size()) +
                     " bytes, expected " + std::to_string(inner * cols));
  TritMatrix w(inner, cols);
  for (long r = 0; r < inner; ++r)
    for (long c = 0; c < cols; ++c) {
      const auto v = static_cast<std::int8_t>(buf[static_cast<std::size_t>(r * cols + c)]);
      if (v < -1 || v > 1) throw InputError("weight blob " + path.string() + " holds a non-trit");
      w(r, c) = v;
    }
  return w;
}

void save_weight_blob(const fs::path& path, const TritMatrix& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) out.put(static_cast<char>(w(r, c)));
}

namespace {

TernarySystem parse_system(const json& j) {
  TernarySystem s;
  s.kind = system_kind_from_string(j.value("kind", "unweighted"));
  s.pos_weight = j.value("w1", 1.0);
  s.neg_weight = j.value("w2", s.pos_weight);
  s.pos_input = j.value("i1", 1.0);
  s.neg_input = j.value("i2", s.pos_input);
  s.validate();
  return s;
}

void parse_kernel(const json& j, Layer& l) {
  if (!j.contains("kernel")) return;
  const json& k = j["kernel"];
  if (k.is_array() && k.size() == 2) {
    l.kernel_h = k[0].get<int>();
    l.kernel_w = k[1].get<int>();
  } else if (k.is_number_integer()) {
    l.kernel_h = l.kernel_w = k.get<int>();
  } else {
    throw ConfigError("layer '" + l.name + "': kernel must be an integer or [h, w]");
  }
}

}  // namespace

DnnGraph parse_workload(const std::string& text, const fs::path& base_dir) {
  const json j = parse_json(text, "workload");
  try {
    if (j.value("schema_version", 0) != kSchemaVersion)
      throw ConfigError("workload schema_version must be " + std::to_string(kSchemaVersion));
    DnnGraph g;
    g.name = j.value("name", "workload");
    const json& in = j.at("input");
    g.input = {in.value("channels", 1), in.value("height", 1), in.value("width", 1)};
    g.input_bits = in.value("bits", 1);
    const json defaults = j.value("defaults", json::object());
    const TernarySystem def_sys =
        defaults.contains("system") ? parse_system(defaults["system"]) : TernarySystem{};
    const int def_bits = defaults.value("act_bits", 1);

    std::map<std::string, int> index{{"input", kGraphInput}};
    const json& layers = j.at("layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const json& lj = layers[i];
      Layer l;
      l.kind = layer_kind_from_string(lj.at("type").get<std::string>());
      l.name = lj.value("name", to_string(l.kind) + std::to_string(i));
      if (index.count(l.name)) throw ConfigError("duplicate layer name '" + l.name + "'");
      if (lj.contains("inputs"))
        for (const auto& src : lj["inputs"]) {
          const auto it = index.find(src.get<std::string>());
          if (it == index.end())
            throw ConfigError("layer '" + l.name + "' reads unknown layer '" + src.get<std::string>() + "'");
          l.inputs.push_back(it->second);
        }
      l.out_channels = lj.value("out_channels", 0);
      parse_kernel(lj, l);
      l.stride = lj.value("stride", 1);
      l.pad = lj.value("pad", 0);
      l.max_pool = lj.value("mode", "max") == "max";
      l.global_pool = lj.value("global", false);
      l.out_features = lj.value("out_features", 0);
      l.hidden = lj.value("hidden", 0);
      l.act_bits = lj.value("act_bits", def_bits);
      l.system = lj.contains("system") ? parse_system(lj["system"]) : def_sys;
      l.gate_scale = lj.value("gate_scale", 0.0);
      l.quant_bits = lj.value("bits", 1);
      l.quant_step = lj.value("step", 0.0);
      index[l.name] = static_cast<int>(i);
      g.layers.push_back(std::move(l));
    }

    // Weight blobs need the resolved shapes for their dimensions.
    std::vector<std::vector<std::string>> files(g.layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].contains("weights"))
        for (const auto& f : layers[i]["weights"]) files[i].push_back(f.get<std::string>());
    }
    const auto shapes = resolve_shapes(g);
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
      if (files[i].empty()) continue;
      const int p = g.producers(static_cast<int>(i)).front();
      const Shape in_shape = p == kGraphInput ? g.input : shapes[static_cast<std::size_t>(p)];
      const auto mms = layer_matmuls(g.layers[i], in_shape);
      if (mms.size() != files[i].size())
        throw ConfigError("layer '" + g.layers[i].name + "' needs " + std::to_string(mms.size()) +
                          " weight blobs");
      for (std::size_t m = 0; m < mms.size(); ++m)
        g.layers[i].weights.push_back(load_weight_blob(base_dir / files[i][m], mms[m].inner, mms[m].cols));
    }
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  }
}

DnnGraph load_workload(const std::string& name_or_path, const fs::path& workload_dir) {
  fs::path p(name_or_path);
  if (!fs::exists(p)) {
    const fs::path named = workload_dir / (name_or_path + ".json");
    if (!fs::exists(named)) throw ConfigError("workload '" + name_or_path + "' not found");
    p = named;
  }
  return parse_workload(read_file(p), p.parent_path());
}

// ---------------------------------------------------------------- reports

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << csv_field(fields[i]);
  }
  os_ << "\r\n";
  return *this;
}

std::string trace_summary_json(const ExecutionTrace& t) {
  const EventCounts e = t.totals();
  json j;
  j["tile_kind"] = t.tile_kind == TileKind::InMemory ? "in-memory" : "near-memory";
  j["strategy"] = to_string(t.strategy);
  j["num_tiles"] = t.num_tiles;
  j["inferences"] = t.inferences;
  j["functional"] = t.functional;
  j["phases"] = t.phases.size();
  j["tile_accesses"] = e.tile_accesses;
  j["row_reads"] = e.row_reads;
  long writes = 0;
  for (const auto& p : t.phases) writes += p.row_writes;
  j["row_writes"] = writes;
  j["weight_bytes"] = t.weight_bytes();
  j["discharge_units"] = e.discharge_units;
  j["macs"] = e.macs;
  j["padded_macs"] = e.padded_macs;
  j["act_read_bytes"] = e.act_read_bytes;
  j["act_write_bytes"] = e.act_write_bytes;
  j["psum_read_bytes"] = e.psum_read_bytes;
  j["psum_write_bytes"] = e.psum_write_bytes;
  j["dram_read_bytes"] = e.dram_read_bytes;
  j["dram_write_bytes"] = e.dram_write_bytes;
  j["ru_ops"] = e.ru_ops;
  for (int k = 0; k < kSfuKinds; ++k)
    j["sfu_" + to_string(static_cast<SfuKind>(k)) + "_ops"] = e.sfu_ops[static_cast<std::size_t>(k)];
  j["spills"] = e.spills;
  if (t.functional && t.tile_kind == TileKind::InMemory) {
    j["pos_histogram"] = t.pos_histogram;
    j["neg_histogram"] = t.neg_histogram;
    j["injected_errors"] = t.injected_errors;
    j["conversions"] = t.conversions;
  }
  json layers = json::array();
  for (const auto& l : t.layers)
    layers.push_back({{"name", l.name},
                      {"type", to_string(l.kind)},
                      {"stage", l.stage},
                      {"replicas", l.replicas},
                      {"macs", l.events.macs},
                      {"tile_accesses", l.events.tile_accesses},
                      {"row_reads", l.events.row_reads},
                      {"critical_accesses", l.critical_accesses},
                      {"critical_row_reads", l.critical_row_reads}});
  j["layers"] = layers;
  return j.dump(2) + "\n";
}

std::string report_to_json(const CostReport& r, const ExecutionTrace& t, const std::string& label) {
  json j;
  j["label"] = label;
  j["strategy"] = to_string(t.strategy);
  j["energy_j"] = {{"programming", r.energy.programming}, {"dram", r.energy.dram},
                   {"buffers", r.energy.buffers},         {"ru_sfu", r.energy.ru_sfu},
                   {"mac_ops", r.energy.mac_ops},         {"total", r.total_energy}};
  j["latency_s"] = {{"mac_ops", r.latency.mac_ops},
                    {"non_mac_ops", r.latency.non_mac_ops},
                    {"total", r.total_latency}};
  j["non_mac_latency_s"] = {{"sfu", r.non_mac.sfu},         {"ru", r.non_mac.ru},
                            {"buffers", r.non_mac.buffers}, {"dram", r.non_mac.dram},
                            {"programming", r.non_mac.programming}};
  j["inferences_per_sec"] = r.inferences_per_sec;
  j["ops_per_inference"] = r.ops_per_inference;
  j["tops"] = r.tops;
  j["tops_per_w"] = r.tops_per_w;
  j["tops_per_mm2"] = r.tops_per_mm2;
  j["setup_energy_j"] = r.setup_energy;
  j["setup_latency_s"] = r.setup_latency;
  j["critical_stage"] = r.critical_stage;
  return j.dump(2) + "\n";
}

void write_report_csv(std::ostream& os, const CostReport& r, const std::string& label) {
  CsvWriter w(os);
  w.row({"label", "metric", "value"});
  const std::pair<const char*, double> rows[] = {
      {"energy_programming_j", r.energy.programming},
      {"energy_dram_j", r.energy.dram},
      {"energy_buffers_j", r.energy.buffers},
      {"energy_ru_sfu_j", r.energy.ru_sfu},
      {"energy_mac_ops_j", r.energy.mac_ops},
      {"energy_total_j", r.total_energy},
      {"latency_mac_ops_s", r.latency.mac_ops},
      {"latency_non_mac_ops_s", r.latency.non_mac_ops},
      {"latency_total_s", r.total_latency},
      {"latency_sfu_s", r.non_mac.sfu},
      {"latency_ru_s", r.non_mac.ru},
      {"latency_buffers_s", r.non_mac.buffers},
      {"latency_dram_s", r.non_mac.dram},
      {"latency_programming_s", r.non_mac.programming},
      {"inferences_per_sec", r.inferences_per_sec},
      {"tops", r.tops},
      {"tops_per_w", r.tops_per_w},
      {"tops_per_mm2", r.tops_per_mm2},
      {"setup_energy_j", r.setup_energy},
      {"setup_latency_s", r.setup_latency},
  };
  for (const auto& [k, v] : rows) w.row({label, k, format_number(v)});
}

}  // namespace timdnn
