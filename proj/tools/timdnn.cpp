// timdnn: command-line driver for the ternary in-memory accelerator model.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "timdnn/cost.hpp"
#include "timdnn/error_model.hpp"
#include "timdnn/io.hpp"
#include "timdnn/simulator.hpp"
#include "timdnn/validate.hpp"

namespace fs = std::filesystem;
using namespace timdnn;

namespace {

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kMapping = 3, kViolation = 4 };

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  int workers = 1;
};

SystemConfig build_config(const Common& c) {
  SystemConfig cfg = c.config.empty() ? SystemConfig{} : load_config(c.config);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("TIMDNN_OUT_DIR")) return env;
  return "out";
}

// Collects outputs in memory so failures leave nothing half-written.
class Outputs {
 public:
  std::ostringstream& open(const std::string& name) { return files_[name]; }
  void flush(const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& [name, ss] : files_) {
      std::ofstream f(dir / name, std::ios::binary);
      f << ss.str();
    }
  }

 private:
  std::map<std::string, std::ostringstream> files_;
};

Tensor random_input(const DnnGraph& g, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0xfeed);
  const int lim = (1 << g.input_bits) - 1;
  std::uniform_int_distribution<int> d(-lim, lim);
  Tensor t{g.input, Eigen::ArrayXd(g.input.size())};
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data(i) = d(rng);
  return t;
}

// ------------------------------------------------------------------ run

struct RunArgs {
  Common common;
  std::string workload;
  std::string workload_dir = TIMDNN_WORKLOAD_DIR;
  std::string baseline = "none";
  bool functional = false;
  bool errors = false;
  bool access_log = false;
};

int cmd_run(const RunArgs& a) {
  const SystemConfig cfg = build_config(a.common);
  DnnGraph g = load_workload(a.workload, a.workload_dir);
  const MappingPlan plan = plan_mapping(g, cfg.accel);

  SimOptions opt;
  opt.functional = a.functional;
  opt.seed = a.common.seed;
  opt.assumed_discharge_per_column = cfg.assumed_discharge_per_column;
  opt.keep_access_log = a.access_log && a.functional;
  SenseErrorTable table;
  if (a.errors) {
    if (!a.functional) throw ConfigError("--errors needs --functional");
    ErrorTableOptions eo;
    eo.samples_per_state = cfg.mc_samples;
    eo.seed = a.common.seed;
    eo.workers = a.common.workers;
    table = build_error_table(cfg.voltage_model(), cfg.accel.tile.adc_max, eo);
    opt.errors = &table;
  }
  Tensor input;
  if (a.functional) {
    generate_weights(g, a.common.seed);
    input = random_input(g, a.common.seed);
  }

  Outputs out;
  out.open("params.json") << config_to_json(cfg);
  const std::string stem = g.name;
  struct Row {
    std::string label;
    CostReport report;
  };
  std::vector<Row> rows;
  auto emit = [&](const std::string& label, const SimResult& res) {
    const CostReport r = trace_cost(res.trace, cfg.cost);
    out.open(stem + "_" + label + "_report.json") << report_to_json(r, res.trace, label);
    write_report_csv(out.open(stem + "_" + label + "_report.csv"), r, label);
    out.open(stem + "_" + label + "_trace.json") << trace_summary_json(res.trace);
    rows.push_back({label, r});
    return r;
  };

  const SimResult tim = simulate(g, plan, cfg.accel, input, opt);
  emit("tim", tim);
  if (a.errors) {
    CsvWriter w(out.open(stem + "_errors.csv"));
    w.row({"metric", "value"});
    w.row({"injected_errors", std::to_string(tim.trace.injected_errors)});
    w.row({"conversions", std::to_string(tim.trace.conversions)});
    const double rate = tim.trace.conversions
                            ? static_cast<double>(tim.trace.injected_errors) / tim.trace.conversions
                            : 0.0;
    w.row({"observed_rate", format_number(rate)});
    std::vector<double> h = tim.trace.pos_histogram;
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += tim.trace.neg_histogram[i];
    w.row({"predicted_rate", format_number(error_probability(table, occupancy_from_histogram(h)))});
  }
  if (opt.keep_access_log) {
    CsvWriter w(out.open(stem + "_accesses.csv"));
    w.row({"access", "block", "plane", "step", "column", "n", "k"});
    for (std::size_t i = 0; i < tim.trace.access_log.size(); ++i) {
      const auto& rec = tim.trace.access_log[i];
      for (std::size_t c = 0; c < rec.counts.size(); ++c)
        w.row({std::to_string(i), std::to_string(rec.block), std::to_string(rec.plane),
               std::to_string(rec.step), std::to_string(c), std::to_string(rec.counts[c].pos),
               std::to_string(rec.counts[c].neg)});
    }
  }

  std::vector<BaselineKind> kinds;
  if (a.baseline == "iso-capacity" || a.baseline == "both") kinds.push_back(BaselineKind::IsoCapacity);
  if (a.baseline == "iso-area" || a.baseline == "both") kinds.push_back(BaselineKind::IsoArea);
  for (BaselineKind k : kinds) emit(to_string(k), simulate_baseline(g, cfg.accel, k, input, opt));

  CsvWriter w(out.open(stem + "_summary.csv"));
  w.row({"design", "inferences_per_sec", "latency_s", "energy_j", "speedup_vs_design",
         "energy_improvement_vs_design"});
  const CostReport& ref = rows.front().report;
  for (const auto& r : rows)
    w.row({r.label, format_number(r.report.inferences_per_sec), format_number(r.report.total_latency),
           format_number(r.report.total_energy),
           format_number(r.report.total_latency / ref.total_latency),
           format_number(r.report.total_energy / ref.total_energy)});

  out.flush(out_dir(a.common));
  for (const auto& r : rows)
    std::cout << r.label << ": " << format_number(r.report.inferences_per_sec) << " inf/s, "
              << format_number(r.report.total_energy) << " J/inf\n";
  return kOk;
}

// ------------------------------------------------------------------- mc

struct McArgs {
  Common common;
  double sigma_mv = -1;
  int samples = -1;
  std::string trace;
  bool lenient = false;
  long synthetic_columns = 1000000;
};

StateOccupancy occupancy_from_trace(const std::string& path, int adc_max) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read trace " + path);
  if (fs::path(path).extension() == ".json") {
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("pos_histogram"))
      throw ConfigError("trace " + path + " has no pos_histogram");
    std::vector<double> h = j["pos_histogram"].get<std::vector<double>>();
    if (j.contains("neg_histogram")) {
      const auto neg = j["neg_histogram"].get<std::vector<double>>();
      for (std::size_t i = 0; i < h.size() && i < neg.size(); ++i) h[i] += neg[i];
    }
    if (static_cast<int>(h.size()) != adc_max + 1) throw ConfigError("trace histogram size mismatch");
    return occupancy_from_histogram(h);
  }
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<ColumnCounts> counts;
  std::vector<double> hist(static_cast<std::size_t>(adc_max) + 1, 0.0);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("trace line '" + line + "' needs two fields");
    const int a = std::stoi(line.substr(0, comma));
    if (header == "n,k") {
      counts.push_back({a, std::stoi(line.substr(comma + 1))});
    } else if (header == "n,value") {
      if (a < 0 || a > adc_max) throw ConfigError("trace state out of range");
      hist[static_cast<std::size_t>(a)] = std::stod(line.substr(comma + 1));
    } else {
      throw ConfigError("trace CSV header must be 'n,k' or 'n,value'");
    }
  }
  if (header == "n,k") return state_occupancy(counts, adc_max, CountSide::Both);
  return occupancy_from_histogram(hist);
}

int cmd_mc(const McArgs& a) {
  SystemConfig cfg = build_config(a.common);
  if (a.samples >= 0) cfg.mc_samples = a.samples;
  if (cfg.mc_samples < 1000) throw ConfigError("--samples must be at least 1000 per state");
  if (a.sigma_mv >= 0) cfg.bitline.sigma = a.sigma_mv * 1e-3;
  const BitlineVoltageModel model = cfg.voltage_model();
  const int adc_max = cfg.accel.tile.adc_max;

  ErrorTableOptions eo;
  eo.samples_per_state = cfg.mc_samples;
  eo.seed = a.common.seed;
  eo.workers = a.common.workers;
  eo.strict_adjacency = !a.lenient;
  const SenseErrorTable table = build_error_table(model, adc_max, eo);

  Outputs out;
  out.open("params.json") << config_to_json(cfg);
  {
    CsvWriter w(out.open("error_table.csv"));
    w.row({"n", "p_error", "p_up"});
    for (int n = 0; n <= adc_max; ++n)
      w.row({std::to_string(n), format_number(table.p_error[static_cast<std::size_t>(n)]),
             format_number(table.p_up[static_cast<std::size_t>(n)])});
  }
  {
    // Voltage histograms per state; the same streams as the table.
    CsvWriter w(out.open("voltage_histograms.csv"));
    w.row({"state", "bin_low_v", "bin_high_v", "count"});
    const double lo = model.nominal(BitlineVoltageModel::kMaxState) - 0.1;
    const double hi = model.supply + 0.05;
    const double bin = 0.004;
    const int bins = static_cast<int>(std::ceil((hi - lo) / bin));
    for (int n = 0; n <= adc_max; ++n) {
      Rng rng = make_stream(eo.seed, static_cast<std::uint64_t>(n));
      const auto s = sample_state(model, n, adc_max, eo.samples_per_state, rng);
      std::vector<long> h(static_cast<std::size_t>(bins), 0);
      for (double v : s.volts) {
        const int b = std::clamp(static_cast<int>((v - lo) / bin), 0, bins - 1);
        ++h[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < bins; ++b)
        if (h[static_cast<std::size_t>(b)] > 0)
          w.row({std::to_string(n), format_number(lo + b * bin), format_number(lo + (b + 1) * bin),
                 std::to_string(h[static_cast<std::size_t>(b)])});
    }
  }
  StateOccupancy occ;
  std::string source;
  if (!a.trace.empty()) {
    occ = occupancy_from_trace(a.trace, adc_max);
    source = a.trace;
  } else {
    Rng rng = make_stream(a.common.seed, 0x5eed);
    const auto counts = synthetic_dnn_counts(a.synthetic_columns, cfg.accel.tile.rows_per_block,
                                             adc_max, rng);
    occ = state_occupancy(counts, adc_max, CountSide::Both);
    source = "synthetic";
  }
  {
    CsvWriter w(out.open("occupancy.csv"));
    w.row({"n", "value"});
    for (int n = 0; n <= adc_max; ++n)
      w.row({std::to_string(n), format_number(occ.p[static_cast<std::size_t>(n)])});
  }
  const double pe = error_probability(table, occ);
  {
    CsvWriter w(out.open("error_probability.csv"));
    w.row({"occupancy_source", "sigma_v", "samples_per_state", "p_e"});
    w.row({source, format_number(model.sigma), std::to_string(eo.samples_per_state), format_number(pe)});
  }
  out.flush(out_dir(a.common));
  std::cout << "P_E = " << format_number(pe) << " (occupancy: " << source << ")\n";
  return kOk;
}

// --------------------------------------------------------------- kernel

int cmd_kernel(const Common& c, int steps) {
  const SystemConfig cfg = build_config(c);
  std::vector<double> grid;
  for (int i = 0; i <= steps; ++i) grid.push_back(static_cast<double>(i) / steps);
  Outputs out;
  out.open("params.json") << config_to_json(cfg);
  CsvWriter w(out.open("kernel.csv"));
  w.row({"design", "accesses", "speedup", "output_sparsity", "tim_energy_j", "baseline_energy_j",
         "energy_ratio"});
  for (int rows : {8, 16}) {
    const KernelComparison k = kernel_compare(rows, grid, cfg.cost);
    for (const auto& p : k.curve)
      w.row({"TiM-" + std::to_string(rows), std::to_string(k.accesses), format_number(k.speedup),
             format_number(p.output_sparsity), format_number(p.tim_energy),
             format_number(p.baseline_energy), format_number(p.energy_ratio)});
    std::cout << "TiM-" << rows << ": speedup " << format_number(k.speedup) << "x\n";
  }
  out.flush(out_dir(c));
  return kOk;
}

// ------------------------------------------------------------- validate

int cmd_validate(const ValidateOptions& o) {
  bool ok = true;
  for (const auto& r : run_validation(o)) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.cases << " cases)";
    if (!r.pass)
      std::cout << " counterexample seed=" << o.seed << " case=" << r.failing_case << ": " << r.detail;
    std::cout << "\n";
    ok = ok && r.pass;
  }
  return ok ? kOk : kFail;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "params JSON file");
  sub->add_option("--out", c.out, "output directory (default $TIMDNN_OUT_DIR or ./out)");
  sub->add_option("--set", c.overrides, "dotted key=value override")->take_all();
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--workers", c.workers, "parallel workers")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ternary in-memory DNN accelerator simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate a workload and report costs");
  add_common(run_cmd, run.common);
  run_cmd->add_option("--workload", run.workload, "workload name or descriptor path")->required();
  run_cmd->add_option("--workload-dir", run.workload_dir, "directory of named workloads");
  run_cmd->add_option("--baseline", run.baseline, "near-memory baselines to run")
      ->check(CLI::IsMember({"none", "iso-capacity", "iso-area", "both"}));
  run_cmd->add_flag("--functional", run.functional, "move data through the tile models");
  run_cmd->add_flag("--errors", run.errors, "inject sensing errors (functional runs)");
  run_cmd->add_flag("--access-log", run.access_log, "write per-access column counts");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo sensing-error study");
  add_common(mc_cmd, mc.common);
  mc_cmd->add_option("--sigma-mv", mc.sigma_mv, "bitline noise sigma in mV");
  mc_cmd->add_option("--samples", mc.samples, "samples per state (>= 1000)");
  mc_cmd->add_option("--trace", mc.trace, "occupancy source: trace JSON or CSV (n,k or n,value)");
  mc_cmd->add_flag("--lenient", mc.lenient, "count multi-code errors instead of failing");

  Common kc;
  int steps = 10;
  auto* k_cmd = app.add_subcommand("kernel", "16x256 kernel comparison");
  add_common(k_cmd, kc);
  k_cmd->add_option("--sparsity-steps", steps, "grid points over [0, 1]")->check(CLI::PositiveNumber);

  ValidateOptions vo;
  auto* v_cmd = app.add_subcommand("validate", "oracle equivalence suites");
  v_cmd->add_option("--cases", vo.cases, "cases per suite")->check(CLI::PositiveNumber);
  v_cmd->add_option("--seed", vo.seed, "random seed");
  v_cmd->add_flag("--inject-fault", vo.inject_fault, "corrupt one ADC code (harness self-check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*mc_cmd) return cmd_mc(mc);
    if (*k_cmd) return cmd_kernel(kc, steps);
    if (*v_cmd) return cmd_validate(vo);
  } catch (const ModelViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const MappingError& e) {
    std::cerr << "mapping error: " << e.what() << "\n";
    return kMapping;
  } catch (const std::invalid_argument& e) {  // config, shape and input errors
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
