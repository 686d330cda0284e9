#include "timdnn/cost.hpp"

#include <algorithm>
#include <map>

namespace timdnn {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
}

void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0)) throw ConfigError(std::string(what) + " must be non-negative");
}

}  // namespace

void EnergyParams::validate() const {
  require_non_negative(wl_energy, "energy.wl");
  require_non_negative(pcu_energy, "energy.pcu");
  require_non_negative(misc_energy, "energy.misc");
  require_positive(bl_energy_unit, "energy.bl_unit");
  require_positive(sram_row_read_energy, "energy.sram_row_read");
  require_non_negative(row_write_energy, "energy.row_write");
  require_non_negative(buffer_energy_per_byte, "energy.buffer_per_byte");
  require_non_negative(dram_energy_per_byte, "energy.dram_per_byte");
  require_non_negative(ru_op_energy, "energy.ru_op");
  for (double e : sfu_op_energy) require_non_negative(e, "energy.sfu_op");
}

void TimingParams::validate() const {
  require_positive(tim_access_latency, "timing.tim_access_latency");
  require_positive(pcu_stage_latency, "timing.pcu_stage_latency");
  require_positive(sram_row_read_latency, "timing.sram_row_read_latency");
  require_positive(row_write_latency, "timing.row_write_latency");
  require_positive(clock_hz, "timing.clock_hz");
  require_positive(buffer_bandwidth, "timing.buffer_bandwidth");
  require_positive(dram_bandwidth, "timing.dram_bandwidth");
}

void CostParams::validate() const {
  energy.validate();
  timing.validate();
  if (!(weight_reuse >= 1.0)) throw ConfigError("weight_reuse must be at least 1");
  require_positive(power_watts, "power_watts");
  require_positive(area_mm2, "area_mm2");
}

AccessEnergy access_energy(double discharge_units, const EnergyParams& p) {
  return {p.wl_energy, p.bl_energy_unit * discharge_units, p.pcu_energy, p.misc_energy};
}

AccessEnergy access_energy(std::span<const ColumnCounts> counts, const EnergyParams& p) {
  double units = 0;
  for (const auto& c : counts) units += c.pos + c.neg;
  return access_energy(units, p);
}

double peak_performance(const AcceleratorConfig& accel, const TimingParams& t) {
  const double ops = 2.0 * accel.num_tiles * accel.tile.rows_per_block * accel.tile.columns;
  return ops / t.tim_access_latency / 1e12;
}

double baseline_peak_performance(const AcceleratorConfig& accel, const TimingParams& t) {
  return 2.0 * accel.num_tiles * accel.tile.columns / t.sram_row_read_latency / 1e12;
}

Efficiency efficiency_metrics(double tops, double power_watts, double area_mm2) {
  require_positive(power_watts, "power");
  require_positive(area_mm2, "area");
  return {tops / power_watts, tops / area_mm2};
}

NonMacTime& NonMacTime::operator+=(const NonMacTime& o) {
  sfu += o.sfu;
  ru += o.ru;
  buffers += o.buffers;
  dram += o.dram;
  programming += o.programming;
  return *this;
}

namespace {

struct LayerCost {
  double mac_time = 0;
  NonMacTime non_mac;
  EnergyBreakdown energy;
};

double sfu_time(const EventCounts& e, const SfuConfig& sfu, const TimingParams& t) {
  const double per_cycle[kSfuKinds] = {static_cast<double>(sfu.relu_units),
                                       static_cast<double>(sfu.vpe * sfu.vpe_lanes),
                                       static_cast<double>(sfu.spe), static_cast<double>(sfu.qu)};
  double cycles = 0;
  for (int k = 0; k < kSfuKinds; ++k)
    cycles += static_cast<double>(e.sfu_ops[static_cast<std::size_t>(k)]) / per_cycle[k];
  return cycles / t.clock_hz;
}

// Time and energy of the events every trace shares (everything except the
// tile work itself).
LayerCost common_cost(const EventCounts& e, const AcceleratorConfig& accel, const CostParams& p) {
  const auto& t = p.timing;
  const auto& en = p.energy;
  LayerCost c;
  const double buffer_bytes = e.act_read_bytes + e.act_write_bytes + e.psum_read_bytes + e.psum_write_bytes;
  const double dram_bytes = e.dram_read_bytes + e.dram_write_bytes;
  const double banks = accel.banks;
  c.non_mac.sfu = sfu_time(e, accel.sfu, t) / banks;
  c.non_mac.ru = static_cast<double>(e.ru_ops) / (accel.ru_width * banks * t.clock_hz);
  c.non_mac.buffers = buffer_bytes / (t.buffer_bandwidth * banks);
  c.non_mac.dram = dram_bytes / t.dram_bandwidth;
  c.energy.buffers = buffer_bytes * en.buffer_energy_per_byte;
  c.energy.dram = dram_bytes * en.dram_energy_per_byte;
  c.energy.ru_sfu = static_cast<double>(e.ru_ops) * en.ru_op_energy;
  for (int k = 0; k < kSfuKinds; ++k)
    c.energy.ru_sfu += static_cast<double>(e.sfu_ops[static_cast<std::size_t>(k)]) *
                       en.sfu_op_energy[static_cast<std::size_t>(k)];
  return c;
}

LayerCost layer_cost(const LayerTrace& lt, const ExecutionTrace& tr, const AcceleratorConfig& accel,
                     const CostParams& p) {
  LayerCost c = common_cost(lt.events, accel, p);
  const auto& t = p.timing;
  const auto& en = p.energy;
  if (tr.tile_kind == TileKind::InMemory) {
    if (lt.critical_accesses > 0) {
      const double beat = std::max(t.tim_access_latency, t.pcu_stage_latency);
      const double fill = std::min(t.tim_access_latency, t.pcu_stage_latency);
      c.mac_time = static_cast<double>(lt.critical_accesses) * beat +
                   static_cast<double>(lt.pipeline_drains) * fill;
    }
    const auto fixed = access_energy(0.0, en);
    c.energy.mac_ops = static_cast<double>(lt.events.tile_accesses) * fixed.total() +
                       lt.events.discharge_units * en.bl_energy_unit;
  } else {
    c.mac_time = static_cast<double>(lt.critical_row_reads) * t.sram_row_read_latency;
    c.energy.mac_ops = static_cast<double>(lt.events.row_reads) * en.sram_row_read_energy;
  }
  return c;
}

void add(EnergyBreakdown& a, const EnergyBreakdown& b, double scale = 1.0) {
  a.programming += b.programming * scale;
  a.dram += b.dram * scale;
  a.buffers += b.buffers * scale;
  a.ru_sfu += b.ru_sfu * scale;
  a.mac_ops += b.mac_ops * scale;
}

}  // namespace

CostReport trace_cost(const ExecutionTrace& trace, const CostParams& params) {
  params.validate();
  CostReport r;
  if (trace.layers.empty() && trace.phases.empty() && trace.io.dram_read_bytes == 0 &&
      trace.io.dram_write_bytes == 0)
    return r;

  AcceleratorConfig accel;
  accel.num_tiles = trace.num_tiles;
  accel.tile_kind = trace.tile_kind;
  accel.sfu = trace.sfu;
  accel.ru_width = trace.ru_width;
  accel.banks = trace.banks;
  const auto& t = params.timing;
  const auto& en = params.energy;
  const double inf = static_cast<double>(std::max<long>(trace.inferences, 1));

  // Programming: every phase writes its tiles in parallel and streams its
  // weights from DRAM.
  EnergyBreakdown prog;
  double prog_time = 0;
  long macs = 0;
  for (const auto& ph : trace.phases) {
    prog.programming += static_cast<double>(ph.row_writes) * en.row_write_energy;
    prog.dram += ph.weight_bytes * en.dram_energy_per_byte;
    prog_time += static_cast<double>(ph.critical_row_writes) * t.row_write_latency +
                 ph.weight_bytes / t.dram_bandwidth;
  }

  struct Stage {
    double mac = 0;
    NonMacTime non_mac;
    double total() const { return mac + non_mac.total(); }
  };
  std::map<int, Stage> stages;
  EnergyBreakdown run;
  for (const auto& lt : trace.layers) {
    const LayerCost c = layer_cost(lt, trace, accel, params);
    add(run, c.energy);
    r.layers.push_back({lt.layer, lt.stage, c.mac_time, c.non_mac.total()});
    stages[lt.stage].mac += c.mac_time;
    stages[lt.stage].non_mac += c.non_mac;
    macs += lt.events.macs;
  }
  const LayerCost io = common_cost(trace.io, accel, params);
  add(run, io.energy);

  if (trace.strategy == MappingStrategy::Spatial) {
    // Layer-wise pipeline: the slowest stage sets the beat. Graph input and
    // output traffic ride on the first and last stages.
    if (!stages.empty()) {
      stages.begin()->second.non_mac += io.non_mac.scaled(0.5);
      stages.rbegin()->second.non_mac += io.non_mac.scaled(0.5);
    }
    double worst = -1;
    for (const auto& [s, st] : stages)
      if (st.total() > worst) {
        worst = st.total();
        r.critical_stage = s;
        r.non_mac = st.non_mac.scaled(1.0 / inf);
        r.latency = {st.mac / inf, r.non_mac.total()};
      }
    add(r.energy, run, 1.0 / inf);
    r.setup_energy = prog.total();
    r.setup_latency = prog_time;
  } else {
    double mac = 0;
    NonMacTime non_mac = io.non_mac;
    for (const auto& [s, st] : stages) {
      mac += st.mac;
      non_mac += st.non_mac;
    }
    non_mac.programming += prog_time / params.weight_reuse;
    r.non_mac = non_mac.scaled(1.0 / inf);
    r.latency = {mac / inf, r.non_mac.total()};
    add(r.energy, run, 1.0 / inf);
    add(r.energy, prog, 1.0 / (inf * params.weight_reuse));
  }

  r.total_energy = r.energy.total();
  r.total_latency = r.latency.total();
  r.ops_per_inference = 2.0 * static_cast<double>(macs) / inf;
  if (r.total_latency > 0) {
    r.inferences_per_sec = 1.0 / r.total_latency;
    r.tops = r.ops_per_inference / r.total_latency / 1e12;
    const Efficiency e = efficiency_metrics(r.tops, params.power_watts, params.area_mm2);
    r.tops_per_w = e.tops_per_w;
    r.tops_per_mm2 = e.tops_per_mm2;
  }
  return r;
}

KernelComparison kernel_compare(int rows_enabled, std::span<const double> sparsity_grid,
                                const CostParams& params, int kernel_rows, int columns) {
  params.validate();
  if (rows_enabled <= 0 || kernel_rows % rows_enabled != 0)
    throw ConfigError("rows_enabled must divide the kernel rows");
  const auto& t = params.timing;
  const auto& en = params.energy;
  KernelComparison k;
  k.rows_enabled = rows_enabled;
  k.accesses = kernel_rows / rows_enabled;
  k.tim_latency = k.accesses * t.tim_access_latency;
  k.baseline_latency = kernel_rows * t.sram_row_read_latency;
  k.speedup = k.baseline_latency / k.tim_latency;
  for (double s : sparsity_grid) {
    if (s < 0.0 || s > 1.0) throw ConfigError("output sparsity must lie in [0, 1]");
    KernelPoint pt;
    pt.output_sparsity = s;
    // Non-zero scalar outputs per column spread over the accesses.
    const double units = static_cast<double>(columns) * kernel_rows * (1.0 - s);
    pt.tim_energy = k.accesses * access_energy(0.0, en).total() + units * en.bl_energy_unit;
    pt.baseline_energy = kernel_rows * en.sram_row_read_energy;
    pt.energy_ratio = pt.baseline_energy / pt.tim_energy;
    k.curve.push_back(pt);
  }
  return k;
}

}  // namespace timdnn
