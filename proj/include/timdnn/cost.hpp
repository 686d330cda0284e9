#pragma once

#include <array>
#include <span>
#include <vector>

#include "timdnn/simulator.hpp"

namespace timdnn {

struct EnergyParams {
  double wl_energy = 0.38e-12;    // per in-memory access
  double pcu_energy = 17e-12;     // per in-memory access
  double misc_energy = 0.28e-12;  // decoders, column mux, drivers
  // Per unit of n + k on one column; 9.18 pJ over 256 columns at a mean of
  // 8 discharge units per column.
  double bl_energy_unit = 9.18e-12 / (256.0 * 8.0);
  double sram_row_read_energy = 12e-12;  // one ternary row (two 6T cells) plus NMC adders
  double row_write_energy = 20e-12;      // one tile row write
  double buffer_energy_per_byte = 1.0e-12;
  double dram_energy_per_byte = 40e-12;
  double ru_op_energy = 0.05e-12;
  std::array<double, kSfuKinds> sfu_op_energy{0.02e-12, 0.1e-12, 0.5e-12, 0.05e-12};

  void validate() const;
};

struct TimingParams {
  double tim_access_latency = 2.3e-9;
  double pcu_stage_latency = 2.0e-9;
  double sram_row_read_latency = 11.8 * 2.3e-9 / 16.0;
  double row_write_latency = 2.3e-9;
  double clock_hz = 1e9;                 // SFU and RU clock
  double buffer_bandwidth = 64e9;        // bytes per second per bank
  double dram_bandwidth = 64e9;          // bytes per second

  void validate() const;
};

struct CostParams {
  EnergyParams energy;
  TimingParams timing;
  // Inferences sharing one programming pass of a temporal phase.
  double weight_reuse = 128.0;
  double power_watts = 0.9;
  double area_mm2 = 1.96;

  void validate() const;
};

struct AccessEnergy {
  double wl = 0, bl = 0, pcu = 0, misc = 0;
  double total() const { return wl + bl + pcu + misc; }
};

/// Energy of one in-memory access from its digitized column codes.
AccessEnergy access_energy(std::span<const ColumnCounts> counts, const EnergyParams& p);
/// Same, from the summed discharge units of the access.
AccessEnergy access_energy(double discharge_units, const EnergyParams& p);

struct EnergyBreakdown {
  double programming = 0, dram = 0, buffers = 0, ru_sfu = 0, mac_ops = 0;
  double total() const { return programming + dram + buffers + ru_sfu + mac_ops; }
};

struct LatencyBreakdown {
  double mac_ops = 0, non_mac_ops = 0;
  double total() const { return mac_ops + non_mac_ops; }
};

/// Components of the non-MAC time; they sum to `LatencyBreakdown::non_mac_ops`.
struct NonMacTime {
  double sfu = 0, ru = 0, buffers = 0, dram = 0, programming = 0;
  double total() const { return sfu + ru + buffers + dram + programming; }
  NonMacTime& operator+=(const NonMacTime& o);
  NonMacTime scaled(double s) const { return {sfu * s, ru * s, buffers * s, dram * s, programming * s}; }
};

/// Per-layer time in seconds over the whole trace.
struct LayerTime {
  int layer = 0;
  int stage = 0;
  double mac = 0, non_mac = 0;
};

/// Per-inference costs. Spatial plans report the steady-state pipeline beat
/// and keep one-time programming in the setup fields.
struct CostReport {
  EnergyBreakdown energy;
  LatencyBreakdown latency;
  NonMacTime non_mac;
  double total_energy = 0;
  double total_latency = 0;
  double inferences_per_sec = 0;
  double ops_per_inference = 0;
  double tops = 0;
  double tops_per_w = 0;
  double tops_per_mm2 = 0;
  double setup_energy = 0;
  double setup_latency = 0;
  int critical_stage = -1;
  std::vector<LayerTime> layers;
};

CostReport trace_cost(const ExecutionTrace& trace, const CostParams& params);

/// Peak in-memory throughput in TOPS: tiles * L * N * 2 / access latency.
double peak_performance(const AcceleratorConfig& accel, const TimingParams& t);
/// Near-memory counterpart: one row of N words per row read.
double baseline_peak_performance(const AcceleratorConfig& accel, const TimingParams& t);

struct Efficiency {
  double tops_per_w = 0;
  double tops_per_mm2 = 0;
};

Efficiency efficiency_metrics(double tops, double power_watts = 0.9, double area_mm2 = 1.96);

struct KernelPoint {
  double output_sparsity = 0;
  double tim_energy = 0;
  double baseline_energy = 0;
  double energy_ratio = 0;
};

struct KernelComparison {
  int rows_enabled = 16;
  int accesses = 1;
  double tim_latency = 0;
  double baseline_latency = 0;
  double speedup = 0;
  std::vector<KernelPoint> curve;
};

/// 16 x 256 vector-matrix kernel on an in-memory tile enabling `rows_enabled`
/// rows per access against 16 sequential near-memory row reads.
KernelComparison kernel_compare(int rows_enabled, std::span<const double> sparsity_grid,
                                const CostParams& params, int kernel_rows = 16, int columns = 256);

}  // namespace timdnn
