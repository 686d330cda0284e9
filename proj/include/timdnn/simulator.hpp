#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "timdnn/error_model.hpp"
#include "timdnn/mapping.hpp"

namespace timdnn {

/// Channel-major activations: element (c, h, w) sits at (c*H + h)*W + w.
struct Tensor {
  Shape shape;
  Eigen::ArrayXd data;
};

enum class SfuKind { Relu, Vpe, Spe, Qu };
inline constexpr int kSfuKinds = 4;
std::string to_string(SfuKind k);

/// Counted hardware events. All fields add associatively.
struct EventCounts {
  long tile_accesses = 0;        // in-memory block accesses
  long row_reads = 0;            // near-memory sequential row reads
  long row_writes = 0;           // tile programming
  double discharge_units = 0.0;  // sum over digitized columns of n + k
  long macs = 0;
  long padded_macs = 0;          // work including zero-padded rows/planes/steps
  double act_read_bytes = 0.0;
  double act_write_bytes = 0.0;
  double psum_read_bytes = 0.0;
  double psum_write_bytes = 0.0;
  double dram_read_bytes = 0.0;
  double dram_write_bytes = 0.0;
  long ru_ops = 0;
  std::array<long, kSfuKinds> sfu_ops{};
  long spills = 0;

  EventCounts& operator+=(const EventCounts& o);
};

struct LayerTrace {
  int layer = 0;
  std::string name;
  LayerKind kind = LayerKind::FC;
  int stage = 0;  // pipeline stage under spatial mapping
  EventCounts events;
  long critical_accesses = 0;   // in-memory accesses on the busiest tile
  long critical_row_reads = 0;  // near-memory row reads on the busiest tile
  long pipeline_drains = 0;     // dependent tile invocations (pipeline fills)
  int replicas = 1;
};

struct PhaseTrace {
  int index = 0;
  int tiles_used = 0;
  long row_writes = 0;
  long critical_row_writes = 0;
  double weight_bytes = 0.0;
};

struct ExecutionTrace {
  TileKind tile_kind = TileKind::InMemory;
  MappingStrategy strategy = MappingStrategy::Temporal;
  int num_tiles = 0;
  SfuConfig sfu;
  int ru_width = 64;
  int banks = 1;
  long inferences = 1;  // images, or tokens for recurrent graphs
  bool functional = false;
  std::vector<LayerTrace> layers;
  std::vector<PhaseTrace> phases;
  EventCounts io;  // graph input and output traffic
  // Digitized code occupancy (functional in-memory runs only).
  std::vector<double> pos_histogram;
  std::vector<double> neg_histogram;
  long injected_errors = 0;
  long conversions = 0;
  std::vector<AccessRecord> access_log;

  /// Events of all layers plus io, excluding programming.
  EventCounts totals() const;
  long critical_row_writes() const;
  double weight_bytes() const;
};

struct SimOptions {
  // Functional runs move data through tile models; trace-only runs count
  // events from shapes alone.
  bool functional = true;
  // Trace-only runs charge this mean n + k per valid column access.
  double assumed_discharge_per_column = 3.2;
  const SenseErrorTable* errors = nullptr;
  std::uint64_t seed = 1;
  bool keep_access_log = false;
};

struct SimResult {
  Tensor output;
  ExecutionTrace trace;
};

/// Bytes per stored activation with `bits` magnitude bits plus sign.
double activation_bytes(int bits);

/// Runs the graph on the accelerator under `plan`. Functional runs need
/// weights for every weighted layer and an integer input with
/// |x| < 2^input_bits.
SimResult simulate(const DnnGraph& g, const MappingPlan& plan, const AcceleratorConfig& accel,
                   const Tensor& input, const SimOptions& options = {});

enum class BaselineKind { IsoCapacity, IsoArea };
std::string to_string(BaselineKind k);

/// Near-memory accelerator with the same bank structure: iso-capacity keeps
/// the tile count, iso-area uses `iso_area_tiles`.
AcceleratorConfig baseline_config(const AcceleratorConfig& accel, BaselineKind kind);

/// Plans and runs the graph on the matching near-memory baseline.
SimResult simulate_baseline(const DnnGraph& g, const AcceleratorConfig& accel, BaselineKind kind,
                            const Tensor& input, const SimOptions& options = {});

}  // namespace timdnn
