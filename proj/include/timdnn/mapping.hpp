#pragma once

#include <string>
#include <vector>

#include "timdnn/graph.hpp"
#include "timdnn/tile.hpp"

namespace timdnn {

struct SfuConfig {
  int relu_units = 64;
  int vpe = 8;
  int vpe_lanes = 4;
  int spe = 20;
  int qu = 32;
};

/// Tiles either compute in memory (one block per access) or read rows one at
/// a time into near-memory adders.
enum class TileKind { InMemory, NearMemory };

struct AcceleratorConfig {
  int num_tiles = 32;
  // Each bank has its own activation/psum buffers, RU and SFU; the capacities
  // and unit counts below are per bank.
  int banks = 8;
  TileConfig tile;
  TileKind tile_kind = TileKind::InMemory;
  long act_buffer_bytes = 64 * 1024;
  long psum_buffer_bytes = 32 * 1024;
  SfuConfig sfu;
  int ru_width = 64;  // partial-sum additions per cycle
  int iso_area_tiles = 60;  // near-memory tiles fitting in the same area
  int psum_bytes = 2;       // partial-sum word width
  // Temporal mapping: "per-layer" gives each weighted layer all tiles in its
  // own phase(s); "packed" fills phases with consecutive layers.
  std::string temporal_policy = "per-layer";

  /// Ternary words storable across all tiles.
  long twc() const { return static_cast<long>(num_tiles) * tile.capacity_words(); }
  void validate() const;
};

/// Tile-sized pieces of one weight matrix. Partition (i, j) covers inner rows
/// [i*R, i*R + valid_rows[i]) and columns [j*N, j*N + valid_cols[j]) where R
/// is the tile row count; the rest of the tile is zero padded.
struct PartitionGrid {
  long inner = 0;
  long cols = 0;
  int row_parts = 0;
  int col_parts = 0;
  std::vector<int> valid_rows;
  std::vector<int> valid_cols;

  int count() const { return row_parts * col_parts; }
  int row_of(int p) const { return p / col_parts; }
  int col_of(int p) const { return p % col_parts; }
};

PartitionGrid partition_weights(const MatmulShape& mm, const TileConfig& tile);

/// Blocks a partition row occupies (ceil(valid rows / rows_per_block)).
int partition_blocks(const PartitionGrid& grid, int row_part, const TileConfig& tile);

enum class MappingStrategy { Spatial, Temporal };
std::string to_string(MappingStrategy s);

/// Partitions [first, first + count) of one matmul, each held by `replicas`
/// tiles.
struct Placement {
  int layer = 0;
  int matmul = 0;
  int first = 0;
  int count = 0;
  int replicas = 1;

  int tiles() const { return count * replicas; }
};

struct Phase {
  std::vector<Placement> placements;

  int tiles_used() const;
};

struct MappingPlan {
  MappingStrategy strategy = MappingStrategy::Temporal;
  int num_tiles = 0;
  std::vector<Shape> in_shapes;                    // per layer
  std::vector<Shape> out_shapes;                   // per layer
  std::vector<std::vector<MatmulShape>> matmuls;   // per layer
  std::vector<std::vector<PartitionGrid>> grids;   // per layer, per matmul
  std::vector<Phase> phases;

  int total_partitions() const;
};

/// Work per tile of a placement in block accesses (before bit planes and
/// polarity steps): the largest ceil share over its partitions.
long placement_block_accesses(const MappingPlan& plan, const DnnGraph& g, const Placement& p,
                              const TileConfig& tile);

/// Spatial when every partition fits at once, otherwise greedy temporal
/// phases in layer order. Idle tiles in a phase receive whole replicas of the
/// busiest placement while they last. Throws MappingError for recurrent
/// layers larger than the accelerator.
MappingPlan plan_mapping(const DnnGraph& g, const AcceleratorConfig& accel);

}  // namespace timdnn
