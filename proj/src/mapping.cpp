#include "timdnn/mapping.hpp"

#include <algorithm>

namespace timdnn {

void AcceleratorConfig::validate() const {
  tile.validate();
  if (num_tiles <= 0) throw ConfigError("num_tiles must be positive");
  if (banks <= 0) throw ConfigError("banks must be positive");
  if (act_buffer_bytes <= 0 || psum_buffer_bytes <= 0)
    throw ConfigError("buffer capacities must be positive");
  if (sfu.relu_units <= 0 || sfu.vpe <= 0 || sfu.vpe_lanes <= 0 || sfu.spe <= 0 || sfu.qu <= 0)
    throw ConfigError("SFU unit counts must be positive");
  if (ru_width <= 0) throw ConfigError("ru_width must be positive");
  if (psum_bytes <= 0) throw ConfigError("psum_bytes must be positive");
  if (temporal_policy != "per-layer" && temporal_policy != "packed")
    throw ConfigError("temporal_policy must be 'per-layer' or 'packed'");
}

PartitionGrid partition_weights(const MatmulShape& mm, const TileConfig& tile) {
  const long R = tile.rows();
  const long N = tile.columns;
  PartitionGrid g;
  g.inner = mm.inner;
  g.cols = mm.cols;
  g.row_parts = static_cast<int>((mm.inner + R - 1) / R);
  g.col_parts = static_cast<int>((mm.cols + N - 1) / N);
  for (int i = 0; i < g.row_parts; ++i)
    g.valid_rows.push_back(static_cast<int>(std::min(R, mm.inner - i * R)));
  for (int j = 0; j < g.col_parts; ++j)
    g.valid_cols.push_back(static_cast<int>(std::min(N, mm.cols - j * N)));
  return g;
}

int partition_blocks(const PartitionGrid& grid, int row_part, const TileConfig& tile) {
  const int rows = grid.valid_rows.at(static_cast<std::size_t>(row_part));
  return (rows + tile.rows_per_block - 1) / tile.rows_per_block;
}

std::string to_string(MappingStrategy s) {
  return s == MappingStrategy::Spatial ? "spatial" : "temporal";
}

int Phase::tiles_used() const {
  int t = 0;
  for (const auto& p : placements) t += p.tiles();
  return t;
}

int MappingPlan::total_partitions() const {
  int t = 0;
  for (const auto& layer : grids)
    for (const auto& g : layer) t += g.count();
  return t;
}

long placement_block_accesses(const MappingPlan& plan, const DnnGraph& g, const Placement& p,
                              const TileConfig& tile) {
  const auto& grid = plan.grids[static_cast<std::size_t>(p.layer)][static_cast<std::size_t>(p.matmul)];
  const long rows = plan.matmuls[static_cast<std::size_t>(p.layer)][static_cast<std::size_t>(p.matmul)].rows;
  const bool recurrent = is_recurrent(g.layers[static_cast<std::size_t>(p.layer)].kind);
  long worst = 0;
  for (int q = p.first; q < p.first + p.count; ++q) {
    const long blocks = partition_blocks(grid, grid.row_of(q), tile);
    // Recurrent steps depend on each other, so replicas can only split the
    // blocks of one step; otherwise they split (vector, block) work freely.
    const long share = recurrent ? rows * ((blocks + p.replicas - 1) / p.replicas)
                                 : (rows * blocks + p.replicas - 1) / p.replicas;
    worst = std::max(worst, share);
  }
  return worst;
}

namespace {

long max_useful_replicas(const MappingPlan& plan, const DnnGraph& g, const Placement& p,
                         const TileConfig& tile) {
  const auto& grid = plan.grids[static_cast<std::size_t>(p.layer)][static_cast<std::size_t>(p.matmul)];
  const long rows = plan.matmuls[static_cast<std::size_t>(p.layer)][static_cast<std::size_t>(p.matmul)].rows;
  long blocks = 0;
  for (int q = p.first; q < p.first + p.count; ++q)
    blocks = std::max<long>(blocks, partition_blocks(grid, grid.row_of(q), tile));
  return is_recurrent(g.layers[static_cast<std::size_t>(p.layer)].kind) ? blocks : rows * blocks;
}

void replicate(Phase& phase, const MappingPlan& plan, const DnnGraph& g,
               const AcceleratorConfig& accel) {
  int free_tiles = accel.num_tiles - phase.tiles_used();
  while (true) {
    int best = -1;
    long best_work = 0;
    for (int i = 0; i < static_cast<int>(phase.placements.size()); ++i) {
      const Placement& p = phase.placements[static_cast<std::size_t>(i)];
      if (p.replicas >= max_useful_replicas(plan, g, p, accel.tile)) continue;
      const long w = placement_block_accesses(plan, g, p, accel.tile);
      if (w > best_work) {
        best_work = w;
        best = i;
      }
    }
    if (best < 0) return;
    Placement& p = phase.placements[static_cast<std::size_t>(best)];
    if (free_tiles < p.count) return;
    ++p.replicas;
    free_tiles -= p.count;
  }
}

}  // namespace

MappingPlan plan_mapping(const DnnGraph& g, const AcceleratorConfig& accel) {
  accel.validate();
  MappingPlan plan;
  plan.num_tiles = accel.num_tiles;
  plan.out_shapes = resolve_shapes(g);
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
    const int p = g.producers(i).front();
    plan.in_shapes.push_back(p == kGraphInput ? g.input : plan.out_shapes[static_cast<std::size_t>(p)]);
    const Layer& l = g.layers[static_cast<std::size_t>(i)];
    plan.matmuls.push_back(layer_matmuls(l, plan.in_shapes.back()));
    std::vector<PartitionGrid> grids;
    for (const auto& mm : plan.matmuls.back()) grids.push_back(partition_weights(mm, accel.tile));
    plan.grids.push_back(std::move(grids));
  }

  const int T = accel.num_tiles;
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
    if (!is_recurrent(g.layers[static_cast<std::size_t>(i)].kind)) continue;
    int parts = 0;
    for (const auto& grid : plan.grids[static_cast<std::size_t>(i)]) parts += grid.count();
    if (parts > T)
      throw MappingError("recurrent layer '" + g.layers[static_cast<std::size_t>(i)].name +
                         "' needs " + std::to_string(parts) + " tiles, accelerator has " +
                         std::to_string(T));
  }

  if (plan.total_partitions() <= T) {
    plan.strategy = MappingStrategy::Spatial;
    Phase phase;
    for (int i = 0; i < static_cast<int>(plan.grids.size()); ++i)
      for (int m = 0; m < static_cast<int>(plan.grids[static_cast<std::size_t>(i)].size()); ++m)
        phase.placements.push_back({i, m, 0, plan.grids[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)].count(), 1});
    if (!phase.placements.empty()) {
      replicate(phase, plan, g, accel);
      plan.phases.push_back(std::move(phase));
    }
    return plan;
  }

  plan.strategy = MappingStrategy::Temporal;
  Phase cur;
  int used = 0;
  auto close = [&] {
    if (cur.placements.empty()) return;
    replicate(cur, plan, g, accel);
    plan.phases.push_back(std::move(cur));
    cur = Phase{};
    used = 0;
  };
  for (int i = 0; i < static_cast<int>(plan.grids.size()); ++i) {
    const auto& grids = plan.grids[static_cast<std::size_t>(i)];
    if (grids.empty()) continue;
    int parts = 0;
    for (const auto& grid : grids) parts += grid.count();
    if (parts <= T) {
      // Keep a layer that fits in one phase together.
      if (accel.temporal_policy == "per-layer" || used + parts > T) close();
      for (int m = 0; m < static_cast<int>(grids.size()); ++m)
        cur.placements.push_back({i, m, 0, grids[static_cast<std::size_t>(m)].count(), 1});
      used += parts;
      continue;
    }
    // Oversized layer: chunks of at most T partitions, each in a fresh phase.
    for (int m = 0; m < static_cast<int>(grids.size()); ++m) {
      const int n = grids[static_cast<std::size_t>(m)].count();
      for (int first = 0; first < n;) {
        if (used == T || (used > 0 && first == 0)) close();
        const int take = std::min(n - first, T - used);
        cur.placements.push_back({i, m, first, take, 1});
        used += take;
        first += take;
      }
    }
  }
  close();
  return plan;
}

}  // namespace timdnn
