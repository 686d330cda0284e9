#include "timdnn/tile.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace timdnn {

void TileConfig::validate() const {
  if (rows_per_block <= 0 || blocks <= 0 || columns <= 0 || pcus <= 0)
    throw ConfigError("tile dimensions must be positive");
  if (pcus >= columns || columns % pcus != 0)
    throw ConfigError("tile requires pcus < columns and columns % pcus == 0");
  // 11 distinguishable bitline states at most.
  if (adc_max < 1 || adc_max > 10) throw ConfigError("tile adc_max must lie in [1, 10]");
}

TpcArray::TpcArray(const TileConfig& config) : config_(config) {
  config_.validate();
  cells_ = TritMatrix::Zero(config_.rows(), config_.columns);
}

void TpcArray::check_block(int block) const {
  if (block < 0 || block >= config_.blocks)
    throw AddressError("block " + std::to_string(block) + " outside [0, " +
                       std::to_string(config_.blocks) + ")");
}

void TpcArray::write_row(int block, int row, const TritVector& words) {
  check_block(block);
  if (row < 0 || row >= config_.rows_per_block)
    throw AddressError("row " + std::to_string(row) + " outside block");
  if (words.size() != config_.columns)
    throw AddressError("row write needs " + std::to_string(config_.columns) + " words");
  if ((words.array().abs() > 1).any()) throw InputError("row write: words must be trits");
  cells_.row(static_cast<Eigen::Index>(block) * config_.rows_per_block + row) = words.transpose();
  ++row_writes_;
}

TritVector TpcArray::read_row(int block, int row) const {
  check_block(block);
  if (row < 0 || row >= config_.rows_per_block) throw AddressError("row outside block");
  return cells_.row(static_cast<Eigen::Index>(block) * config_.rows_per_block + row).transpose();
}

Trit TpcArray::cell(int block, int row, int column) const {
  check_block(block);
  if (row < 0 || row >= config_.rows_per_block || column < 0 || column >= config_.columns)
    throw AddressError("cell address out of range");
  return static_cast<Trit>(cells_(static_cast<Eigen::Index>(block) * config_.rows_per_block + row,
                                  column));
}

long TpcArray::load(const TritMatrix& weights) {
  if (weights.rows() > config_.rows() || weights.cols() > config_.columns)
    throw ShapeError("weight matrix larger than tile");
  long writes = 0;
  TritVector row(config_.columns);
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    row.setZero();
    row.head(weights.cols()) = weights.row(r).transpose();
    write_row(static_cast<int>(r / config_.rows_per_block),
              static_cast<int>(r % config_.rows_per_block), row);
    ++writes;
  }
  return writes;
}

std::vector<ColumnCounts> raw_block_counts(const TpcArray& arr, int block, const TritVector& inp) {
  const TileConfig& cfg = arr.config();
  if (inp.size() != cfg.rows_per_block)
    throw ShapeError("block access needs " + std::to_string(cfg.rows_per_block) + " inputs");
  const auto cells = arr.block_cells(block);
  const Eigen::Array<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> prod =
      cells.array().colwise() * inp.array();
  const auto pos = (prod == 1).colwise().count().eval();
  const auto neg = (prod == -1).colwise().count().eval();
  std::vector<ColumnCounts> out(static_cast<std::size_t>(cfg.columns));
  for (int c = 0; c < cfg.columns; ++c)
    out[static_cast<std::size_t>(c)] = {static_cast<int>(pos(c)), static_cast<int>(neg(c))};
  return out;
}

std::vector<ColumnCounts> block_counts(const TpcArray& arr, int block, const TritVector& inp,
                                       int adc_max) {
  auto counts = raw_block_counts(arr, block, inp);
  for (auto& c : counts) {
    c.pos = std::min(c.pos, adc_max);
    c.neg = std::min(c.neg, adc_max);
  }
  return counts;
}

namespace {

// One array access: clip, perturb, record.
std::vector<ColumnCounts> access(const TpcArray& arr, int block, const TritVector& drive,
                                 const AccessHooks& hooks, int plane, int step) {
  auto counts = block_counts(arr, block, drive, arr.config().adc_max);
  if (hooks.perturb) hooks.perturb(counts);
  if (hooks.stats) {
    ++hooks.stats->access_count;
    if (hooks.stats->keep_records) hooks.stats->records.push_back({block, plane, step, counts});
    hooks.stats->digitization_rounds += arr.config().digitization_rounds();
  }
  return counts;
}

TritVector mask_polarity(const TritVector& inp, Trit polarity) {
  const auto p = static_cast<std::int8_t>(polarity);
  return (inp.array() == p).cast<std::int8_t>().matrix();
}

// PCU scaling of one access: scale * (W1*n - W2*k).
void accumulate(Eigen::VectorXd& out, const std::vector<ColumnCounts>& counts, double scale,
                const TernarySystem& sys) {
  for (std::size_t c = 0; c < counts.size(); ++c)
    out(static_cast<Eigen::Index>(c)) +=
        scale * (sys.pos_weight * counts[c].pos - sys.neg_weight * counts[c].neg);
}

void weighted_into(Eigen::VectorXd& out, const TpcArray& arr, int block, const TritVector& inp,
                   const TernarySystem& sys, double plane_weight, int plane,
                   const AccessHooks& hooks) {
  if (sys.two_step()) {
    for (Step s : {Step::One, Step::Two}) {
      const StepScale sc = asymmetric_step_scale(s, sys);
      const auto counts = access(arr, block, mask_polarity(inp, sc.polarity), hooks, plane,
                                 s == Step::One ? 0 : 1);
      accumulate(out, counts, plane_weight * sc.input_scale, sys);
    }
  } else {
    const auto counts = access(arr, block, inp, hooks, plane, 0);
    accumulate(out, counts, plane_weight * sys.pos_input, sys);
  }
}

void check_bits(const Eigen::VectorXi& acts, int bits) {
  if (bits < 1 || bits > 30) throw InputError("activation bits must lie in [1, 30]");
  const long limit = 1L << bits;
  for (Eigen::Index i = 0; i < acts.size(); ++i)
    if (std::labs(acts(i)) >= limit)
      throw InputError("activation " + std::to_string(acts(i)) + " overflows " +
                       std::to_string(bits) + " magnitude bits");
}

}  // namespace

Eigen::VectorXi matvec_unweighted(const TpcArray& arr, int block, const TritVector& inp,
                                  const AccessHooks& hooks) {
  const auto counts = access(arr, block, inp, hooks, 0, 0);
  Eigen::VectorXi out(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t c = 0; c < counts.size(); ++c)
    out(static_cast<Eigen::Index>(c)) = counts[c].pos - counts[c].neg;
  return out;
}

StepScale asymmetric_step_scale(Step step, const TernarySystem& sys) {
  if (step == Step::One) return {sys.pos_input, Trit::Pos};
  return {-sys.neg_input, Trit::Neg};
}

Eigen::VectorXd matvec_weighted(const TpcArray& arr, int block, const TritVector& inp,
                                const TernarySystem& sys, const AccessHooks& hooks) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(arr.config().columns);
  weighted_into(out, arr, block, inp, sys, 1.0, 0, hooks);
  return out;
}

TritVector bit_plane(const Eigen::VectorXi& acts, int plane) {
  TritVector t(acts.size());
  for (Eigen::Index i = 0; i < acts.size(); ++i) {
    const int a = acts(i);
    const bool bit = ((std::abs(a) >> plane) & 1) != 0;
    t(i) = bit ? static_cast<std::int8_t>(a > 0 ? 1 : -1) : std::int8_t{0};
  }
  return t;
}

Eigen::VectorXd matvec_bitserial(const TpcArray& arr, int block, const Eigen::VectorXi& acts,
                                 int bits, const TernarySystem& sys, const AccessHooks& hooks) {
  check_bits(acts, bits);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(arr.config().columns);
  for (int p = 0; p < bits; ++p)
    weighted_into(out, arr, block, bit_plane(acts, p), sys, static_cast<double>(1L << p), p,
                  hooks);
  return out;
}

namespace {

int resolve_blocks(const TileConfig& cfg, int active) {
  if (active < 0) return cfg.blocks;
  if (active > cfg.blocks) throw AddressError("active_blocks exceeds tile blocks");
  return active;
}

AccessHooks chain_stats(const AccessHooks& user, AccessStats* local) {
  AccessHooks h;
  h.perturb = user.perturb;
  h.stats = local;
  return h;
}

void forward_stats(const AccessHooks& user, const AccessStats& local) {
  if (!user.stats) return;
  if (user.stats->keep_records)
    user.stats->records.insert(user.stats->records.end(), local.records.begin(),
                               local.records.end());
  user.stats->access_count += local.access_count;
  user.stats->digitization_rounds += local.digitization_rounds;
}

}  // namespace

TileResult tile_matvec(const TpcArray& arr, const TritVector& inp,
                       const TileMatvecOptions& options) {
  const TileConfig& cfg = arr.config();
  if (inp.size() != cfg.rows())
    throw ShapeError("tile_matvec needs " + std::to_string(cfg.rows()) + " inputs");
  const int blocks = resolve_blocks(cfg, options.active_blocks);

  TileResult result;
  result.out = Eigen::VectorXd::Zero(cfg.columns);
  result.stats.keep_records = options.keep_records;
  const AccessHooks hooks = chain_stats(options.hooks, &result.stats);
  for (int b = 0; b < blocks; ++b) {
    const TritVector slice = inp.segment(static_cast<Eigen::Index>(b) * cfg.rows_per_block,
                                         cfg.rows_per_block);
    if (options.mode == MatvecMode::Unweighted)
      result.out += matvec_unweighted(arr, b, slice, hooks).cast<double>();
    else
      weighted_into(result.out, arr, b, slice, arr.scales(), 1.0, 0, hooks);
  }
  forward_stats(options.hooks, result.stats);
  return result;
}

TileResult tile_matvec(const TpcArray& arr, const Eigen::VectorXi& acts, int bits,
                       const TileMatvecOptions& options) {
  const TileConfig& cfg = arr.config();
  if (acts.size() != cfg.rows())
    throw ShapeError("tile_matvec needs " + std::to_string(cfg.rows()) + " inputs");
  check_bits(acts, bits);
  const int blocks = resolve_blocks(cfg, options.active_blocks);
  const TernarySystem sys =
      options.mode == MatvecMode::Unweighted ? TernarySystem::unweighted() : arr.scales();

  TileResult result;
  result.out = Eigen::VectorXd::Zero(cfg.columns);
  result.stats.keep_records = options.keep_records;
  const AccessHooks hooks = chain_stats(options.hooks, &result.stats);
  for (int b = 0; b < blocks; ++b) {
    const Eigen::VectorXi slice =
        acts.segment(static_cast<Eigen::Index>(b) * cfg.rows_per_block, cfg.rows_per_block);
    for (int p = 0; p < bits; ++p)
      weighted_into(result.out, arr, b, bit_plane(slice, p), sys, static_cast<double>(1L << p),
                    p, hooks);
  }
  forward_stats(options.hooks, result.stats);
  return result;
}

}  // namespace timdnn
