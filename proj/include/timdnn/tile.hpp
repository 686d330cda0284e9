#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "timdnn/ternary.hpp"

namespace timdnn {

/// Geometry of one in-memory tile.
///
/// The array holds `rows_per_block * blocks` rows of `columns` ternary words.
/// One access enables a single block, so each access computes `columns`
/// dot products of length `rows_per_block`. The ADC full-scale count
/// `adc_max` bounds the digitized number of +1 (and -1) products per column.
struct TileConfig {
  int rows_per_block = 16;
  int blocks = 16;
  int columns = 256;
  int pcus = 32;
  int adc_max = 8;

  int rows() const { return rows_per_block * blocks; }
  long capacity_words() const { return static_cast<long>(rows()) * columns; }
  /// PCU digitization rounds needed to drain one access.
  int digitization_rounds() const { return columns / pcus; }
  void validate() const;
};

/// Digitized numbers of +1 (`pos`) and -1 (`neg`) scalar products on one
/// column's bitline pair.
struct ColumnCounts {
  int pos = 0;
  int neg = 0;
  friend bool operator==(const ColumnCounts&, const ColumnCounts&) = default;
};

struct AccessRecord {
  int block = 0;
  int plane = 0;  // bit significance for bit-serial activations
  int step = 0;   // 0 or 1 for the polarity-split procedure
  std::vector<ColumnCounts> counts;
};

struct AccessStats {
  std::vector<AccessRecord> records;  // filled only when keep_records is set
  long access_count = 0;
  long digitization_rounds = 0;
  bool keep_records = true;

  long accesses() const { return access_count; }
};

/// Optional observers of every array access. `perturb` sees the clipped ADC
/// codes before the PCU consumes them (sensing-error injection).
struct AccessHooks {
  std::function<void(std::span<ColumnCounts>)> perturb;
  AccessStats* stats = nullptr;
};

/// Ternary cell storage of one tile plus its per-layer scale registers.
class TpcArray {
 public:
  explicit TpcArray(const TileConfig& config);

  const TileConfig& config() const { return config_; }

  /// Programs one row (N words written in parallel).
  void write_row(int block, int row, const TritVector& words);
  TritVector read_row(int block, int row) const;
  Trit cell(int block, int row, int column) const;

  /// Writes a (rows x columns) weight matrix starting at row 0; shorter
  /// matrices are zero padded. Returns the number of row writes issued.
  long load(const TritMatrix& weights);

  auto block_cells(int block) const {
    check_block(block);
    return cells_.middleRows(static_cast<Eigen::Index>(block) * config_.rows_per_block,
                             config_.rows_per_block);
  }

  void load_scales(const TernarySystem& sys) { scales_ = sys; }
  const TernarySystem& scales() const { return scales_; }

  long row_writes() const { return row_writes_; }

 private:
  void check_block(int block) const;

  TileConfig config_;
  TritMatrix cells_;  // (rows_per_block * blocks) x columns
  TernarySystem scales_;
  long row_writes_ = 0;
};

/// Unclipped per-column counts of +1/-1 products for one block access.
std::vector<ColumnCounts> raw_block_counts(const TpcArray& arr, int block, const TritVector& inp);

/// ADC view of one block access: raw counts clipped to `adc_max`.
std::vector<ColumnCounts> block_counts(const TpcArray& arr, int block, const TritVector& inp,
                                       int adc_max);

/// Per-column n - k using clipped counts.
Eigen::VectorXi matvec_unweighted(const TpcArray& arr, int block, const TritVector& inp,
                                  const AccessHooks& hooks = {});

enum class Step { One, Two };

struct StepScale {
  double input_scale = 0.0;
  Trit polarity = Trit::Pos;
};

/// Input scale and active input polarity of one step of the polarity-split
/// procedure: step One drives only POS inputs with scale I1, step Two drives
/// only NEG inputs (as POS) with scale -I2.
StepScale asymmetric_step_scale(Step step, const TernarySystem& sys);

/// Weighted dot products, sum over steps of I_alpha * (W1*n - W2*k).
/// Asymmetric systems take two polarity-masked accesses, the others one.
Eigen::VectorXd matvec_weighted(const TpcArray& arr, int block, const TritVector& inp,
                                const TernarySystem& sys, const AccessHooks& hooks = {});

/// Multi-bit activations as sign-magnitude bit planes, one access (or two
/// for asymmetric systems) per plane, recombined by shift-and-add.
Eigen::VectorXd matvec_bitserial(const TpcArray& arr, int block, const Eigen::VectorXi& acts,
                                 int bits, const TernarySystem& sys,
                                 const AccessHooks& hooks = {});

enum class MatvecMode { Unweighted, Weighted };

struct TileMatvecOptions {
  MatvecMode mode = MatvecMode::Unweighted;
  int active_blocks = -1;  // -1: all blocks
  bool keep_records = true;
  AccessHooks hooks;
};

struct TileResult {
  Eigen::VectorXd out;
  AccessStats stats;
};

/// Full-tile vector-matrix product over rows_per_block * blocks inputs, one
/// block per access, partial sums reduced in the PCU adders. Weighted mode
/// uses the array's scale registers.
TileResult tile_matvec(const TpcArray& arr, const TritVector& inp,
                       const TileMatvecOptions& options = {});

/// Bit-serial variant for integer activations with |a| < 2^bits.
TileResult tile_matvec(const TpcArray& arr, const Eigen::VectorXi& acts, int bits,
                       const TileMatvecOptions& options = {});

/// Splits a signed activation vector into the trit plane for bit `plane`.
TritVector bit_plane(const Eigen::VectorXi& acts, int plane);

}  // namespace timdnn
