#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string_view>

#include "timdnn/errors.hpp"

namespace timdnn {

/// Signed ternary digit. Numeric meaning comes only from a TernarySystem.
enum class Trit : std::int8_t { Neg = -1, Zero = 0, Pos = 1 };

constexpr int to_int(Trit t) { return static_cast<int>(t); }

constexpr Trit trit_from_sign(long v) {
  return v > 0 ? Trit::Pos : (v < 0 ? Trit::Neg : Trit::Zero);
}

// Dense trit containers store the sign code (-1, 0, 1) as int8.
using TritVector = Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1>;
using TritMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;
using TritArray = Eigen::Array<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class SystemKind { Unweighted, SymmetricWeighted, AsymmetricWeighted };

std::string_view to_string(SystemKind kind);
SystemKind system_kind_from_string(std::string_view s);

/// Interpretation of POS/NEG trits for weights {-W2, 0, W1} and inputs
/// {-I2, 0, I1}.
struct TernarySystem {
  SystemKind kind = SystemKind::Unweighted;
  double pos_weight = 1.0;
  double neg_weight = 1.0;
  double pos_input = 1.0;
  double neg_input = 1.0;

  static TernarySystem unweighted() { return {}; }
  static TernarySystem symmetric(double weight, double input = 1.0) {
    return {SystemKind::SymmetricWeighted, weight, weight, input, input};
  }
  static TernarySystem asymmetric(double w1, double w2, double i1, double i2) {
    return {SystemKind::AsymmetricWeighted, w1, w2, i1, i2};
  }

  // Asymmetric values need the polarity-split (two access) procedure.
  bool two_step() const { return kind == SystemKind::AsymmetricWeighted; }

  /// Throws ConfigError when the constants break the kind's invariants.
  void validate() const;
};

struct StorageBits {
  bool a = false;
  bool b = false;
  friend bool operator==(const StorageBits&, const StorageBits&) = default;
};

/// Read wordline levels for one input trit; at most one line is asserted.
struct InputDrive {
  bool wl_r1 = false;
  bool wl_r2 = false;
  friend bool operator==(const InputDrive&, const InputDrive&) = default;
};

/// Which bitline of a cell discharges during a read.
struct BitlineDischarge {
  bool bl = false;
  bool blb = false;
};

enum class Role { Weight, Input };

constexpr Trit trit_mul(Trit w, Trit i) {
  return static_cast<Trit>(static_cast<std::int8_t>(to_int(w) * to_int(i)));
}

StorageBits encode_weight(Trit w);
Trit decode_weight(StorageBits s);
InputDrive encode_input(Trit i);

/// Logic-level model of the cell's read ports: which bitline a stored word
/// pulls down under a given wordline drive.
BitlineDischarge cell_read(StorageBits stored, InputDrive drive);

/// Single-ended sensing of one cell's bitline pair.
constexpr Trit sense_cell(BitlineDischarge d) {
  return d.bl ? Trit::Pos : (d.blb ? Trit::Neg : Trit::Zero);
}

double interpret(Trit t, const TernarySystem& sys, Role role);

struct QuantSpec {
  double threshold_fraction = 0.5;  // in (0, 1)
  TernarySystem system;
};

template <typename Scalar>
struct Quantized {
  TritArray trits;
  Scalar layer_scale = 0;
};

/// Max-scaled threshold ternarization: |x| <= t * max|x| maps to ZERO, the
/// rest to sign(x). The layer scale is the mean magnitude of the entries that
/// stayed non-zero (0 when all of them were zeroed).
template <typename Derived>
Quantized<typename Derived::Scalar> quantize_tensor(const Eigen::DenseBase<Derived>& x,
                                                    const QuantSpec& spec) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) throw ShapeError("quantize_tensor: empty tensor");
  if (!(spec.threshold_fraction > 0.0 && spec.threshold_fraction < 1.0))
    throw ConfigError("quantize_tensor: threshold_fraction must lie in (0,1)");

  const auto mag = x.derived().array().abs().eval();
  const Scalar cut = static_cast<Scalar>(spec.threshold_fraction) * mag.maxCoeff();

  Quantized<Scalar> out;
  out.trits.resize(x.rows(), x.cols());
  Scalar kept_sum = 0;
  long kept = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Scalar v = x.derived()(r, c);
      if (std::abs(v) <= cut) {
        out.trits(r, c) = 0;
      } else {
        out.trits(r, c) = v > 0 ? 1 : -1;
        kept_sum += std::abs(v);
        ++kept;
      }
    }
  }
  out.layer_scale = kept > 0 ? kept_sum / static_cast<Scalar>(kept) : Scalar(0);
  return out;
}

/// Real values represented by quantized weights: {-W2*s, 0, W1*s}.
Eigen::ArrayXXd dequantize(const TritArray& trits, double layer_scale, const TernarySystem& sys);

}  // namespace timdnn
