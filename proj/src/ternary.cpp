#include "timdnn/ternary.hpp"

#include <string>

namespace timdnn {

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Unweighted: return "unweighted";
    case SystemKind::SymmetricWeighted: return "symmetric";
    case SystemKind::AsymmetricWeighted: return "asymmetric";
  }
  return "unweighted";
}

SystemKind system_kind_from_string(std::string_view s) {
  if (s == "unweighted") return SystemKind::Unweighted;
  if (s == "symmetric") return SystemKind::SymmetricWeighted;
  if (s == "asymmetric") return SystemKind::AsymmetricWeighted;
  throw ConfigError("unknown ternary system '" + std::string(s) + "'");
}

void TernarySystem::validate() const {
  switch (kind) {
    case SystemKind::Unweighted:
      if (pos_weight != 1.0 || neg_weight != 1.0 || pos_input != 1.0 || neg_input != 1.0)
        throw ConfigError("unweighted system requires unit scales");
      break;
    case SystemKind::SymmetricWeighted:
      if (!(pos_weight > 0.0) || pos_weight != neg_weight)
        throw ConfigError("symmetric system requires W1 == W2 > 0");
      if (pos_input != neg_input) throw ConfigError("symmetric system requires I1 == I2");
      break;
    case SystemKind::AsymmetricWeighted:
      if (!(pos_weight > 0.0) || !(neg_weight > 0.0))
        throw ConfigError("asymmetric system requires W1 > 0 and W2 > 0");
      if (!(pos_input > 0.0) || !(neg_input > 0.0))
        throw ConfigError("asymmetric system requires I1 > 0 and I2 > 0");
      break;
  }
}

StorageBits encode_weight(Trit w) {
  switch (w) {
    case Trit::Zero: return {false, false};
    case Trit::Pos: return {true, false};
    case Trit::Neg: return {true, true};
  }
  return {};
}

Trit decode_weight(StorageBits s) {
  if (!s.a) return Trit::Zero;  // B is don't-care
  return s.b ? Trit::Neg : Trit::Pos;
}

InputDrive encode_input(Trit i) {
  switch (i) {
    case Trit::Zero: return {false, false};
    case Trit::Pos: return {true, false};
    case Trit::Neg: return {false, true};
  }
  return {};
}

BitlineDischarge cell_read(StorageBits stored, InputDrive drive) {
  BitlineDischarge d;
  if (!stored.a) return d;
  // WL_R1 couples B=0 to BL and B=1 to BLB; WL_R2 swaps the pairing.
  if (drive.wl_r1) {
    d.bl = d.bl || !stored.b;
    d.blb = d.blb || stored.b;
  }
  if (drive.wl_r2) {
    d.bl = d.bl || stored.b;
    d.blb = d.blb || !stored.b;
  }
  return d;
}

double interpret(Trit t, const TernarySystem& sys, Role role) {
  switch (t) {
    case Trit::Zero: return 0.0;
    case Trit::Pos: return role == Role::Weight ? sys.pos_weight : sys.pos_input;
    case Trit::Neg: return role == Role::Weight ? -sys.neg_weight : -sys.neg_input;
  }
  return 0.0;
}

Eigen::ArrayXXd dequantize(const TritArray& trits, double layer_scale, const TernarySystem& sys) {
  Eigen::ArrayXXd out(trits.rows(), trits.cols());
  for (Eigen::Index c = 0; c < trits.cols(); ++c)
    for (Eigen::Index r = 0; r < trits.rows(); ++r)
      out(r, c) = layer_scale * interpret(static_cast<Trit>(trits(r, c)), sys, Role::Weight);
  return out;
}

}  // namespace timdnn
