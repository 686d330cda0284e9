#pragma once

#include <string>
#include <vector>

#include "timdnn/ternary.hpp"

namespace timdnn {

/// Activation tensor geometry, channel-major. Sequences use height as the
/// time axis with width 1.
struct Shape {
  int channels = 1;
  int height = 1;
  int width = 1;

  long size() const { return static_cast<long>(channels) * height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

enum class LayerKind { Conv, FC, LSTM, GRU, Pool, ReLU, Norm, Tanh, Sigmoid, Quantize, Concat, Add };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);

bool has_weights(LayerKind kind);
bool is_recurrent(LayerKind kind);

inline constexpr int kGraphInput = -1;

struct Layer {
  std::string name;
  LayerKind kind = LayerKind::FC;
  // Producer layer indices; empty means the previous layer (or the graph
  // input for layer 0). kGraphInput names the graph input explicitly.
  std::vector<int> inputs;

  // Conv / Pool
  int out_channels = 0;
  int kernel_h = 1, kernel_w = 1;
  int stride = 1;
  int pad = 0;
  bool max_pool = true;
  bool global_pool = false;

  // FC
  int out_features = 0;

  // LSTM / GRU
  int hidden = 0;

  // Weighted layers: magnitude bits of the incoming activations (bit planes)
  // and the value system of weights and inputs.
  int act_bits = 1;
  TernarySystem system;
  // Real multiplier applied to raw dot products before gate nonlinearities.
  double gate_scale = 0.0;  // 0: 1 / inner

  // Quantize: output magnitude bits and step (<= 0: max-scaled).
  int quant_bits = 1;
  double quant_step = 0.0;

  // One (inner x cols) trit matrix per matmul; empty until loaded/generated.
  std::vector<TritMatrix> weights;
};

struct DnnGraph {
  std::string name;
  Shape input;
  int input_bits = 1;
  std::vector<Layer> layers;

  /// Producer indices of layer i with the implicit-previous rule applied.
  std::vector<int> producers(int i) const;
  bool recurrent() const;
};

/// One vector-matrix product family: `rows` input vectors of length `inner`
/// against an (inner x cols) weight matrix.
struct MatmulShape {
  long rows = 0;
  long inner = 0;
  long cols = 0;

  long macs() const { return rows * inner * cols; }
  long weights() const { return inner * cols; }
  friend bool operator==(const MatmulShape&, const MatmulShape&) = default;
};

/// Output shape of every layer; throws ShapeError on incompatible geometry.
std::vector<Shape> resolve_shapes(const DnnGraph& g);

/// im2col view of a convolution over `in`.
MatmulShape lower_conv(const Layer& conv, const Shape& in);

/// Matmuls a weighted layer issues, in dependency order. GRU layers issue the
/// gate product (2H columns) followed by the candidate product (H columns).
std::vector<MatmulShape> layer_matmuls(const Layer& layer, const Shape& in);

/// Total MACs and ternary weights of the graph.
long graph_macs(const DnnGraph& g);
long graph_weights(const DnnGraph& g);

/// Fills missing weight matrices with random trits (zero with probability
/// 1 - density, else +-1 equally likely).
void generate_weights(DnnGraph& g, unsigned long long seed, double density = 0.5);

}  // namespace timdnn
