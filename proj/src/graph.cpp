#include "timdnn/graph.hpp"

#include <random>

namespace timdnn {

namespace {

struct KindName {
  LayerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::Conv, "conv"},       {LayerKind::FC, "fc"},
    {LayerKind::LSTM, "lstm"},       {LayerKind::GRU, "gru"},
    {LayerKind::Pool, "pool"},       {LayerKind::ReLU, "relu"},
    {LayerKind::Norm, "norm"},       {LayerKind::Tanh, "tanh"},
    {LayerKind::Sigmoid, "sigmoid"}, {LayerKind::Quantize, "quantize"},
    {LayerKind::Concat, "concat"},   {LayerKind::Add, "add"},
};

int window_out(int in, int k, int stride, int pad, const std::string& who) {
  if (k <= 0 || stride <= 0 || pad < 0) throw ShapeError(who + ": bad window parameters");
  if (k > in + 2 * pad) throw ShapeError(who + ": kernel larger than padded input");
  const int out = (in + 2 * pad - k) / stride + 1;
  if (out <= 0) throw ShapeError(who + ": non-positive output size");
  return out;
}

}  // namespace

std::string to_string(LayerKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
  for (const auto& kn : kKindNames)
    if (s == kn.name) return kn.kind;
  throw ConfigError("unknown layer type '" + s + "'");
}

bool has_weights(LayerKind kind) {
  return kind == LayerKind::Conv || kind == LayerKind::FC || is_recurrent(kind);
}

bool is_recurrent(LayerKind kind) { return kind == LayerKind::LSTM || kind == LayerKind::GRU; }

std::vector<int> DnnGraph::producers(int i) const {
  const Layer& l = layers.at(static_cast<std::size_t>(i));
  if (!l.inputs.empty()) return l.inputs;
  return {i == 0 ? kGraphInput : i - 1};
}

bool DnnGraph::recurrent() const {
  for (const auto& l : layers)
    if (is_recurrent(l.kind)) return true;
  return false;
}

MatmulShape lower_conv(const Layer& conv, const Shape& in) {
  const std::string who = "conv '" + conv.name + "'";
  if (conv.out_channels <= 0) throw ShapeError(who + ": out_channels must be positive");
  const int oh = window_out(in.height, conv.kernel_h, conv.stride, conv.pad, who);
  const int ow = window_out(in.width, conv.kernel_w, conv.stride, conv.pad, who);
  return {static_cast<long>(oh) * ow, static_cast<long>(conv.kernel_h) * conv.kernel_w * in.channels,
          conv.out_channels};
}

std::vector<MatmulShape> layer_matmuls(const Layer& layer, const Shape& in) {
  switch (layer.kind) {
    case LayerKind::Conv: return {lower_conv(layer, in)};
    case LayerKind::FC:
      if (layer.out_features <= 0) throw ShapeError("fc '" + layer.name + "': out_features <= 0");
      return {{1, in.size(), layer.out_features}};
    case LayerKind::LSTM:
      return {{in.height, in.channels + layer.hidden, 4L * layer.hidden}};
    case LayerKind::GRU:
      return {{in.height, in.channels + layer.hidden, 2L * layer.hidden},
              {in.height, in.channels + layer.hidden, layer.hidden}};
    default: return {};
  }
}

std::vector<Shape> resolve_shapes(const DnnGraph& g) {
  if (g.input.size() <= 0) throw ShapeError("graph input must be non-empty");
  std::vector<Shape> out;
  out.reserve(g.layers.size());
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
    const Layer& l = g.layers[static_cast<std::size_t>(i)];
    std::vector<Shape> ins;
    for (int p : g.producers(i)) {
      if (p == kGraphInput)
        ins.push_back(g.input);
      else if (p < 0 || p >= i)
        throw ShapeError("layer '" + l.name + "' reads a later or unknown layer");
      else
        ins.push_back(out[static_cast<std::size_t>(p)]);
    }
    if (l.kind != LayerKind::Concat && l.kind != LayerKind::Add && ins.size() != 1)
      throw ShapeError("layer '" + l.name + "' takes exactly one input");
    const Shape in = ins.front();
    Shape s = in;
    switch (l.kind) {
      case LayerKind::Conv: {
        const auto mm = lower_conv(l, in);
        const int oh = window_out(in.height, l.kernel_h, l.stride, l.pad, l.name);
        s = {static_cast<int>(mm.cols), oh, static_cast<int>(mm.rows / oh)};
        break;
      }
      case LayerKind::FC:
        if (l.out_features <= 0) throw ShapeError("fc '" + l.name + "': out_features <= 0");
        s = {l.out_features, 1, 1};
        break;
      case LayerKind::LSTM:
      case LayerKind::GRU:
        if (l.hidden <= 0) throw ShapeError("recurrent '" + l.name + "': hidden <= 0");
        if (in.width != 1) throw ShapeError("recurrent '" + l.name + "' needs a C x T x 1 input");
        s = {l.hidden, in.height, 1};
        break;
      case LayerKind::Pool:
        if (l.global_pool)
          s = {in.channels, 1, 1};
        else
          s = {in.channels, window_out(in.height, l.kernel_h, l.stride, l.pad, l.name),
               window_out(in.width, l.kernel_w, l.stride, l.pad, l.name)};
        break;
      case LayerKind::Concat:
        s = ins.front();
        s.channels = 0;
        for (const auto& x : ins) {
          if (x.height != ins.front().height || x.width != ins.front().width)
            throw ShapeError("concat '" + l.name + "': spatial sizes differ");
          s.channels += x.channels;
        }
        break;
      case LayerKind::Add:
        for (const auto& x : ins)
          if (!(x == ins.front())) throw ShapeError("add '" + l.name + "': shapes differ");
        break;
      case LayerKind::Quantize:
        if (l.quant_bits < 1 || l.quant_bits > 16)
          throw ShapeError("quantize '" + l.name + "': bits outside [1, 16]");
        break;
      default: break;
    }
    if (has_weights(l.kind)) {
      if (l.act_bits < 1 || l.act_bits > 16)
        throw ShapeError("layer '" + l.name + "': act_bits outside [1, 16]");
      const auto mms = layer_matmuls(l, in);
      if (!l.weights.empty()) {
        if (l.weights.size() != mms.size())
          throw ShapeError("layer '" + l.name + "': wrong number of weight matrices");
        for (std::size_t m = 0; m < mms.size(); ++m)
          if (l.weights[m].rows() != mms[m].inner || l.weights[m].cols() != mms[m].cols)
            throw ShapeError("layer '" + l.name + "': weight matrix shape mismatch");
      }
    }
    out.push_back(s);
  }
  return out;
}

namespace {

Shape input_of(const DnnGraph& g, const std::vector<Shape>& shapes, int i) {
  const int p = g.producers(i).front();
  return p == kGraphInput ? g.input : shapes[static_cast<std::size_t>(p)];
}

}  // namespace

long graph_macs(const DnnGraph& g) {
  const auto shapes = resolve_shapes(g);
  long total = 0;
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i)
    for (const auto& mm : layer_matmuls(g.layers[static_cast<std::size_t>(i)], input_of(g, shapes, i)))
      total += mm.macs();
  return total;
}

long graph_weights(const DnnGraph& g) {
  const auto shapes = resolve_shapes(g);
  long total = 0;
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i)
    for (const auto& mm : layer_matmuls(g.layers[static_cast<std::size_t>(i)], input_of(g, shapes, i)))
      total += mm.weights();
  return total;
}

void generate_weights(DnnGraph& g, unsigned long long seed, double density) {
  const auto shapes = resolve_shapes(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
    Layer& l = g.layers[static_cast<std::size_t>(i)];
    if (!has_weights(l.kind) || !l.weights.empty()) continue;
    for (const auto& mm : layer_matmuls(l, input_of(g, shapes, i))) {
      TritMatrix w(mm.inner, mm.cols);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          const double x = u(rng);
          w(r, c) = x < density ? (x < 0.5 * density ? 1 : -1) : 0;
        }
      l.weights.push_back(std::move(w));
    }
  }
}

}  // namespace timdnn
