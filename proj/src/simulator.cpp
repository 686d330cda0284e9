#include "timdnn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>

namespace timdnn {

std::string to_string(SfuKind k) {
  switch (k) {
    case SfuKind::Relu: return "relu";
    case SfuKind::Vpe: return "vpe";
    case SfuKind::Spe: return "spe";
    case SfuKind::Qu: return "qu";
  }
  return "?";
}

std::string to_string(BaselineKind k) {
  return k == BaselineKind::IsoCapacity ? "iso-capacity" : "iso-area";
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  tile_accesses += o.tile_accesses;
  row_reads += o.row_reads;
  row_writes += o.row_writes;
  discharge_units += o.discharge_units;
  macs += o.macs;
  padded_macs += o.padded_macs;
  act_read_bytes += o.act_read_bytes;
  act_write_bytes += o.act_write_bytes;
  psum_read_bytes += o.psum_read_bytes;
  psum_write_bytes += o.psum_write_bytes;
  dram_read_bytes += o.dram_read_bytes;
  dram_write_bytes += o.dram_write_bytes;
  ru_ops += o.ru_ops;
  for (int i = 0; i < kSfuKinds; ++i) sfu_ops[static_cast<std::size_t>(i)] += o.sfu_ops[static_cast<std::size_t>(i)];
  spills += o.spills;
  return *this;
}

EventCounts ExecutionTrace::totals() const {
  EventCounts t = io;
  for (const auto& l : layers) t += l.events;
  return t;
}

long ExecutionTrace::critical_row_writes() const {
  long t = 0;
  for (const auto& p : phases) t += p.critical_row_writes;
  return t;
}

double ExecutionTrace::weight_bytes() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.weight_bytes;
  return t;
}

double activation_bytes(int bits) { return (bits + 1) / 8.0; }

AcceleratorConfig baseline_config(const AcceleratorConfig& accel, BaselineKind kind) {
  AcceleratorConfig b = accel;
  b.tile_kind = TileKind::NearMemory;
  b.num_tiles = kind == BaselineKind::IsoCapacity ? accel.num_tiles : accel.iso_area_tiles;
  return b;
}

namespace {

std::size_t sz(long v) { return static_cast<std::size_t>(v); }

void add_sfu(EventCounts& e, SfuKind k, long ops) { e.sfu_ops[static_cast<std::size_t>(k)] += ops; }

Eigen::MatrixXi to_ints(const Eigen::MatrixXd& x, int bits, const std::string& who) {
  const double limit = std::ldexp(1.0, bits);
  Eigen::MatrixXi out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double v = x(r, c);
      if (v != std::round(v) || std::abs(v) >= limit)
        throw InputError(who + ": activation " + std::to_string(v) + " is not a " +
                         std::to_string(bits) + "-bit integer");
      out(r, c) = static_cast<int>(v);
    }
  return out;
}

// Integer value of the largest representable magnitude with `bits` bits.
double max_level(int bits) { return std::ldexp(1.0, bits) - 1.0; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

class Runner {
 public:
  Runner(const DnnGraph& g, const MappingPlan& plan, const AcceleratorConfig& accel,
         const SimOptions& opt, ExecutionTrace& trace)
      : g_(g), plan_(plan), accel_(accel), opt_(opt), trace_(trace) {
    const int states = accel.tile.adc_max + 1;
    trace_.pos_histogram.assign(sz(states), 0.0);
    trace_.neg_histogram.assign(sz(states), 0.0);
    // Stored width of every layer's output elements.
    for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
      const Layer& l = g.layers[sz(i)];
      double w = 0;
      if (l.kind == LayerKind::Conv || l.kind == LayerKind::FC)
        w = accel.psum_bytes;
      else if (is_recurrent(l.kind))
        w = activation_bytes(l.act_bits);
      else if (l.kind == LayerKind::Quantize)
        w = activation_bytes(l.quant_bits);
      else
        for (int p : g.producers(i)) w = std::max(w, elem_bytes(p));
      elem_bytes_.push_back(w);
    }
  }

  double elem_bytes(int producer) const {
    return producer == kGraphInput ? activation_bytes(g_.input_bits) : elem_bytes_[sz(producer)];
  }

  void count_layer(int i, LayerTrace& lt) const;
  Tensor run_layer(int i, const std::vector<const Tensor*>& ins, LayerTrace& lt);

 private:
  Eigen::MatrixXd matmul(int layer, int m, const Eigen::MatrixXi& X, LayerTrace& lt);
  Eigen::MatrixXd matmul_exact(int layer, int m, const Eigen::MatrixXi& X) const;
  Tensor run_recurrent(int i, const Tensor& in, LayerTrace& lt);
  double gate_scale(const Layer& l, long inner) const {
    return l.gate_scale > 0.0 ? l.gate_scale : 1.0 / static_cast<double>(inner);
  }

  const DnnGraph& g_;
  const MappingPlan& plan_;
  const AcceleratorConfig& accel_;
  const SimOptions& opt_;
  ExecutionTrace& trace_;
  std::map<std::pair<int, int>, std::vector<std::unique_ptr<TpcArray>>> tiles_;
  std::map<int, std::unique_ptr<SensingErrorInjector>> injectors_;
  std::vector<double> elem_bytes_;
};

void Runner::count_layer(int i, LayerTrace& lt) const {
  const Layer& l = g_.layers[sz(i)];
  const Shape& in = plan_.in_shapes[sz(i)];
  const Shape& out = plan_.out_shapes[sz(i)];
  EventCounts& e = lt.events;
  const TileConfig& tile = accel_.tile;
  const bool in_memory = accel_.tile_kind == TileKind::InMemory;

  if (has_weights(l.kind)) {
    const long planes = l.act_bits;
    const long steps = l.system.two_step() ? 2 : 1;
    const double ab = activation_bytes(l.act_bits);
    const auto& mms = plan_.matmuls[sz(i)];
    const auto& grids = plan_.grids[sz(i)];
    for (std::size_t m = 0; m < mms.size(); ++m) {
      const MatmulShape& mm = mms[m];
      e.macs += mm.macs();
      e.ru_ops += mm.rows * mm.cols * (grids[m].row_parts - 1);
      e.act_read_bytes += static_cast<double>(mm.rows * mm.inner) * ab;
      // Cross-tile partials are staged in the psum buffer for the RU.
      if (grids[m].row_parts > 1) {
        const double partials = static_cast<double>(mm.rows * mm.cols * grids[m].row_parts);
        e.psum_write_bytes += partials * accel_.psum_bytes;
        e.psum_read_bytes += partials * accel_.psum_bytes;
      }
    }
    const bool recurrent = is_recurrent(l.kind);
    for (const Phase& ph : plan_.phases)
      for (const Placement& p : ph.placements) {
        if (p.layer != i) continue;
        const PartitionGrid& grid = grids[sz(p.matmul)];
        const long rows = mms[sz(p.matmul)].rows;
        long crit_reads = 0;
        for (int q = p.first; q < p.first + p.count; ++q) {
          const long blocks = partition_blocks(grid, grid.row_of(q), tile);
          const long vr = grid.valid_rows[sz(grid.row_of(q))];
          const long vc = grid.valid_cols[sz(grid.col_of(q))];
          if (in_memory) {
            const long acc = rows * blocks * planes * steps;
            e.tile_accesses += acc;
            e.padded_macs += acc * tile.rows_per_block * tile.columns;
            if (!opt_.functional)
              e.discharge_units += static_cast<double>(acc * vc) * opt_.assumed_discharge_per_column;
          } else {
            const long reads = rows * vr * planes * steps;
            e.row_reads += reads;
            e.padded_macs += reads * tile.columns;
            const long share = recurrent ? rows * ((vr + p.replicas - 1) / p.replicas)
                                         : (rows * vr + p.replicas - 1) / p.replicas;
            crit_reads = std::max(crit_reads, share * planes * steps);
          }
          // Replicas that split the blocks of one vector need an extra merge.
          const long split = recurrent ? std::min<long>(p.replicas, blocks) - 1
                                       : std::max<long>(0, std::min<long>(p.replicas, rows * blocks) - rows);
          e.ru_ops += (recurrent ? rows : 1) * split * vc;
        }
        if (in_memory)
          lt.critical_accesses += placement_block_accesses(plan_, g_, p, tile) * planes * steps;
        else
          lt.critical_row_reads += crit_reads;
        lt.pipeline_drains += recurrent ? rows : 1;
        lt.replicas = std::max(lt.replicas, p.replicas);
      }

    if (l.kind == LayerKind::LSTM) {
      const long H = l.hidden, T = in.height;
      add_sfu(e, SfuKind::Spe, 5 * H * T);
      add_sfu(e, SfuKind::Vpe, 4 * H * T);
      add_sfu(e, SfuKind::Qu, H * T);
      e.act_write_bytes += static_cast<double>(H * T) * ab;
    } else if (l.kind == LayerKind::GRU) {
      const long H = l.hidden, T = in.height;
      add_sfu(e, SfuKind::Spe, 3 * H * T);
      add_sfu(e, SfuKind::Vpe, 4 * H * T);
      add_sfu(e, SfuKind::Qu, 2 * H * T);
      e.act_write_bytes += static_cast<double>(H * T) * ab;
    }

    if (!is_recurrent(l.kind)) e.act_write_bytes += static_cast<double>(out.size()) * elem_bytes(i);
    const double footprint = static_cast<double>(in.size()) * ab + static_cast<double>(out.size()) * elem_bytes(i);
    const double cap = static_cast<double>(accel_.act_buffer_bytes) * accel_.banks;
    if (footprint > cap) {
      e.dram_write_bytes += footprint - cap;
      e.dram_read_bytes += footprint - cap;
      e.spills += 1;
    }
    return;
  }

  double in_bytes = 0;
  for (int p : g_.producers(i)) in_bytes += static_cast<double>(in.size()) * elem_bytes(p);
  const double out_bytes = static_cast<double>(out.size()) * elem_bytes(i);
  switch (l.kind) {
    case LayerKind::ReLU: add_sfu(e, SfuKind::Relu, out.size()); break;
    case LayerKind::Pool:
      add_sfu(e, SfuKind::Vpe, l.global_pool ? in.size() : out.size() * l.kernel_h * l.kernel_w);
      break;
    case LayerKind::Norm: add_sfu(e, SfuKind::Vpe, 2 * out.size()); break;
    case LayerKind::Tanh:
    case LayerKind::Sigmoid: add_sfu(e, SfuKind::Spe, out.size()); break;
    case LayerKind::Quantize: add_sfu(e, SfuKind::Qu, out.size()); break;
    case LayerKind::Add:
      add_sfu(e, SfuKind::Vpe, out.size() * static_cast<long>(g_.producers(i).size() - 1));
      break;
    default: break;
  }
  if (l.kind == LayerKind::Concat) return;  // placement only, no data movement
  e.act_read_bytes += in_bytes;
  e.act_write_bytes += out_bytes;
}

Eigen::MatrixXd Runner::matmul_exact(int layer, int m, const Eigen::MatrixXi& X) const {
  const Layer& l = g_.layers[sz(layer)];
  const TritMatrix& W = l.weights[sz(m)];
  const TernarySystem& s = l.system;
  const Eigen::MatrixXd Wd = W.cast<double>().unaryExpr([&](double w) {
    return w > 0 ? s.pos_weight : (w < 0 ? -s.neg_weight : 0.0);
  });
  const Eigen::MatrixXd Xd = X.cast<double>().unaryExpr([&](double a) {
    return a > 0 ? a * s.pos_input : a * s.neg_input;
  });
  return Xd * Wd;
}

Eigen::MatrixXd Runner::matmul(int layer, int m, const Eigen::MatrixXi& X, LayerTrace& lt) {
  if (accel_.tile_kind == TileKind::NearMemory) return matmul_exact(layer, m, X);

  const Layer& l = g_.layers[sz(layer)];
  const PartitionGrid& grid = plan_.grids[sz(layer)][sz(m)];
  const TileConfig& tile = accel_.tile;
  const int R = tile.rows();
  const int N = tile.columns;

  auto& arrays = tiles_[{layer, m}];
  if (arrays.empty()) {
    for (int q = 0; q < grid.count(); ++q) {
      const int i = grid.row_of(q), j = grid.col_of(q);
      auto arr = std::make_unique<TpcArray>(tile);
      arr->load(l.weights[sz(m)].block(static_cast<Eigen::Index>(i) * R, static_cast<Eigen::Index>(j) * N,
                                       grid.valid_rows[sz(i)], grid.valid_cols[sz(j)]));
      arr->load_scales(l.system);
      arrays.push_back(std::move(arr));
    }
  }

  SensingErrorInjector* inj = nullptr;
  if (opt_.errors) {
    auto& slot = injectors_[layer];
    if (!slot)
      slot = std::make_unique<SensingErrorInjector>(
          *opt_.errors, make_stream(opt_.seed, 0x10000u + static_cast<std::uint64_t>(layer)));
    inj = slot.get();
  }

  AccessStats stats;
  stats.keep_records = opt_.keep_access_log;
  TileMatvecOptions o;
  o.mode = MatvecMode::Weighted;
  o.keep_records = false;
  o.hooks.stats = &stats;
  o.hooks.perturb = [&](std::span<ColumnCounts> cs) {
    for (const auto& c : cs) {
      trace_.pos_histogram[sz(c.pos)] += 1.0;
      trace_.neg_histogram[sz(c.neg)] += 1.0;
      lt.events.discharge_units += c.pos + c.neg;
    }
    if (inj) (*inj)(cs);
  };

  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(X.rows(), grid.cols);
  Eigen::VectorXi acts(R);
  for (int q = 0; q < grid.count(); ++q) {
    const int i = grid.row_of(q), j = grid.col_of(q);
    const int vr = grid.valid_rows[sz(i)], vc = grid.valid_cols[sz(j)];
    o.active_blocks = partition_blocks(grid, i, tile);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      acts.setZero();
      acts.head(vr) = X.row(r).segment(static_cast<Eigen::Index>(i) * R, vr).transpose();
      const TileResult res = tile_matvec(*arrays[sz(q)], acts, l.act_bits, o);
      Y.row(r).segment(static_cast<Eigen::Index>(j) * N, vc) += res.out.head(vc).transpose();
    }
  }
  if (inj) {
    trace_.injected_errors = 0;
    trace_.conversions = 0;
    for (const auto& [k, v] : injectors_) {
      trace_.injected_errors += v->injected();
      trace_.conversions += v->conversions();
    }
  }
  if (opt_.keep_access_log)
    trace_.access_log.insert(trace_.access_log.end(), stats.records.begin(), stats.records.end());
  return Y;
}

Tensor Runner::run_recurrent(int i, const Tensor& in, LayerTrace& lt) {
  const Layer& l = g_.layers[sz(i)];
  const int C = in.shape.channels, T = in.shape.height, H = l.hidden;
  const long inner = C + H;
  const double s = gate_scale(l, inner);
  const double lv = max_level(l.act_bits);
  const Eigen::MatrixXi x = to_ints(
      Eigen::Map<const Eigen::MatrixXd>(in.data.data(), T, C), l.act_bits, l.name);  // T x C

  Eigen::VectorXd h = Eigen::VectorXd::Zero(H), c = Eigen::VectorXd::Zero(H);
  Eigen::VectorXi hq = Eigen::VectorXi::Zero(H);
  Tensor out{{H, T, 1}, Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(H) * T)};
  Eigen::MatrixXi v(1, inner);
  auto quant = [&](const Eigen::VectorXd& a) {
    return a.unaryExpr([&](double z) { return std::round(std::clamp(z, -1.0, 1.0) * lv); })
        .cast<int>()
        .eval();
  };
  for (int t = 0; t < T; ++t) {
    v.leftCols(C) = x.row(t);
    v.rightCols(H) = hq.transpose();
    if (l.kind == LayerKind::LSTM) {
      const Eigen::VectorXd z = (matmul(i, 0, v, lt).row(0).transpose() * s).eval();
      const Eigen::VectorXd ig = z.segment(0, H).unaryExpr(&sigmoid);
      const Eigen::VectorXd fg = z.segment(H, H).unaryExpr(&sigmoid);
      const Eigen::VectorXd gg = z.segment(2 * H, H).array().tanh().matrix();
      const Eigen::VectorXd og = z.segment(3 * H, H).unaryExpr(&sigmoid);
      c = fg.cwiseProduct(c) + ig.cwiseProduct(gg);
      h = og.cwiseProduct(c.array().tanh().matrix());
    } else {
      const Eigen::VectorXd z = (matmul(i, 0, v, lt).row(0).transpose() * s).eval();
      const Eigen::VectorXd zg = z.segment(0, H).unaryExpr(&sigmoid);
      const Eigen::VectorXd rg = z.segment(H, H).unaryExpr(&sigmoid);
      v.rightCols(H) = quant(rg.cwiseProduct(h)).transpose();
      const Eigen::VectorXd n =
          (matmul(i, 1, v, lt).row(0).transpose() * s).array().tanh().matrix();
      h = (Eigen::VectorXd::Ones(H) - zg).cwiseProduct(n) + zg.cwiseProduct(h);
    }
    hq = quant(h);
    for (int k = 0; k < H; ++k) out.data(static_cast<Eigen::Index>(k) * T + t) = hq(k);
  }
  return out;
}

Tensor Runner::run_layer(int i, const std::vector<const Tensor*>& ins, LayerTrace& lt) {
  const Layer& l = g_.layers[sz(i)];
  const Shape& oshape = plan_.out_shapes[sz(i)];
  const Tensor& in = *ins.front();
  const Shape& is = in.shape;
  Tensor out{oshape, Eigen::ArrayXd::Zero(oshape.size())};
  auto at = [](const Shape& s, int c, int y, int x) {
    return (static_cast<Eigen::Index>(c) * s.height + y) * s.width + x;
  };

  switch (l.kind) {
    case LayerKind::Conv: {
      const MatmulShape mm = plan_.matmuls[sz(i)][0];
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(mm.rows, mm.inner);
      for (int oy = 0; oy < oshape.height; ++oy)
        for (int ox = 0; ox < oshape.width; ++ox) {
          const Eigen::Index r = static_cast<Eigen::Index>(oy) * oshape.width + ox;
          Eigen::Index k = 0;
          for (int c = 0; c < is.channels; ++c)
            for (int ky = 0; ky < l.kernel_h; ++ky)
              for (int kx = 0; kx < l.kernel_w; ++kx, ++k) {
                const int y = oy * l.stride - l.pad + ky, x = ox * l.stride - l.pad + kx;
                if (y >= 0 && y < is.height && x >= 0 && x < is.width) X(r, k) = in.data(at(is, c, y, x));
              }
        }
      const Eigen::MatrixXd Y = matmul(i, 0, to_ints(X, l.act_bits, l.name), lt);
      for (int c = 0; c < oshape.channels; ++c)
        for (Eigen::Index r = 0; r < Y.rows(); ++r)
          out.data(static_cast<Eigen::Index>(c) * Y.rows() + r) = Y(r, c);
      return out;
    }
    case LayerKind::FC: {
      const Eigen::MatrixXd X = in.data.matrix().transpose();
      out.data = matmul(i, 0, to_ints(X, l.act_bits, l.name), lt).row(0).transpose().array();
      return out;
    }
    case LayerKind::LSTM:
    case LayerKind::GRU: return run_recurrent(i, in, lt);
    case LayerKind::ReLU: out.data = in.data.max(0.0); return out;
    case LayerKind::Tanh: out.data = in.data.tanh(); return out;
    case LayerKind::Sigmoid: out.data = in.data.unaryExpr(&sigmoid); return out;
    case LayerKind::Quantize: {
      const double lv = max_level(l.quant_bits);
      double step = l.quant_step;
      if (!(step > 0.0)) {
        const double peak = in.data.abs().maxCoeff();
        step = peak > 0.0 ? peak / lv : 1.0;
      }
      out.data = in.data.unaryExpr([&](double v) { return std::clamp(std::round(v / step), -lv, lv); });
      return out;
    }
    case LayerKind::Norm: {
      const Eigen::Index plane = static_cast<Eigen::Index>(is.height) * is.width;
      for (int c = 0; c < is.channels; ++c) {
        const auto seg = in.data.segment(static_cast<Eigen::Index>(c) * plane, plane);
        const double mean = seg.mean();
        const double var = (seg - mean).square().mean();
        out.data.segment(static_cast<Eigen::Index>(c) * plane, plane) = (seg - mean) / std::sqrt(var + 1e-5);
      }
      return out;
    }
    case LayerKind::Pool: {
      const int kh = l.global_pool ? is.height : l.kernel_h;
      const int kw = l.global_pool ? is.width : l.kernel_w;
      const int stride = l.global_pool ? 1 : l.stride;
      const int pad = l.global_pool ? 0 : l.pad;
      for (int c = 0; c < oshape.channels; ++c)
        for (int oy = 0; oy < oshape.height; ++oy)
          for (int ox = 0; ox < oshape.width; ++ox) {
            double acc = l.max_pool ? -std::numeric_limits<double>::infinity() : 0.0;
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                const int y = oy * stride - pad + ky, x = ox * stride - pad + kx;
                if (y < 0 || y >= is.height || x < 0 || x >= is.width) continue;
                const double v = in.data(at(is, c, y, x));
                acc = l.max_pool ? std::max(acc, v) : acc + v;
              }
            out.data(at(oshape, c, oy, ox)) = l.max_pool ? acc : acc / (kh * kw);
          }
      return out;
    }
    case LayerKind::Concat: {
      Eigen::Index off = 0;
      for (const Tensor* t : ins) {
        out.data.segment(off, t->data.size()) = t->data;
        off += t->data.size();
      }
      return out;
    }
    case LayerKind::Add:
      for (const Tensor* t : ins) out.data += t->data;
      return out;
  }
  return out;
}

std::vector<int> stages_of(const DnnGraph& g) {
  std::vector<int> stage(g.layers.size(), 0);
  int cur = -1;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    if (has_weights(g.layers[i].kind)) ++cur;
    stage[i] = std::max(cur, 0);
  }
  return stage;
}

}  // namespace

SimResult simulate(const DnnGraph& g, const MappingPlan& plan, const AcceleratorConfig& accel,
                   const Tensor& input, const SimOptions& options) {
  accel.validate();
  if (plan.in_shapes.size() != g.layers.size())
    throw MappingError("mapping plan does not belong to this graph");
  for (const Phase& ph : plan.phases)
    if (ph.tiles_used() > accel.num_tiles)
      throw MappingError("phase uses more tiles than the accelerator has");

  SimResult res;
  ExecutionTrace& tr = res.trace;
  tr.tile_kind = accel.tile_kind;
  tr.strategy = plan.strategy;
  tr.num_tiles = accel.num_tiles;
  tr.sfu = accel.sfu;
  tr.ru_width = accel.ru_width;
  tr.banks = accel.banks;
  tr.inferences = g.recurrent() ? g.input.height : 1;
  tr.functional = options.functional;

  Runner runner(g, plan, accel, options, tr);
  const auto stage = stages_of(g);
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
    LayerTrace lt;
    lt.layer = i;
    lt.name = g.layers[sz(i)].name;
    lt.kind = g.layers[sz(i)].kind;
    lt.stage = stage[sz(i)];
    runner.count_layer(i, lt);
    tr.layers.push_back(std::move(lt));
  }

  for (int p = 0; p < static_cast<int>(plan.phases.size()); ++p) {
    PhaseTrace pt;
    pt.index = p;
    pt.tiles_used = plan.phases[sz(p)].tiles_used();
    for (const Placement& pl : plan.phases[sz(p)].placements) {
      const PartitionGrid& grid = plan.grids[sz(pl.layer)][sz(pl.matmul)];
      for (int q = pl.first; q < pl.first + pl.count; ++q) {
        const long vr = grid.valid_rows[sz(grid.row_of(q))];
        const long vc = grid.valid_cols[sz(grid.col_of(q))];
        pt.row_writes += vr * pl.replicas;
        pt.critical_row_writes = std::max(pt.critical_row_writes, vr);
        pt.weight_bytes += static_cast<double>(vr * vc) * 2.0 / 8.0;
      }
    }
    tr.phases.push_back(pt);
  }

  const Shape out_shape = g.layers.empty() ? g.input : plan.out_shapes.back();
  tr.io.dram_read_bytes = static_cast<double>(g.input.size()) * activation_bytes(g.input_bits);
  tr.io.dram_write_bytes =
      static_cast<double>(out_shape.size()) * runner.elem_bytes(static_cast<int>(g.layers.size()) - 1);

  if (!options.functional) return res;

  if (input.shape != g.input || input.data.size() != g.input.size())
    throw ShapeError("input tensor does not match the graph input");
  for (const Layer& l : g.layers)
    if (has_weights(l.kind) && l.weights.empty())
      throw ConfigError("layer '" + l.name + "' has no weights for a functional run");
  {
    const double lim = std::ldexp(1.0, g.input_bits);
    for (Eigen::Index k = 0; k < input.data.size(); ++k)
      if (input.data(k) != std::round(input.data(k)) || std::abs(input.data(k)) >= lim)
        throw InputError("graph input must hold " + std::to_string(g.input_bits) + "-bit integers");
  }

  std::vector<Tensor> outs;
  outs.reserve(g.layers.size());
  for (int i = 0; i < static_cast<int>(g.layers.size()); ++i) {
    std::vector<const Tensor*> ins;
    for (int p : g.producers(i)) ins.push_back(p == kGraphInput ? &input : &outs[sz(p)]);
    // Events were already counted; functional runs only add measured discharge.
    outs.push_back(runner.run_layer(i, ins, tr.layers[sz(i)]));
  }
  res.output = outs.empty() ? input : outs.back();
  return res;
}

SimResult simulate_baseline(const DnnGraph& g, const AcceleratorConfig& accel, BaselineKind kind,
                            const Tensor& input, const SimOptions& options) {
  const AcceleratorConfig b = baseline_config(accel, kind);
  const MappingPlan plan = plan_mapping(g, b);
  SimOptions o = options;
  o.errors = nullptr;
  return simulate(g, plan, b, input, o);
}

}  // namespace timdnn
