#include "timdnn/validate.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "timdnn/error_model.hpp"
#include "timdnn/tile.hpp"

namespace timdnn {

namespace {

constexpr int L = 16;
constexpr int N = 256;

std::int8_t draw_trit(Rng& rng, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  if (x >= density) return 0;
  return x < 0.5 * density ? 1 : -1;
}

TritMatrix random_block(Rng& rng, double density) {
  TritMatrix w(L, N);
  for (int c = 0; c < N; ++c)
    for (int r = 0; r < L; ++r) w(r, c) = draw_trit(rng, density);
  return w;
}

// Zeroes weights until no column can produce more than `cap` products of one
// sign for any input; keeps every raw count within the ADC range.
void cap_column_support(TritMatrix& w, int cap) {
  for (int c = 0; c < N; ++c) {
    int nz = 0;
    for (int r = 0; r < L; ++r)
      if (w(r, c) != 0 && ++nz > cap) w(r, c) = 0;
  }
}

TpcArray load_block(const TritMatrix& w) {
  TileConfig cfg;
  cfg.blocks = 1;
  TpcArray arr(cfg);
  arr.load(w);
  return arr;
}

AccessHooks fault_hooks(bool fault) {
  AccessHooks h;
  if (fault)
    h.perturb = [](std::span<ColumnCounts> cs) { cs[0].pos = cs[0].pos > 0 ? cs[0].pos - 1 : 1; };
  return h;
}

struct Suite {
  std::string name;
  // Returns an empty string on success, a description otherwise.
  std::function<std::string(Rng&, bool fault)> run_case;
};

std::string mismatch(int col, double got, double want) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "column " << col << ": tile " << got << ", oracle " << want;
  return ss.str();
}

std::string unweighted_case(Rng& rng, bool fault) {
  TritMatrix w = random_block(rng, 0.6);
  cap_column_support(w, 8);
  TritVector in(L);
  for (int r = 0; r < L; ++r) in(r) = draw_trit(rng, 0.7);
  const TpcArray arr = load_block(w);
  const Eigen::VectorXi out = matvec_unweighted(arr, 0, in, fault_hooks(fault));
  for (int c = 0; c < N; ++c) {
    int want = 0;
    for (int r = 0; r < L; ++r) want += w(r, c) * in(r);
    if (out(c) != want) return mismatch(c, out(c), want);
  }
  return {};
}

std::string two_step_case(Rng& rng, bool fault) {
  std::uniform_real_distribution<double> s(0.1, 2.0);
  const TernarySystem sys = TernarySystem::asymmetric(s(rng), s(rng), s(rng), s(rng));
  TritMatrix w = random_block(rng, 0.6);
  cap_column_support(w, 8);
  TritVector in(L);
  for (int r = 0; r < L; ++r) in(r) = draw_trit(rng, 0.7);
  const TpcArray arr = load_block(w);
  const Eigen::VectorXd out = matvec_weighted(arr, 0, in, sys, fault_hooks(fault));
  for (int c = 0; c < N; ++c) {
    double want = 0;
    for (int r = 0; r < L; ++r) {
      const double wv = w(r, c) > 0 ? sys.pos_weight : (w(r, c) < 0 ? -sys.neg_weight : 0.0);
      const double iv = in(r) > 0 ? sys.pos_input : (in(r) < 0 ? -sys.neg_input : 0.0);
      want += wv * iv;
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(want));
    if (std::abs(out(c) - want) > tol) return mismatch(c, out(c), want);
  }
  return {};
}

std::string bitserial_case(Rng& rng, bool fault) {
  std::uniform_int_distribution<int> pb(1, 8);
  const int bits = pb(rng);
  const int lim = (1 << bits) - 1;
  std::uniform_int_distribution<int> a(-lim, lim);
  TritMatrix w = random_block(rng, 0.6);
  cap_column_support(w, 8);
  Eigen::VectorXi acts(L);
  for (int r = 0; r < L; ++r) acts(r) = a(rng);
  const TpcArray arr = load_block(w);
  const Eigen::VectorXd out =
      matvec_bitserial(arr, 0, acts, bits, TernarySystem::unweighted(), fault_hooks(fault));
  for (int c = 0; c < N; ++c) {
    long want = 0;
    for (int r = 0; r < L; ++r) want += static_cast<long>(w(r, c)) * acts(r);
    if (out(c) != static_cast<double>(want)) return mismatch(c, out(c), static_cast<double>(want));
  }
  return {};
}

std::string clipping_case(Rng& rng, bool fault) {
  // Dense columns drive raw counts past the ADC range.
  TritMatrix w = random_block(rng, 0.95);
  TritVector in(L);
  for (int r = 0; r < L; ++r) in(r) = draw_trit(rng, 0.95);
  const TpcArray arr = load_block(w);
  const Eigen::VectorXi out = matvec_unweighted(arr, 0, in, fault_hooks(fault));
  for (int c = 0; c < N; ++c) {
    int n = 0, k = 0;
    for (int r = 0; r < L; ++r) {
      const int p = w(r, c) * in(r);
      n += p == 1;
      k += p == -1;
    }
    const int want = std::min(n, 8) - std::min(k, 8);
    if (out(c) != want) return mismatch(c, out(c), want);
  }
  return {};
}

}  // namespace

std::vector<SuiteResult> run_validation(const ValidateOptions& options) {
  const Suite suites[] = {
      {"unweighted", unweighted_case},
      {"weighted-two-step", two_step_case},
      {"bit-serial", bitserial_case},
      {"clipping", clipping_case},
  };
  std::vector<SuiteResult> results;
  std::uint64_t stream_base = 0;
  for (const auto& suite : suites) {
    SuiteResult r;
    r.name = suite.name;
    const long fault_case = options.cases / 2;
    for (long i = 0; i < options.cases; ++i) {
      Rng rng = make_stream(options.seed, stream_base + static_cast<std::uint64_t>(i));
      const std::string err = suite.run_case(rng, options.inject_fault && i == fault_case);
      ++r.cases;
      if (!err.empty()) {
        r.pass = false;
        r.failing_case = i;
        r.detail = err;
        break;
      }
    }
    results.push_back(r);
    stream_base += 1ULL << 40;
  }
  return results;
}

}  // namespace timdnn
