#include "timdnn/error_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

namespace timdnn {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x7453u};
  return Rng(seq);
}

BitlineVoltageModel BitlineVoltageModel::defaults() {
  BitlineVoltageModel m;
  m.margins.assign(8, 0.096);
  m.margins.push_back(0.080);
  m.margins.push_back(0.060);
  return m;
}

void BitlineVoltageModel::validate() const {
  if (static_cast<int>(margins.size()) != kMaxState)
    throw ConfigError("bitline model needs 10 state margins");
  for (double d : margins)
    if (!(d > 0.0)) throw ConfigError("bitline margins must be positive");
  if (!(supply > 0.0)) throw ConfigError("supply must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (reference_count < 1) throw ConfigError("reference_count must be positive");
  if (nominal(kMaxState) <= 0.0) throw ConfigError("margins exceed the supply");
}

double BitlineVoltageModel::nominal(int n) const {
  if (n < 0 || n > kMaxState)
    throw AddressError("bitline state S" + std::to_string(n) + " beyond saturation");
  double v = supply;
  for (int i = 0; i < n; ++i) v -= margins.at(static_cast<std::size_t>(i));
  return v;
}

double BitlineVoltageModel::sigma_at(int n) const {
  if (profile == NoiseProfile::Uniform) return sigma;
  return sigma * static_cast<double>(n) / static_cast<double>(reference_count);
}

double BitlineVoltageModel::sample(int n, Rng& rng) const {
  const double mean = nominal(n);
  const double s = sigma_at(n);
  if (s == 0.0) return mean;
  std::normal_distribution<double> noise(0.0, s);
  return mean + noise(rng);
}

std::vector<double> BitlineVoltageModel::thresholds(int adc_max) const {
  if (adc_max < 1 || adc_max > kMaxState) throw ConfigError("adc_max must lie in [1, 10]");
  std::vector<double> t(static_cast<std::size_t>(adc_max));
  for (int i = 0; i < adc_max; ++i) t[static_cast<std::size_t>(i)] = 0.5 * (nominal(i) + nominal(i + 1));
  return t;
}

int sense_code(double volts, std::span<const double> thresholds) {
  // Thresholds decrease with the code; count how many lie above the sample.
  int code = 0;
  for (double t : thresholds) {
    if (volts < t)
      ++code;
    else
      break;
  }
  return code;
}

SenseErrorTable SenseErrorTable::zeros(int adc_max) {
  SenseErrorTable t;
  t.p_error.assign(static_cast<std::size_t>(adc_max) + 1, 0.0);
  t.p_up.assign(static_cast<std::size_t>(adc_max) + 1, 0.5);
  return t;
}

StateSamples sample_state(const BitlineVoltageModel& model, int n, int adc_max, int samples,
                          Rng& rng) {
  const auto thr = model.thresholds(adc_max);
  StateSamples s;
  s.state = n;
  s.volts.reserve(static_cast<std::size_t>(samples));
  s.codes.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double v = model.sample(n, rng);
    s.volts.push_back(v);
    s.codes.push_back(sense_code(v, thr));
  }
  return s;
}

SenseErrorTable build_error_table(const BitlineVoltageModel& model, int adc_max,
                                  const ErrorTableOptions& options) {
  model.validate();
  if (options.samples_per_state < 1000)
    throw ConfigError("error table needs at least 1000 samples per state");
  const int states = adc_max + 1;
  SenseErrorTable table = SenseErrorTable::zeros(adc_max);
  std::vector<long> far(static_cast<std::size_t>(states), 0);

  auto run_state = [&](int n) {
    Rng rng = make_stream(options.seed, static_cast<std::uint64_t>(n));
    const auto s = sample_state(model, n, adc_max, options.samples_per_state, rng);
    long up = 0, down = 0, multi = 0;
    for (int code : s.codes) {
      const int d = code - n;
      if (d == 0) continue;
      if (std::abs(d) >= 2) ++multi;
      (d > 0 ? up : down) += 1;
    }
    const auto idx = static_cast<std::size_t>(n);
    table.p_error[idx] = static_cast<double>(up + down) / options.samples_per_state;
    table.p_up[idx] = (up + down) > 0 ? static_cast<double>(up) / (up + down) : 0.5;
    far[idx] = multi;
  };

  const int workers = std::clamp(options.workers, 1, states);
  if (workers == 1) {
    for (int n = 0; n < states; ++n) run_state(n);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int n = w; n < states; n += workers) run_state(n);
      });
    for (auto& t : pool) t.join();
  }

  if (options.strict_adjacency) {
    for (int n = 0; n < states; ++n)
      if (far[static_cast<std::size_t>(n)] > 0)
        throw ModelViolation("state S" + std::to_string(n) + ": " +
                             std::to_string(far[static_cast<std::size_t>(n)]) +
                             " samples sensed two or more codes away; sigma is too large for "
                             "the adjacent-error model");
  }
  return table;
}

ColumnCounts inject(ColumnCounts counts, const SenseErrorTable& table, Rng& rng) {
  const int hi = table.adc_max();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto perturb = [&](int& v) {
    const double p = table.rate(v);
    if (p <= 0.0 || u(rng) >= p) return;
    const int dir = u(rng) < table.p_up[static_cast<std::size_t>(v)] ? 1 : -1;
    v = std::clamp(v + dir, 0, hi);
  };
  perturb(counts.pos);
  perturb(counts.neg);
  return counts;
}

StateOccupancy state_occupancy(std::span<const ColumnCounts> counts, int adc_max,
                               CountSide side) {
  if (counts.empty()) throw InputError("state_occupancy: empty count stream");
  std::vector<double> h(static_cast<std::size_t>(adc_max) + 1, 0.0);
  auto add = [&](int v) {
    if (v < 0 || v > adc_max) throw InputError("state_occupancy: code outside [0, adc_max]");
    h[static_cast<std::size_t>(v)] += 1.0;
  };
  for (const auto& c : counts) {
    if (side != CountSide::Neg) add(c.pos);
    if (side != CountSide::Pos) add(c.neg);
  }
  return occupancy_from_histogram(h);
}

StateOccupancy occupancy_from_histogram(std::span<const double> histogram) {
  const double total = std::accumulate(histogram.begin(), histogram.end(), 0.0);
  if (!(total > 0.0)) throw InputError("occupancy histogram is empty");
  StateOccupancy occ;
  occ.p.reserve(histogram.size());
  for (double v : histogram) occ.p.push_back(v / total);
  return occ;
}

double error_probability(const SenseErrorTable& table, const StateOccupancy& occupancy) {
  if (table.p_error.size() != occupancy.p.size())
    throw ShapeError("error table and occupancy span different code ranges");
  double pe = 0.0;
  for (std::size_t n = 0; n < occupancy.p.size(); ++n) pe += table.p_error[n] * occupancy.p[n];
  return pe;
}

void SensingErrorInjector::operator()(std::span<ColumnCounts> counts) {
  for (auto& c : counts) {
    const ColumnCounts before = c;
    c = inject(c, table_, rng_);
    injected_ += (c.pos != before.pos) + (c.neg != before.neg);
    conversions_ += 2;
  }
}

std::vector<ColumnCounts> synthetic_dnn_counts(long columns_total, int rows, int adc_max,
                                               Rng& rng, double weight_density_lo,
                                               double weight_density_hi,
                                               double input_density_lo,
                                               double input_density_hi) {
  std::uniform_real_distribution<double> dw(weight_density_lo, weight_density_hi);
  std::uniform_real_distribution<double> da(input_density_lo, input_density_hi);
  std::vector<ColumnCounts> out;
  out.reserve(static_cast<std::size_t>(columns_total));
  for (long i = 0; i < columns_total; ++i) {
    const double q = 0.5 * dw(rng) * da(rng);  // per-row probability of +1 (and of -1)
    std::binomial_distribution<int> pos(rows, q);
    const int n = pos(rng);
    std::binomial_distribution<int> neg(rows - n, q / (1.0 - q));
    const int k = neg(rng);
    out.push_back({std::min(n, adc_max), std::min(k, adc_max)});
  }
  return out;
}

}  // namespace timdnn
