#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "timdnn/tile.hpp"

namespace timdnn {

using Rng = std::mt19937_64;

/// Deterministic stream for (seed, stream index) pairs.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// How the spread of the sensed bitline voltage depends on the state.
///  - Uniform: every state has standard deviation `sigma`.
///  - Proportional: the spread grows with discharge depth,
///    sigma_n = sigma * n / reference_count; the precharged state S0 is exact.
enum class NoiseProfile { Uniform, Proportional };

/// Nominal bitline voltages of states S0..S10 and their Gaussian spread.
struct BitlineVoltageModel {
  double supply = 1.0;         // volts
  std::vector<double> margins;  // volts, drop from S(i-1) to S(i), i = 1..10
  double sigma = 0.024;        // volts
  NoiseProfile profile = NoiseProfile::Proportional;
  int reference_count = 8;

  static constexpr int kMaxState = 10;

  /// 96 mV margins through S8, then 80 mV and 60 mV, 1.0 V supply, 24 mV.
  static BitlineVoltageModel defaults();

  void validate() const;
  double nominal(int n) const;
  double sigma_at(int n) const;
  double sample(int n, Rng& rng) const;

  /// ADC thresholds at the midpoints between adjacent nominal voltages for
  /// codes 0..adc_max; index i separates code i from code i + 1.
  std::vector<double> thresholds(int adc_max) const;
};

/// Flash-ADC decision for a sensed voltage.
int sense_code(double volts, std::span<const double> thresholds);

/// Conditional sensing error probability P(SE | n) and the probability that
/// an error at state n reads one code high.
struct SenseErrorTable {
  std::vector<double> p_error;
  std::vector<double> p_up;

  static SenseErrorTable zeros(int adc_max);
  int adc_max() const { return static_cast<int>(p_error.size()) - 1; }
  double rate(int n) const { return p_error.at(static_cast<std::size_t>(n)); }
};

struct StateOccupancy {
  std::vector<double> p;
};

struct ErrorTableOptions {
  int samples_per_state = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  // Multi-code mistakes throw ModelViolation when set; otherwise they count
  // toward p_error like single-code mistakes.
  bool strict_adjacency = true;
};

struct StateSamples {
  int state = 0;
  std::vector<double> volts;
  std::vector<int> codes;
};

/// Monte Carlo draws of the sensed voltage and ADC code for one state.
StateSamples sample_state(const BitlineVoltageModel& model, int n, int adc_max, int samples,
                          Rng& rng);

/// Monte Carlo sensing-error table. State n uses stream (seed, n), so the
/// table does not depend on the worker count.
SenseErrorTable build_error_table(const BitlineVoltageModel& model, int adc_max,
                                  const ErrorTableOptions& options = {});

/// Applies sensing errors to one column's codes: each field independently
/// moves by +-1 with its state's error probability, clamped to [0, adc_max].
ColumnCounts inject(ColumnCounts counts, const SenseErrorTable& table, Rng& rng);

enum class CountSide { Pos, Neg, Both };

/// Normalized histogram of digitized codes. Empty input throws.
StateOccupancy state_occupancy(std::span<const ColumnCounts> counts, int adc_max,
                               CountSide side = CountSide::Pos);
StateOccupancy occupancy_from_histogram(std::span<const double> histogram);

/// Aggregate error probability: sum over n of P(SE | n) * P(n).
double error_probability(const SenseErrorTable& table, const StateOccupancy& occupancy);

/// Per-access hook that injects sensing errors with a private stream.
class SensingErrorInjector {
 public:
  SensingErrorInjector(SenseErrorTable table, Rng rng)
      : table_(std::move(table)), rng_(std::move(rng)) {}

  void operator()(std::span<ColumnCounts> counts);

  long injected() const { return injected_; }
  long conversions() const { return conversions_; }

 private:
  SenseErrorTable table_;
  Rng rng_;
  long injected_ = 0;
  long conversions_ = 0;
};

/// Column codes of a synthetic sparse ternary workload: per-column weight
/// density and per-access input density are drawn uniformly from the given
/// ranges, then each of `rows` products is +1/-1/0 accordingly; counts are
/// clipped to `adc_max`.
std::vector<ColumnCounts> synthetic_dnn_counts(long columns_total, int rows, int adc_max,
                                               Rng& rng, double weight_density_lo = 0.3,
                                               double weight_density_hi = 0.7,
                                               double input_density_lo = 0.2,
                                               double input_density_hi = 0.6);

}  // namespace timdnn
