#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "urllc/baselines.hpp"
#include "urllc/channel.hpp"
#include "urllc/fbl_rate.hpp"
#include "urllc/sca_scheduler.hpp"

namespace urllc {

enum class SweepAxis { num_users, blocklength, epsilon };
enum class Method { sca_tuned, sca_plain, es, shannon };

const char* to_string(SweepAxis a);
const char* to_string(Method m);
SweepAxis parse_axis(const std::string& s);
Method parse_method(const std::string& s);

struct SweepConfig {
  SweepAxis axis = SweepAxis::num_users;
  std::vector<double> axis_values;
  NetworkConfig network;  // Nt = 4, SNR 10 dB, sigma 1, K = 8 unless swept
  double epsilon = 1e-6;
  std::int64_t blocklength = 128;
  std::int64_t data_bits = 256;
  ScaConfig sca;
  int trials = 100;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods{Method::sca_tuned, Method::sca_plain, Method::shannon};
  int es_user_cap = kDefaultEsUserCap;
  /// Worker threads; 0 means hardware concurrency.
  int threads = 0;

  /// Sorts axis values and checks every field. Throws std::invalid_argument.
  void validate();
  /// Network and rate parameters at one axis value.
  NetworkConfig network_at(double axis_value) const;
  FblParams fbl_at(double axis_value) const;
};

/// Default grids per axis.
std::vector<double> default_axis_values(SweepAxis axis);

/// Channel seed of one trial. Independent of the axis value, so every point
/// of a sweep sees the same drops (common random numbers).
std::uint64_t trial_seed(std::uint64_t master_seed, int axis_index, int trial);

struct TrialRecord {
  int axis_index = 0;
  int trial = 0;
  std::string method;  // sca_tuned, sca_plain, es, shannon_verified, shannon_raw
  int cardinality = 0;
  int iterations = 0;
  double wall_ms = 0.0;
};

struct SweepRow {
  double axis_value = 0.0;
  std::string method;
  double mean_cardinality = 0.0;
  double stderr_cardinality = 0.0;
  double mean_iters = 0.0;
  double mean_wall_ms = 0.0;
  int infeasible_trials = 0;  // trials where the method scheduled nobody
};

struct SweepResult {
  SweepAxis axis = SweepAxis::num_users;
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> trials;  // sorted by (axis index, trial, method)
};

/// Runs every method on every trial. Output does not depend on thread count.
SweepResult run_sweep(SweepConfig config);

/// Aggregates sorted trial records into rows (mean, standard error, ...).
std::vector<SweepRow> aggregate(const std::vector<TrialRecord>& trials, const std::vector<double>& axis_values);

/// Runs the requested methods on one realization, appending records.
void run_trial(const SweepConfig& config, const ChannelRealization& realization, double axis_value,
               int axis_index, int trial, std::vector<TrialRecord>& out);

inline constexpr const char* kCsvHeader =
    "axis_value,method,mean_cardinality,stderr,mean_iters,infeasible_trials";

/// RFC-4180 style, LF endings, round-trip precision. Timing goes in an extra
/// trailing mean_wall_ms column only when requested.
void write_csv(std::ostream& out, const SweepResult& result, bool with_timing = false);
std::vector<SweepRow> read_csv(std::istream& in);

/// Sweep configuration from JSON text; missing keys keep their defaults.
SweepConfig read_sweep_config(std::istream& in);
SweepConfig load_sweep_config(const std::string& path);

}  // namespace urllc
