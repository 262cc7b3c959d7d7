#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urllc/channel.hpp"
#include "urllc/conic.hpp"
#include "urllc/fbl_rate.hpp"
#include "urllc/sca_subproblem.hpp"

namespace urllc {

struct ScaConfig {
  double mu = 0.05;
  double delta = 1e-3;
  int max_iters = 100;
  double round_threshold = 0.5;
  bool tuning_enabled = true;
  /// Zero or negative means "number of users".
  int max_tuning_rounds = 0;
  double beam_power_floor = 1e-8;
  conic::SolverSettings solver;

  /// Throws std::invalid_argument.
  void validate() const;
};

enum class RunStatus { converged, max_iters, degenerate };

const char* to_string(RunStatus s);

struct SchedulingSolution {
  UserSet scheduled_set;
  Beams weights;  // all K users, zero when unscheduled
  std::vector<double> per_user_sinr;
  std::vector<double> per_user_rate_nats;
  double total_power = 0.0;
  int iterations_used = 0;
  int tuning_rounds_used = 0;
  RunStatus status = RunStatus::degenerate;

  int cardinality() const { return static_cast<int>(scheduled_set.size()); }
};

/// One row of the optional convergence trace.
struct TraceRow {
  int tuning_round = 0;
  int tau = 0;
  double objective = 0.0;
  double kappa_sum = 0.0;
  double power = 0.0;
};

using TraceSink = std::function<void(const TraceRow&)>;

/// Users individually feasible under full-power MRT: P ||h_k||^2 >= gamma_k.
UserSet prefilter(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                  double power_budget);

/// MRT beams with equal power over `candidates` (minus `zeroed`, whose initial
/// beams are zero), phi = interference + 1 and kappa = min(1, gamma / gamma_tilde).
/// The objective field holds the surrogate objective at the initial point.
ScaState initialize(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                    double power_budget, std::span<const int> candidates, const ScaConfig& config,
                    std::span<const int> zeroed = {});

struct IterateResult {
  ScaState state;
  bool solver_failed = false;
};

/// Solves one subproblem around `state`. On solver failure the input state is
/// returned unchanged with solver_failed set.
IterateResult iterate(const ChannelRealization& realization, const ScaLayout& layout,
                      std::span<const double> gamma_tilde, double power_budget, const ScaState& state,
                      const ScaConfig& config);

/// Relative-change stopping test with the near-zero guard.
bool converged(double previous, double current, double delta);

/// Per-user SINR targets: min_sinr(params) for every user.
std::vector<double> fbl_targets(const FblParams& params, int num_users);

/// Final SINR/rate bookkeeping for a scheduled set and its beams.
SchedulingSolution verified_solution(const ChannelRealization& realization, const FblParams& params,
                                     UserSet scheduled, Beams weights);

/// Full pipeline without tuning. `gamma_tilde` overrides the FBL targets (the
/// Shannon baseline passes 2^(D/n) - 1).
SchedulingSolution run(const ChannelRealization& realization, const FblParams& params,
                       double power_budget, const ScaConfig& config,
                       std::optional<std::vector<double>> gamma_tilde = std::nullopt,
                       const TraceSink& trace = {});

/// run() followed by the restart pass that zeroes the initial beam of an
/// unscheduled user still holding power, one user per round, keeping the best
/// result by cardinality then power.
SchedulingSolution run_with_tuning(const ChannelRealization& realization, const FblParams& params,
                                   double power_budget, const ScaConfig& config,
                                   std::optional<std::vector<double>> gamma_tilde = std::nullopt,
                                   const TraceSink& trace = {});

/// CSV writer for TraceRow streams.
TraceSink csv_trace(std::ostream& out);

}  // namespace urllc
