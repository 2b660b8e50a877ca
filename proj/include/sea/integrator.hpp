#pragma once

// Adaptive integration of d(gamma)/dt = Pi_gamma from an initial state to
// the MaxEnt endpoint.

#include <cstddef>
#include <string>
#include <vector>

#include "sea/dynamics.hpp"

namespace sea {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 1e-3;
  double max_step = 1.0;
  double stop_dod = 1e-16;
  double max_time = 1e4;
  // A sample is recorded every `record_every` accepted steps, and also at the
  // first accepted step past each multiple of `record_interval` when > 0.
  std::size_t record_every = 1;
  double record_interval = 0.0;
  // Fixed-step mode when false: steps are taken with initial_step unchanged.
  bool adaptive = true;
  // Conserved means are re-projected when their relative drift exceeds
  // projection_factor * rel_tol.
  double projection_factor = 0.1;
  // Steps are shortened so that Pi_gamma changes by at most this fraction per
  // step, which keeps the record fine enough to differentiate S(t) and l(t).
  // Zero turns the limit off.
  double max_velocity_change = 0.03;

  /// Throws InvalidArgument on nonpositive tolerances or limits.
  void validate() const;

  bool operator==(const IntegratorConfig&) const = default;
};

enum class TrajectoryStatus { converged, max_time_reached, error };

const char* to_string(TrajectoryStatus status);

struct TrajectorySample {
  double t = 0.0;
  Vector gamma;
  double entropy = 0.0;
  double entropy_production = 0.0;
  double dod = 0.0;
  double arc_length = 0.0;
  Vector conserved;
  double tau = 0.0;
  double speed = 0.0;
  // max_i |mean_i - target_i| / (1 + |target_i|)
  double drift_max = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  TrajectoryStatus status = TrajectoryStatus::error;
  std::string message;
  ConstraintSet constraints;  // with targets read from the initial state
  Support initial_support;
  Support final_support;
  double k_b = 1.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t projections = 0;

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
  SquareRootState final_state() const;
};

struct StepResult {
  SquareRootState state;
  double dt_used = 0.0;
  double dt_next = 0.0;
  double error_estimate = 0.0;
};

/// One accepted Dormand-Prince 5(4) step (retrying smaller on rejection).
/// Targets come from `constraints` when set, otherwise from `state`.
/// Throws NumericalError on step-size underflow (< 1e-15).
StepResult step(const SquareRootState& state, const ConstraintSet& constraints,
                const MetricField& metric, const TauPolicy& tau,
                const IntegratorConfig& config, double dt_suggest,
                const SeaOptions& options = {});

/// Integrates until DoD < stop_dod (status converged) or max_time. Targets
/// are always read from the initial state. Numerical failures after the
/// first sample end the record with status error and a message; failures at
/// the initial state throw.
TrajectoryRecord integrate(const SquareRootState& initial,
                           const ConstraintSet& constraints,
                           const MetricField& metric, const TauPolicy& tau,
                           const IntegratorConfig& config = {},
                           const SeaOptions& options = {});

struct PathLength {
  double value = 0.0;
  // Bound on the part of the path beyond the last sample.
  double tail_bound = 0.0;
  // Set when the record did not converge; value is then a partial length.
  bool partial = false;
};

/// d_SEA = 2 * integral of sqrt((Pi|G|Pi)) dt along the record.
PathLength path_length(const TrajectoryRecord& record);
/// Arc length between samples i <= j.
double path_length(const TrajectoryRecord& record, std::size_t i, std::size_t j);

struct BalanceReport {
  // max_k |dS/dt (numerical) - Pi_S| / max_k Pi_S
  double balance_mismatch = 0.0;
  // max relative mismatch of k_B tau v = (dS/dt) / v with v = (dl/dt) / 2,
  // over samples with DoD >= 1e-6 DoD(0)
  double speed_gradient_mismatch = 0.0;
  std::size_t samples_checked = 0;
  bool sign_consistent = true;
};

/// Differentiates the recorded S(t) and l(t) numerically (five-point
/// Lagrange stencils, applied to ln(y_end - y) on converged records) and
/// compares with the recorded rates.
BalanceReport entropy_balance_check(const TrajectoryRecord& record);

}  // namespace sea
