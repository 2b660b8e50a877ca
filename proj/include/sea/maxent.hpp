#pragma once

// Constrained maximum-entropy distributions by Newton's method on the convex
// dual, plus divergence and disequilibrium measures built on them.

#include "sea/integrator.hpp"

namespace sea {

struct MaxEntOptions {
  // Stop when |achieved_i - target_i| <= tolerance * (1 + |target_i|).
  double tolerance = 1e-12;
  int max_iterations = 200;
  // Smallest accepted max-min weight (times support size) of the
  // feasibility program.
  double feasibility_margin = 1e-12;

  bool operator==(const MaxEntOptions&) const = default;
};

struct MaxEntResult {
  // Full-length probability vector; zero outside the support.
  Vector distribution;
  // nu with p_j = exp(-sum_i nu_i C_ij); the unity entry carries log Z.
  Vector dual_multipliers;
  Vector achieved_means;
  int iterations = 0;
  double residual_norm = 0.0;
  Support support;
};

/// Largest s such that some weights w_j >= s/m on the m support points
/// reproduce the targets (m * s lies in [0, 1]; 0 means the targets sit on
/// the boundary of the support's constraint hull, negative means outside).
double feasibility_margin(const ConstraintSet& constraints, const Support& support);

/// Throws InfeasibleError when the targets are not strictly inside the hull
/// and NumericalError if Newton fails to converge.
MaxEntResult solve_maxent(const ConstraintSet& constraints, const Support& support,
                          const MaxEntOptions& options = {});
MaxEntResult solve_maxent(const ConstraintSet& constraints,
                          const MaxEntOptions& options = {});

/// sum_j [p_j ln(p_j / q_j) - p_j + q_j] with 0 ln(0/q) = 0, which is the
/// usual sum_j p_j ln(p_j / q_j) for normalized p and q. Throws InvalidArgument when p
/// puts mass where q has none.
double kl_divergence(const Vector& p, const Vector& q);
double kl_divergence(const SquareRootState& state, const MaxEntResult& maxent);

struct DisequilibriumReport {
  double dod = 0.0;
  double path_length = 0.0;
  double path_tail_bound = 0.0;
  double kl_divergence = 0.0;
  // (Lambda|Lambda), the affinity norm under the uniform metric
  double affinity_norm_sq = 0.0;
  TrajectoryStatus status = TrajectoryStatus::converged;
};

/// Local (DoD, affinity norm) and global (SEA path length, KL divergence)
/// measures for one state. They coincide only asymptotically near MaxEnt.
DisequilibriumReport disequilibrium_report(
    const SquareRootState& state, const ConstraintSet& constraints,
    const MetricField& metric, const TauPolicy& tau = TauPolicy::constant(1.0),
    const IntegratorConfig& config = {}, const SeaOptions& options = {});

}  // namespace sea
