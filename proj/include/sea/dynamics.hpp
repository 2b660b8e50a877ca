#pragma once

// Instantaneous steepest-entropy-ascent construction: Lagrange multipliers,
// generalized affinity, rate vector and scalar diagnostics.

#include <functional>
#include <vector>

#include "sea/metric.hpp"
#include "sea/state.hpp"

namespace sea {

// Below this degree of disequilibrium the rate vector is set to zero and the
// state counts as equilibrium.
inline constexpr double kEquilibriumDod = 1e-24;
// Jacobi-scaled Gram condition beyond which the constraints are declared
// degenerate on the current support.
inline constexpr double kMaxGramCondition = 1e10;
// Largest constraint count accepted by the determinant-ratio construction.
inline constexpr std::size_t kMaxCramerConstraints = 6;

struct SeaOptions {
  double k_b = 1.0;
  double support_epsilon = kDefaultSupportEpsilon;
};

/// How the relaxation time tau is chosen at each state.
class TauPolicy {
 public:
  enum class Mode { constant, entropy_production, speed };
  using Rule = std::function<double(const Vector& gamma)>;

  TauPolicy() = default;

  static TauPolicy constant(double tau);
  /// tau chosen so that Pi_S equals the prescribed rate.
  static TauPolicy prescribed_entropy_production(double rate);
  static TauPolicy prescribed_entropy_production(Rule rate);
  /// tau chosen so that the metric speed sqrt(Pi|G|Pi) equals `speed`.
  static TauPolicy prescribed_speed(double speed);

  Mode mode() const noexcept { return mode_; }
  /// The constant tau, or the constant prescribed quantity.
  double value() const noexcept { return value_; }
  bool has_rule() const noexcept { return static_cast<bool>(rule_); }
  /// Prescribed quantity at gamma (tau itself in constant mode).
  double target(const Vector& gamma) const;

 private:
  Mode mode_ = Mode::constant;
  double value_ = 1.0;
  Rule rule_;
};

const char* to_string(TauPolicy::Mode mode);

/// A_ij = (Psi_i|G^-1|Psi_j), b_i = (Psi_i|G^-1|Phi).
struct GramSystem {
  Matrix a;
  Vector b;
};

/// Throws DegenerateError, naming the near-null combination of constraint
/// labels, when the Jacobi-scaled condition of A exceeds kMaxGramCondition.
GramSystem gram_system(const GradientVectors& grads, const MetricForm& form);
GramSystem gram_system(const SquareRootState& state,
                       const ConstraintSet& constraints,
                       const MetricField& metric, const SeaOptions& options = {});

/// beta with k_B A beta = b (Cholesky solve).
Vector solve_multipliers(const GramSystem& system, double k_b = 1.0);

/// Lambda = Phi - k_B sum_i beta_i Psi_i.
Vector affinity(const GradientVectors& grads, const Vector& beta,
                double k_b = 1.0);
Vector affinity(const SquareRootState& state, const ConstraintSet& constraints,
                const Vector& beta, const SeaOptions& options = {});

struct SeaSolution {
  Vector beta;
  double tau = 0.0;
  Vector phi;
  Vector lambda;
  Vector pi_gamma;
  double entropy_production = 0.0;
  double dod = 0.0;
  // sqrt((Pi|G|Pi)) = sqrt(DoD) / (k_B tau). The arc length element counts
  // twice this (dl = 2 sqrt((Pi|G|Pi)) dt).
  double speed = 0.0;
  double k_b = 1.0;
  bool at_equilibrium = false;
};

/// Core construction on already-restricted vectors. `gamma` is handed to the
/// tau rule only.
SeaSolution solve_sea(const GradientVectors& grads, const MetricForm& form,
                      const TauPolicy& tau, const Vector& gamma, double k_b);

/// Same quantities obtained by expanding the bordered Gram determinant
/// (factorial cost, c <= kMaxCramerConstraints). Kept as an independent
/// cross-check of solve_sea.
SeaSolution solve_sea_cramer(const GradientVectors& grads, const MetricForm& form,
                             const TauPolicy& tau, const Vector& gamma,
                             double k_b);

/// Full-length solution; components outside the support are exactly zero.
SeaSolution sea_direction(const SquareRootState& state,
                          const ConstraintSet& constraints,
                          const MetricField& metric, const TauPolicy& tau,
                          const SeaOptions& options = {});
SeaSolution sea_direction(const SquareRootState& state,
                          const ConstraintSet& constraints,
                          const MetricField& metric, const TauPolicy& tau,
                          const Support& support, const SeaOptions& options = {});
SeaSolution sea_direction_cramer(const SquareRootState& state,
                                 const ConstraintSet& constraints,
                                 const MetricField& metric, const TauPolicy& tau,
                                 const SeaOptions& options = {});

/// (Phi|Pi_gamma). Throws ConsistencyError unless it matches
/// DoD / (k_B tau) to 1e-10 relative, up to the rounding floor of the dot
/// product itself.
double entropy_production(const SeaSolution& solution);

/// (Lambda|G^-1|Lambda).
double degree_of_disequilibrium(const SquareRootState& state,
                                const ConstraintSet& constraints,
                                const MetricField& metric,
                                const SeaOptions& options = {});

/// tau from the policy and the current DoD. Prescribed modes throw
/// NumericalError at equilibrium.
double resolve_tau(const TauPolicy& policy, double dod, const Vector& gamma,
                   double k_b);
double resolve_tau(const TauPolicy& policy, const SquareRootState& state,
                   const ConstraintSet& constraints, const MetricField& metric,
                   const SeaOptions& options = {});

/// Bound on rounding in sum_j a_j b_j.
double dot_rounding_floor(const Vector& a, const Vector& b);

}  // namespace sea
