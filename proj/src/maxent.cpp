#include "sea/maxent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sea/errors.hpp"

namespace sea {

namespace {

// Log-partition data of the exponential family at nu (reduced to the
// non-unity rows, with constraint values shifted by their targets).
struct DualPoint {
  double value = 0.0;       // log sum_j exp(-x_j . nu)
  Vector weights;           // normalized
  Vector mean;              // E[x]
};

DualPoint evaluate_dual(const Matrix& x, const Vector& nu) {
  const Vector exponent = -(x * nu);
  const double shift = exponent.maxCoeff();
  DualPoint d;
  d.weights = (exponent.array() - shift).exp().matrix();
  long double total = 0.0L;
  for (Index j = 0; j < d.weights.size(); ++j) total += d.weights(j);
  d.weights /= static_cast<double>(total);
  d.value = shift + std::log(static_cast<double>(total));
  d.mean = Vector::Zero(x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    long double s = 0.0L;
    for (Index j = 0; j < x.rows(); ++j) {
      s += static_cast<long double>(d.weights(j)) * x(j, i);
    }
    d.mean(i) = static_cast<double>(s);
  }
  return d;
}

}  // namespace

MaxEntResult solve_maxent(const ConstraintSet& constraints,
                          const MaxEntOptions& options) {
  return solve_maxent(constraints, Support::full(constraints.dimension()), options);
}

MaxEntResult solve_maxent(const ConstraintSet& constraints, const Support& support,
                          const MaxEntOptions& options) {
  if (!constraints.has_targets()) {
    throw InvalidArgument("solve_maxent needs constraint targets");
  }
  if (support.full_size() != constraints.dimension()) {
    throw InvalidArgument("solve_maxent: support and constraint dimensions differ");
  }
  const double margin = feasibility_margin(constraints, support);
  if (!(margin > options.feasibility_margin)) {
    std::ostringstream os;
    os << "constraint targets are not strictly inside the hull of the "
       << "support's constraint values (max-min weight margin " << margin << ")";
    throw InfeasibleError(os.str());
  }

  const Matrix c_full = support.restrict_rows(constraints.matrix());
  const Vector& targets = constraints.targets();
  const Index c = c_full.cols();
  const auto unity = static_cast<Index>(constraints.unity_index());

  std::vector<Index> active;
  for (Index i = 0; i < c; ++i) {
    if (i != unity) active.push_back(i);
  }
  const Index k = static_cast<Index>(active.size());
  Matrix x(c_full.rows(), k);
  Vector tol(k);
  for (Index a = 0; a < k; ++a) {
    const Index i = active[static_cast<std::size_t>(a)];
    x.col(a) = c_full.col(i).array() - targets(i);
    tol(a) = options.tolerance * (1.0 + std::abs(targets(i)));
  }

  Vector nu = Vector::Zero(k);
  DualPoint point = evaluate_dual(x, nu);
  int iterations = 0;
  auto converged = [&](const DualPoint& p) {
    for (Index a = 0; a < k; ++a) {
      if (std::abs(p.mean(a)) > tol(a)) return false;
    }
    return true;
  };

  while (k > 0 && !converged(point)) {
    if (iterations >= options.max_iterations) {
      std::ostringstream os;
      os << "MaxEnt dual Newton did not converge in " << options.max_iterations
         << " iterations (residual " << point.mean.norm() << ")";
      throw NumericalError(os.str());
    }
    ++iterations;
    // Gradient of the dual is -E[x]; Hessian is the covariance of x.
    const Vector grad = -point.mean;
    const Matrix centered = x.rowwise() - point.mean.transpose();
    Matrix hess = centered.transpose() * point.weights.asDiagonal() * centered;
    Eigen::LLT<Matrix> llt(hess);
    if (llt.info() != Eigen::Success) {
      hess += 1e-12 * Matrix::Identity(k, k);
      llt.compute(hess);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("MaxEnt dual Hessian is singular");
      }
    }
    const Vector dir = -llt.solve(grad);
    const double slope = grad.dot(dir);
    double alpha = 1.0;
    DualPoint trial;
    const double grad_norm = grad.norm();
    for (int ls = 0; ls < 60; ++ls) {
      trial = evaluate_dual(x, nu + alpha * dir);
      if (trial.value <= point.value + 1e-4 * alpha * slope) break;
      // Near the optimum the decrease drowns in the rounding of the dual
      // value; a shrinking gradient is then the only usable signal.
      if (trial.mean.norm() < 0.5 * grad_norm) break;
      alpha *= 0.5;
    }
    nu += alpha * dir;
    point = std::move(trial);
  }

  MaxEntResult result;
  result.support = support;
  result.iterations = iterations;
  result.distribution = support.expand(point.weights);
  result.dual_multipliers = Vector::Zero(c);
  for (Index a = 0; a < k; ++a) {
    result.dual_multipliers(active[static_cast<std::size_t>(a)]) = nu(a);
  }
  // p_j = exp(-sum_i nu_i C_ij) with the unity entry absorbing log Z.
  Vector exponent = Vector::Zero(c_full.rows());
  for (Index a = 0; a < k; ++a) {
    exponent -= nu(a) * c_full.col(active[static_cast<std::size_t>(a)]);
  }
  const double shift = exponent.maxCoeff();
  const double log_z = shift + std::log((exponent.array() - shift).exp().sum());
  result.dual_multipliers(unity) = log_z;

  result.achieved_means = Vector(c);
  for (Index i = 0; i < c; ++i) {
    long double s = 0.0L;
    for (Index j = 0; j < c_full.rows(); ++j) {
      s += static_cast<long double>(point.weights(j)) * c_full(j, i);
    }
    result.achieved_means(i) = static_cast<double>(s);
  }
  result.residual_norm = (result.achieved_means - targets).norm();
  return result;
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) {
    throw InvalidArgument("kl_divergence: length mismatch");
  }
  // Each term p ln(p/q) - p + q is nonnegative; the extra terms cancel when
  // both vectors sum to 1 and keep the value >= 0 when they do so only
  // approximately (integrated endpoints).
  long double sum = 0.0L;
  for (Index j = 0; j < p.size(); ++j) {
    if (p(j) <= 0.0) {
      sum += q(j);
      continue;
    }
    if (!(q(j) > 0.0)) {
      std::ostringstream os;
      os << "kl_divergence: entry " << j
         << " has mass in the state but none in the reference distribution";
      throw InvalidArgument(os.str());
    }
    sum += static_cast<long double>(p(j)) * std::log(p(j) / q(j)) -
           static_cast<long double>(p(j)) + static_cast<long double>(q(j));
  }
  return static_cast<double>(sum);
}

double kl_divergence(const SquareRootState& state, const MaxEntResult& maxent) {
  return kl_divergence(state.probabilities(), maxent.distribution);
}

DisequilibriumReport disequilibrium_report(const SquareRootState& state,
                                           const ConstraintSet& constraints,
                                           const MetricField& metric,
                                           const TauPolicy& tau,
                                           const IntegratorConfig& config,
                                           const SeaOptions& options) {
  const ConstraintSet bound = constraints.with_targets(state);
  const Support support = Support::of(state, options.support_epsilon);
  DisequilibriumReport report;

  const SeaSolution sol = sea_direction(state, bound, metric,
                                        TauPolicy::constant(1.0), support, options);
  report.dod = sol.dod;
  report.affinity_norm_sq = sol.lambda.squaredNorm();

  const MaxEntResult maxent = solve_maxent(bound, support);
  report.kl_divergence = std::max(0.0, kl_divergence(state, maxent));

  if (sol.at_equilibrium || sol.dod < config.stop_dod) {
    report.status = TrajectoryStatus::converged;
    return report;
  }
  const TrajectoryRecord record = integrate(state, bound, metric, tau, config, options);
  const PathLength length = path_length(record);
  report.path_length = length.value;
  report.path_tail_bound = length.tail_bound;
  report.status = record.status;
  return report;
}

}  // namespace sea
