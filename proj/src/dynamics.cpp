#include "sea/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sea/errors.hpp"
#include "internal.hpp"

namespace sea {

TauPolicy TauPolicy::constant(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("constant tau must be finite and > 0");
  }
  TauPolicy p;
  p.mode_ = Mode::constant;
  p.value_ = tau;
  return p;
}

TauPolicy TauPolicy::prescribed_entropy_production(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw InvalidArgument("prescribed entropy production must be finite and > 0");
  }
  TauPolicy p;
  p.mode_ = Mode::entropy_production;
  p.value_ = rate;
  return p;
}

TauPolicy TauPolicy::prescribed_entropy_production(Rule rate) {
  if (!rate) throw InvalidArgument("entropy production rule is empty");
  TauPolicy p;
  p.mode_ = Mode::entropy_production;
  p.value_ = 0.0;
  p.rule_ = std::move(rate);
  return p;
}

TauPolicy TauPolicy::prescribed_speed(double speed) {
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw InvalidArgument("prescribed speed must be finite and > 0");
  }
  TauPolicy p;
  p.mode_ = Mode::speed;
  p.value_ = speed;
  return p;
}

double TauPolicy::target(const Vector& gamma) const {
  return rule_ ? rule_(gamma) : value_;
}

const char* to_string(TauPolicy::Mode mode) {
  switch (mode) {
    case TauPolicy::Mode::constant: return "constant";
    case TauPolicy::Mode::entropy_production: return "entropy_production";
    case TauPolicy::Mode::speed: return "speed";
  }
  return "unknown";
}

double dot_rounding_floor(const Vector& a, const Vector& b) {
  const double eps = std::numeric_limits<double>::epsilon();
  return 16.0 * eps * a.cwiseAbs().dot(b.cwiseAbs());
}

namespace detail {

long double dot_extended(const Vector& a, const Vector& b) {
  long double s = 0.0L;
  for (Index j = 0; j < a.size(); ++j) {
    s += static_cast<long double>(a(j)) * static_cast<long double>(b(j));
  }
  return s;
}

std::string label_of(const GradientVectors& grads, Index i) {
  if (static_cast<std::size_t>(i) < grads.labels.size()) {
    return grads.labels[static_cast<std::size_t>(i)];
  }
  return "C" + std::to_string(i);
}

void check_gram_condition(const Matrix& a, const GradientVectors& grads) {
  const Index c = a.rows();
  Vector d = a.diagonal();
  for (Index i = 0; i < c; ++i) {
    if (!(d(i) > 0.0)) {
      throw DegenerateError("degenerate constraints on current support: '" +
                            label_of(grads, i) +
                            "' has a zero gradient on the support");
    }
  }
  const Vector s = d.cwiseSqrt().cwiseInverse();
  const Matrix scaled = s.asDiagonal() * a * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled);
  const Vector& ev = eig.eigenvalues();
  const double cond = ev(0) > 0.0 ? ev(c - 1) / ev(0)
                                  : std::numeric_limits<double>::infinity();
  if (cond > kMaxGramCondition) {
    Vector null = s.cwiseProduct(eig.eigenvectors().col(0));
    null /= null.cwiseAbs().maxCoeff();
    std::ostringstream os;
    os.precision(4);
    os << "degenerate constraints on current support (Gram condition " << cond
       << "); near-null combination:";
    for (Index i = 0; i < c; ++i) {
      if (std::abs(null(i)) > 1e-6) {
        os << " " << (null(i) < 0 ? "-" : "+") << std::abs(null(i)) << "*"
           << label_of(grads, i);
      }
    }
    throw DegenerateError(os.str());
  }
}

Vector affinity_extended(const Vector& phi, const Matrix& psi,
                         const Vector& beta, double k_b) {
  Vector lambda(phi.size());
  for (Index j = 0; j < phi.size(); ++j) {
    long double s = phi(j);
    for (Index i = 0; i < psi.cols(); ++i) {
      s -= static_cast<long double>(k_b) * static_cast<long double>(beta(i)) *
           static_cast<long double>(psi(j, i));
    }
    lambda(j) = static_cast<double>(s);
  }
  return lambda;
}

void finish_solution(SeaSolution& sol, const MetricForm& form,
                     const TauPolicy& tau, const Vector& gamma,
                     const Vector& g_inv_lambda) {
  const double k_b = sol.k_b;
  if (!(sol.dod >= kEquilibriumDod)) {
    sol.at_equilibrium = true;
    sol.tau = tau.mode() == TauPolicy::Mode::constant
                  ? tau.value()
                  : std::numeric_limits<double>::infinity();
    sol.pi_gamma = Vector::Zero(sol.lambda.size());
    sol.entropy_production = 0.0;
    sol.speed = 0.0;
    sol.dod = std::max(sol.dod, 0.0);
    return;
  }
  sol.tau = resolve_tau(tau, sol.dod, gamma, k_b);
  sol.pi_gamma = g_inv_lambda / (k_b * sol.tau);
  sol.speed = g_norm(form, sol.pi_gamma);
  sol.entropy_production = entropy_production(sol);
}

}  // namespace detail

GramSystem gram_system(const GradientVectors& grads, const MetricForm& form) {
  if (grads.psi.rows() != form.size() || grads.phi.size() != form.size()) {
    throw InvalidArgument("gram_system: gradient and metric sizes differ");
  }
  const Matrix g_inv_psi = form.apply_inverse(grads.psi);
  GramSystem sys;
  sys.a = grads.psi.transpose() * g_inv_psi;
  sys.a = 0.5 * (sys.a + sys.a.transpose()).eval();
  sys.b = g_inv_psi.transpose() * grads.phi;
  detail::check_gram_condition(sys.a, grads);
  return sys;
}

GramSystem gram_system(const SquareRootState& state,
                       const ConstraintSet& constraints,
                       const MetricField& metric, const SeaOptions& options) {
  const Support support = Support::of(state, options.support_epsilon);
  const GradientVectors full = gradient_vectors(state, constraints, options.k_b);
  GradientVectors local{support.restrict(full.phi),
                        support.restrict_rows(full.psi), full.labels};
  return gram_system(local, metric.evaluate(state, support));
}

Vector solve_multipliers(const GramSystem& system, double k_b) {
  Eigen::LLT<Matrix> llt(system.a);
  if (llt.info() != Eigen::Success) {
    throw DegenerateError(
        "degenerate constraints on current support: Gram matrix is not "
        "positive-definite");
  }
  Vector beta = llt.solve(system.b);
  const Vector r = system.b - system.a * beta;
  beta += llt.solve(r);
  return beta / k_b;
}

Vector affinity(const GradientVectors& grads, const Vector& beta, double k_b) {
  if (beta.size() != grads.psi.cols()) {
    throw InvalidArgument("affinity: multiplier count does not match constraints");
  }
  return detail::affinity_extended(grads.phi, grads.psi, beta, k_b);
}

Vector affinity(const SquareRootState& state, const ConstraintSet& constraints,
                const Vector& beta, const SeaOptions& options) {
  return affinity(gradient_vectors(state, constraints, options.k_b), beta,
                  options.k_b);
}

SeaSolution solve_sea(const GradientVectors& grads, const MetricForm& form,
                      const TauPolicy& tau, const Vector& gamma, double k_b) {
  if (!(k_b > 0.0)) throw InvalidArgument("k_B must be > 0");
  const GramSystem sys = gram_system(grads, form);
  Eigen::LLT<Matrix> llt(sys.a);
  if (llt.info() != Eigen::Success) {
    throw DegenerateError(
        "degenerate constraints on current support: Gram matrix is not "
        "positive-definite");
  }

  SeaSolution sol;
  sol.k_b = k_b;
  sol.phi = grads.phi;
  sol.beta = solve_multipliers(sys, k_b);
  sol.lambda = detail::affinity_extended(grads.phi, grads.psi, sol.beta, k_b);
  Vector w = form.apply_inverse(sol.lambda);

  // One correction so that (Psi_i|G^-1|Lambda) vanishes to the rounding of
  // Lambda itself rather than that of Phi.
  Vector leak(grads.psi.cols());
  for (Index i = 0; i < leak.size(); ++i) {
    leak(i) = static_cast<double>(detail::dot_extended(grads.psi.col(i), w));
  }
  const Vector dbeta = llt.solve(leak) / k_b;
  sol.beta += dbeta;
  sol.lambda -= k_b * (grads.psi * dbeta);
  w = form.apply_inverse(sol.lambda);

  sol.dod = static_cast<double>(detail::dot_extended(sol.lambda, w));
  detail::finish_solution(sol, form, tau, gamma, w);
  return sol;
}

namespace {

SeaSolution expand_solution(SeaSolution local, const Support& support) {
  if (support.is_full()) return local;
  local.phi = support.expand(local.phi);
  local.lambda = support.expand(local.lambda);
  local.pi_gamma = support.expand(local.pi_gamma);
  return local;
}

template <typename Solver>
SeaSolution run_on_support(const SquareRootState& state,
                           const ConstraintSet& constraints,
                           const MetricField& metric, const TauPolicy& tau,
                           const Support& support, const SeaOptions& options,
                           Solver&& solver) {
  if (state.size() != constraints.dimension()) {
    throw InvalidArgument("state and constraint dimensions differ");
  }
  if (support.full_size() != state.size()) {
    throw InvalidArgument("support and state dimensions differ");
  }
  if (support.size() == 0) throw InvalidArgument("state has empty support");
  const GradientVectors full = gradient_vectors(state, constraints, options.k_b);
  GradientVectors local{support.restrict(full.phi),
                        support.restrict_rows(full.psi), full.labels};
  const MetricForm form = metric.evaluate(state, support);
  return expand_solution(solver(local, form, tau, state.gamma(), options.k_b),
                         support);
}

}  // namespace

SeaSolution sea_direction(const SquareRootState& state,
                          const ConstraintSet& constraints,
                          const MetricField& metric, const TauPolicy& tau,
                          const SeaOptions& options) {
  return sea_direction(state, constraints, metric, tau,
                       Support::of(state, options.support_epsilon), options);
}

SeaSolution sea_direction(const SquareRootState& state,
                          const ConstraintSet& constraints,
                          const MetricField& metric, const TauPolicy& tau,
                          const Support& support, const SeaOptions& options) {
  return run_on_support(state, constraints, metric, tau, support, options,
                        solve_sea);
}

SeaSolution sea_direction_cramer(const SquareRootState& state,
                                 const ConstraintSet& constraints,
                                 const MetricField& metric, const TauPolicy& tau,
                                 const SeaOptions& options) {
  return run_on_support(state, constraints, metric, tau,
                        Support::of(state, options.support_epsilon), options,
                        solve_sea_cramer);
}

double entropy_production(const SeaSolution& solution) {
  if (solution.at_equilibrium) return 0.0;
  const double via_phi =
      static_cast<double>(detail::dot_extended(solution.phi, solution.pi_gamma));
  const double via_dod = solution.dod / (solution.k_b * solution.tau);
  const double tol = 1e-10 * std::abs(via_dod) +
                     dot_rounding_floor(solution.phi, solution.pi_gamma);
  if (!(std::abs(via_phi - via_dod) <= tol) || via_phi < -1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "entropy production mismatch: (Phi|Pi) = " << via_phi
       << " but DoD/(k_B tau) = " << via_dod;
    throw ConsistencyError(os.str());
  }
  return via_phi;
}

double degree_of_disequilibrium(const SquareRootState& state,
                                const ConstraintSet& constraints,
                                const MetricField& metric,
                                const SeaOptions& options) {
  return sea_direction(state, constraints, metric, TauPolicy::constant(1.0),
                       options)
      .dod;
}

double resolve_tau(const TauPolicy& policy, double dod, const Vector& gamma,
                   double k_b) {
  double tau = 0.0;
  switch (policy.mode()) {
    case TauPolicy::Mode::constant:
      return policy.value();
    case TauPolicy::Mode::entropy_production:
    case TauPolicy::Mode::speed: {
      if (!(dod >= kEquilibriumDod)) {
        throw NumericalError("relaxation time undefined at equilibrium");
      }
      const double target = policy.target(gamma);
      if (!(target > 0.0) || !std::isfinite(target)) {
        throw NumericalError("prescribed rate must be finite and > 0");
      }
      tau = policy.mode() == TauPolicy::Mode::entropy_production
                ? dod / (k_b * target)
                : std::sqrt(dod) / (k_b * target);
      break;
    }
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw NumericalError("resolved relaxation time is not a positive number");
  }
  return tau;
}

double resolve_tau(const TauPolicy& policy, const SquareRootState& state,
                   const ConstraintSet& constraints, const MetricField& metric,
                   const SeaOptions& options) {
  if (policy.mode() == TauPolicy::Mode::constant) return policy.value();
  const double dod =
      degree_of_disequilibrium(state, constraints, metric, options);
  return resolve_tau(policy, dod, state.gamma(), options.k_b);
}

}  // namespace sea
