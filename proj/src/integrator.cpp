#include "sea/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "internal.hpp"
#include "sea/errors.hpp"

namespace sea {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB = {35.0 / 384,     0.0,           500.0 / 1113,
                                      125.0 / 192,    -2187.0 / 6784, 11.0 / 84,
                                      0.0};
constexpr std::array<double, 7> kBStar = {5179.0 / 57600,    0.0,
                                          7571.0 / 16695,    393.0 / 640,
                                          -92097.0 / 339200, 187.0 / 2100,
                                          1.0 / 40};

constexpr double kMinStep = 1e-15;
constexpr double kFloorMagnitude = 1e-12;
constexpr double kStableStepFactor = 2.5;
constexpr double kResolvedGrowth = 2.0;

// Right-hand side restricted to a fixed support. Trial points may carry
// slightly negative components; Phi is odd in gamma so the formulas still
// apply there.
class Flow {
 public:
  Flow(const ConstraintSet& constraints, const MetricField& metric,
       const TauPolicy& tau, Support support, const SeaOptions& options)
      : constraints_(constraints),
        metric_(metric),
        tau_(tau),
        options_(options) {
    reset_support(std::move(support));
  }

  void reset_support(Support support) {
    support_ = std::move(support);
    c_local_ = support_.restrict_rows(constraints_.matrix());
    labels_.clear();
    for (const auto& r : constraints_.rows()) labels_.push_back(r.name);
    fixed_form_.reset();
    if (metric_.kind() != MetricKind::diagonal_field) {
      fixed_form_ =
          metric_.evaluate_at(Vector::Ones(support_.full_size())).restricted(support_);
    }
  }

  const Support& support() const { return support_; }
  const Matrix& constraint_matrix() const { return c_local_; }

  MetricForm form_at(const Vector& local) const {
    if (fixed_form_) return *fixed_form_;
    return metric_.evaluate_at(support_.expand(local)).restricted(support_);
  }

  SeaSolution eval(const Vector& local) const {
    GradientVectors g;
    g.phi.resize(local.size());
    for (Index j = 0; j < local.size(); ++j) {
      const double x = local(j);
      g.phi(j) = x != 0.0 ? -2.0 * options_.k_b * x * std::log(x * x) : 0.0;
    }
    g.psi = 2.0 * local.asDiagonal() * c_local_;
    g.labels = labels_;
    return solve_sea(g, form_at(local), tau_, support_.expand(local),
                     options_.k_b);
  }

  Vector means(const Vector& local) const {
    Vector m(c_local_.cols());
    for (Index i = 0; i < m.size(); ++i) {
      long double s = 0.0L;
      for (Index j = 0; j < local.size(); ++j) {
        s += static_cast<long double>(local(j) * local(j)) * c_local_(j, i);
      }
      m(i) = static_cast<double>(s);
    }
    return m;
  }

  // Minimal G-norm correction onto the constraint set, linearized and
  // iterated a few times.
  void project(Vector& local, const Vector& targets) const {
    for (int iter = 0; iter < 3; ++iter) {
      const Vector r = targets - means(local);
      if (r.cwiseAbs().maxCoeff() == 0.0) break;
      const Matrix psi = 2.0 * local.asDiagonal() * c_local_;
      const MetricForm form = form_at(local);
      const Matrix g_inv_psi = form.apply_inverse(psi);
      const Matrix a = psi.transpose() * g_inv_psi;
      Eigen::LLT<Matrix> llt(a);
      if (llt.info() != Eigen::Success) {
        throw DegenerateError("constraint projection failed: singular Gram matrix");
      }
      local += g_inv_psi * llt.solve(r);
    }
  }

 private:
  const ConstraintSet& constraints_;
  const MetricField& metric_;
  const TauPolicy& tau_;
  SeaOptions options_;
  Support support_;
  Matrix c_local_;
  std::vector<std::string> labels_;
  std::optional<MetricForm> fixed_form_;
};

double relative_drift(const Vector& means, const Vector& targets) {
  double d = 0.0;
  for (Index i = 0; i < means.size(); ++i) {
    d = std::max(d, std::abs(means(i) - targets(i)) / (1.0 + std::abs(targets(i))));
  }
  return d;
}

struct Attempt {
  Vector y;
  double error = 0.0;
  double arc = 0.0;
  // |lambda| of the dominant mode, from the two stages evaluated at t + h
  double stiffness = 0.0;
  bool negative_rejected = false;
  std::vector<Index> floored;  // local indices set to zero
};

Attempt attempt_step(const Flow& flow, const Vector& y, const SeaSolution& k1,
                     double h, const IntegratorConfig& config) {
  std::array<Vector, 7> k;
  std::array<double, 7> speed{};
  k[0] = k1.pi_gamma;
  speed[0] = k1.speed;
  Vector y6;
  for (int s = 1; s < 7; ++s) {
    Vector ys = y;
    for (int r = 0; r < s; ++r) {
      if (kA[s][r] != 0.0) ys += h * kA[s][r] * k[r];
    }
    const SeaSolution sol = flow.eval(ys);
    k[s] = sol.pi_gamma;
    speed[s] = sol.speed;
    if (s == 5) y6 = std::move(ys);
  }
  Attempt out;
  out.y = y;
  Vector err = Vector::Zero(y.size());
  for (int s = 0; s < 7; ++s) {
    if (kB[s] != 0.0) out.y += h * kB[s] * k[s];
    err += h * (kB[s] - kBStar[s]) * k[s];
    out.arc += h * kB[s] * 2.0 * speed[s];
  }
  double sum = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    const double sc = config.abs_tol +
                      config.rel_tol * std::max(std::abs(y(j)), std::abs(out.y(j)));
    sum += (err(j) / sc) * (err(j) / sc);
  }
  out.error = y.size() > 0 ? std::sqrt(sum / static_cast<double>(y.size())) : 0.0;
  // The last stage sits at the new solution, so (k7 - k6) / (y7 - y6) is a
  // free estimate of the Jacobian's dominant eigenvalue (Hairer-Wanner).
  const double dy = (out.y - y6).norm();
  if (dy > 0.0) out.stiffness = (k[6] - k[5]).norm() / dy;

  for (Index j = 0; j < out.y.size(); ++j) {
    if (out.y(j) < 0.0) {
      if (out.y(j) > -kFloorMagnitude) {
        out.floored.push_back(j);
      } else {
        out.negative_rejected = true;
      }
    }
  }
  return out;
}

double next_step(double h, double error, bool accepted) {
  if (error == 0.0) return h * 5.0;
  double factor = 0.9 * std::pow(error, -0.2);
  factor = std::clamp(factor, 0.2, 5.0);
  if (!accepted) factor = std::min(factor, 1.0);
  return h * factor;
}

// Integration state shared by step() and integrate().
class Driver {
 public:
  Driver(const ConstraintSet& constraints, const MetricField& metric,
         const TauPolicy& tau, const IntegratorConfig& config,
         const SeaOptions& options, const SquareRootState& start,
         Support support)
      : config_(config),
        constraints_(constraints),
        flow_(constraints, metric, tau, support, options) {
    y_ = flow_.support().restrict(start.gamma());
    targets_ = constraints.targets();
    k1_ = flow_.eval(y_);
  }

  const Vector& y() const { return y_; }
  const SeaSolution& current() const { return k1_; }
  const Support& support() const { return flow_.support(); }
  const Flow& flow() const { return flow_; }
  const Vector& targets() const { return targets_; }
  std::size_t rejected() const { return rejected_; }
  std::size_t projections() const { return projections_; }

  struct Taken {
    double h = 0.0;
    double h_next = 0.0;
    double error = 0.0;
    double arc = 0.0;
  };

  Taken advance(double h, double h_cap) {
    h = std::min(h, h_cap);
    for (;;) {
      if (!(h >= kMinStep)) {
        std::ostringstream os;
        os << "step size underflow (h = " << h
           << "); the flow is too stiff for the explicit stepper";
        throw NumericalError(os.str());
      }
      Attempt a = attempt_step(flow_, y_, k1_, h, config_);
      const bool ok = !a.negative_rejected &&
                      (!config_.adaptive || a.error <= 1.0);
      if (!ok) {
        ++rejected_;
        h = a.negative_rejected ? 0.5 * h : next_step(h, a.error, false);
        continue;
      }
      double h_next = h;
      if (config_.adaptive) {
        h_next = next_step(h, a.error, true);
        // Near MaxEnt the error estimate of decaying modes vanishes and
        // would let h run past the real stability boundary (about 3.3/|lambda|).
        if (a.stiffness > 0.0) h_next = std::min(h_next, kStableStepFactor / a.stiffness);
      }
      Taken taken{h, h_next, a.error, a.arc};
      y_ = std::move(a.y);
      if (!a.floored.empty()) {
        std::vector<Index> dropped;
        for (Index j : a.floored) {
          y_(j) = 0.0;
          dropped.push_back(support().indices()[static_cast<std::size_t>(j)]);
        }
        const Vector full = support().expand(y_);
        flow_.reset_support(support().without(dropped));
        y_ = flow_.support().restrict(full);
      }
      if (relative_drift(flow_.means(y_), targets_) >
          config_.projection_factor * config_.rel_tol) {
        flow_.project(y_, targets_);
        ++projections_;
        for (Index j = 0; j < y_.size(); ++j) {
          if (y_(j) < 0.0) {
            if (y_(j) > -kFloorMagnitude) {
              y_(j) = 0.0;
            } else {
              throw NumericalError(
                  "constraint projection produced a negative component");
            }
          }
        }
      }
      k1_ = flow_.eval(y_);
      return taken;
    }
  }

  SquareRootState state() const {
    return SquareRootState::from_gamma(support().expand(y_));
  }

 private:
  const IntegratorConfig& config_;
  const ConstraintSet& constraints_;
  Flow flow_;
  Vector y_;
  Vector targets_;
  SeaSolution k1_;
  std::size_t rejected_ = 0;
  std::size_t projections_ = 0;
};

TrajectorySample make_sample(double t, const Driver& d, double arc) {
  TrajectorySample s;
  s.t = t;
  const SquareRootState state = d.state();
  s.gamma = state.gamma();
  s.entropy = entropy(state, d.current().k_b);
  s.entropy_production = d.current().entropy_production;
  s.dod = d.current().dod;
  s.arc_length = arc;
  s.conserved = d.flow().means(d.y());
  s.tau = d.current().tau;
  s.speed = d.current().speed;
  s.drift_max = relative_drift(s.conserved, d.targets());
  return s;
}

}  // namespace

void IntegratorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string("integrator ") + name +
                            " must be finite and > 0");
    }
  };
  positive(rel_tol, "rel_tol");
  positive(abs_tol, "abs_tol");
  positive(initial_step, "initial_step");
  positive(max_step, "max_step");
  positive(stop_dod, "stop_dod");
  positive(max_time, "max_time");
  positive(projection_factor, "projection_factor");
  if (!(max_velocity_change >= 0.0) || !std::isfinite(max_velocity_change)) {
    throw InvalidArgument("integrator max_velocity_change must be >= 0");
  }
  if (record_every == 0) throw InvalidArgument("integrator record_every must be >= 1");
  if (!(record_interval >= 0.0) || !std::isfinite(record_interval)) {
    throw InvalidArgument("integrator record_interval must be >= 0");
  }
}

const char* to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::converged: return "converged";
    case TrajectoryStatus::max_time_reached: return "max_time_reached";
    case TrajectoryStatus::error: return "error";
  }
  return "unknown";
}

SquareRootState TrajectoryRecord::final_state() const {
  return SquareRootState::from_gamma(samples.back().gamma);
}

StepResult step(const SquareRootState& state, const ConstraintSet& constraints,
                const MetricField& metric, const TauPolicy& tau,
                const IntegratorConfig& config, double dt_suggest,
                const SeaOptions& options) {
  config.validate();
  const ConstraintSet bound =
      constraints.has_targets() ? constraints : constraints.with_targets(state);
  Driver driver(bound, metric, tau, config, options, state,
                Support::of(state, options.support_epsilon));
  const auto taken = driver.advance(dt_suggest, config.max_step);
  return {driver.state(), taken.h, taken.h_next, taken.error};
}

TrajectoryRecord integrate(const SquareRootState& initial,
                           const ConstraintSet& constraints,
                           const MetricField& metric, const TauPolicy& tau,
                           const IntegratorConfig& config,
                           const SeaOptions& options) {
  config.validate();
  TrajectoryRecord record;
  record.k_b = options.k_b;
  record.constraints = constraints.with_targets(initial);
  record.initial_support = Support::of(initial, options.support_epsilon);

  Driver driver(record.constraints, metric, tau, config, options, initial,
                record.initial_support);
  double t = 0.0;
  double arc = 0.0;
  double h = config.initial_step;
  std::size_t since_record = 0;
  double next_record_time = config.record_interval;
  record.samples.push_back(make_sample(t, driver, arc));

  auto finish = [&](TrajectoryStatus status, std::string message) {
    if (since_record > 0) record.samples.push_back(make_sample(t, driver, arc));
    record.status = status;
    record.message = std::move(message);
    record.final_support = driver.support();
    record.rejected_steps = driver.rejected();
    record.projections = driver.projections();
    return record;
  };

  try {
    for (;;) {
      if (driver.current().at_equilibrium || driver.current().dod < config.stop_dod) {
        return finish(TrajectoryStatus::converged, "");
      }
      if (t >= config.max_time) {
        return finish(TrajectoryStatus::max_time_reached,
                      "max_time reached before DoD fell below stop_dod");
      }
      const double cap = std::min(config.max_step, config.max_time - t);
      const Vector velocity_before = driver.current().pi_gamma;
      const auto taken = driver.advance(h, cap);
      // Land exactly on max_time instead of leaving a rounding gap.
      t = (taken.h == config.max_time - t) ? config.max_time : t + taken.h;
      arc += taken.arc;
      h = config.adaptive ? taken.h_next : config.initial_step;
      if (config.adaptive && config.max_velocity_change > 0.0) {
        h = std::min(h, kResolvedGrowth * taken.h);
        const Vector& velocity_after = driver.current().pi_gamma;
        if (velocity_after.size() == velocity_before.size()) {
          const double scale = std::min(velocity_before.norm(), velocity_after.norm());
          const double change = (velocity_after - velocity_before).norm();
          if (scale > 0.0 && change > 0.0) {
            h = std::min(h, taken.h * config.max_velocity_change * scale / change);
          }
        }
      }
      ++record.accepted_steps;
      ++since_record;
      bool due = since_record >= config.record_every;
      if (config.record_interval > 0.0 && t >= next_record_time) {
        due = true;
        while (next_record_time <= t) next_record_time += config.record_interval;
      }
      if (due) {
        record.samples.push_back(make_sample(t, driver, arc));
        since_record = 0;
      }
    }
  } catch (const NumericalError& e) {
    return finish(TrajectoryStatus::error, e.what());
  }
}

PathLength path_length(const TrajectoryRecord& record) {
  PathLength out;
  if (record.samples.empty()) return out;
  const auto& last = record.samples.back();
  out.value = last.arc_length;
  out.partial = record.status != TrajectoryStatus::converged;
  if (last.dod > 0.0 && std::isfinite(last.tau)) {
    out.tail_bound = std::sqrt(last.dod) * last.tau / record.k_b;
  }
  return out;
}

double path_length(const TrajectoryRecord& record, std::size_t i, std::size_t j) {
  if (i > j || j >= record.samples.size()) {
    throw InvalidArgument("path_length: sample range out of order or out of bounds");
  }
  return record.samples[j].arc_length - record.samples[i].arc_length;
}

namespace {

// Derivative at x[k] of the Lagrange polynomial through up to five samples
// centred on k.
double stencil_derivative(const std::vector<double>& x,
                          const std::vector<double>& y, std::size_t k) {
  const std::size_t n = x.size();
  const std::size_t width = std::min<std::size_t>(5, n);
  std::size_t lo = k >= width / 2 ? k - width / 2 : 0;
  if (lo + width > n) lo = n - width;
  const double xk = x[k];
  double d = 0.0;
  for (std::size_t i = lo; i < lo + width; ++i) {
    // L_i'(x_k)
    double li = 0.0;
    for (std::size_t m = lo; m < lo + width; ++m) {
      if (m == i) continue;
      double term = 1.0 / (x[i] - x[m]);
      for (std::size_t l = lo; l < lo + width; ++l) {
        if (l == i || l == m) continue;
        term *= (xk - x[l]) / (x[i] - x[l]);
      }
      li += term;
    }
    d += y[i] * li;
  }
  return d;
}

// On a converged record y(t) approaches its last value roughly exponentially,
// so ln(y_end - y) is far closer to a polynomial than y itself.
double derivative_toward_end(const std::vector<double>& x,
                             const std::vector<double>& y, std::size_t k) {
  const std::size_t n = x.size();
  if (n < 4 || k + 1 >= n) return stencil_derivative(x, y, k);
  const std::size_t width = std::min<std::size_t>(5, n - 1);
  std::size_t lo = k >= width / 2 ? k - width / 2 : 0;
  if (lo + width > n - 1) lo = n - 1 - width;
  const double end = y.back();
  std::vector<double> xs, logs;
  for (std::size_t i = lo; i < lo + width; ++i) {
    const double r = end - y[i];
    if (!(r > 0.0)) return stencil_derivative(x, y, k);
    xs.push_back(x[i]);
    logs.push_back(std::log(r));
  }
  return -(end - y[k]) * stencil_derivative(xs, logs, k - lo);
}

}  // namespace

BalanceReport entropy_balance_check(const TrajectoryRecord& record) {
  BalanceReport report;
  const auto& s = record.samples;
  if (s.size() < 3) return report;
  std::vector<double> t, entropy_values, arc;
  double peak = 0.0;
  for (const auto& sample : s) {
    t.push_back(sample.t);
    entropy_values.push_back(sample.entropy);
    arc.push_back(sample.arc_length);
    peak = std::max(peak, sample.entropy_production);
  }
  if (!(peak > 0.0)) return report;
  const double dod_floor = 1e-6 * s.front().dod;
  const bool converged = record.status == TrajectoryStatus::converged;
  auto derivative = [&](const std::vector<double>& y, std::size_t k) {
    return converged ? derivative_toward_end(t, y, k) : stencil_derivative(t, y, k);
  };
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double ds = derivative(entropy_values, k);
    const double mismatch = std::abs(ds - s[k].entropy_production) / peak;
    report.balance_mismatch = std::max(report.balance_mismatch, mismatch);
    ++report.samples_checked;
    if (s[k].entropy_production > 1e-6 * peak && !(ds > 0.0)) {
      report.sign_consistent = false;
    }
    if (s[k].dod >= dod_floor && s[k].dod > 0.0 && std::isfinite(s[k].tau)) {
      const double v = 0.5 * derivative(arc, k);
      if (v > 0.0) {
        const double lhs = record.k_b * s[k].tau * v;
        const double rhs = ds / v;
        report.speed_gradient_mismatch = std::max(
            report.speed_gradient_mismatch, std::abs(lhs - rhs) / std::abs(rhs));
      }
    }
  }
  return report;
}

}  // namespace sea
