#pragma once

// Metric tensor fields G(gamma) on square-root probability space and the
// concrete symmetric positive-definite forms they evaluate to.

#include <functional>
#include <memory>
#include <string>

#include "sea/state.hpp"

namespace sea {

// Forms whose condition estimate exceeds this refuse to solve.
inline constexpr double kMaxMetricCondition = 1e12;

/// A concrete SPD bilinear form, either diagonal or dense.
///
/// Dense forms carry their Cholesky factor; copies share it.
class MetricForm {
 public:
  static MetricForm identity(Index n);
  /// Throws InvalidArgument naming the first nonpositive or non-finite weight.
  static MetricForm diagonal(Vector weights);
  /// Throws InvalidArgument when g is not symmetric or its Cholesky (LLT)
  /// factorization fails.
  static MetricForm dense(const Matrix& g);

  Index size() const noexcept;
  bool is_identity() const noexcept { return identity_; }
  bool is_diagonal() const noexcept { return !dense_; }
  /// Diagonal weights; empty for dense forms.
  const Vector& weights() const noexcept { return weights_; }

  Vector apply(const Vector& v) const;
  /// Solves G x = v. Throws NumericalError when the condition estimate
  /// exceeds kMaxMetricCondition.
  Vector apply_inverse(const Vector& v) const;
  Matrix apply_inverse(const Matrix& v) const;

  /// v^T G v
  double quadratic(const Vector& v) const;
  /// v^T G^{-1} v
  double inverse_quadratic(const Vector& v) const;

  double condition_estimate() const noexcept;
  Matrix to_dense() const;

  /// Principal sub-form on the support's indices.
  MetricForm restricted(const Support& support) const;

 private:
  struct Dense;

  void guard_condition() const;

  Vector weights_;
  std::shared_ptr<const Dense> dense_;
  bool identity_ = false;
};

/// sqrt(v^T G v).
double g_norm(const MetricForm& form, const Vector& v);

/// x with G x = v.
Vector apply_inverse(const MetricForm& form, const Vector& v);

enum class MetricKind { uniform, diagonal, diagonal_field, dense };

const char* to_string(MetricKind kind);

/// Maps gamma to strictly positive diagonal weights.
using WeightRule = std::function<Vector(const Vector& gamma)>;

/// State-dependent metric G(gamma).
///
/// State-independent kinds validate and factor once at construction.
class MetricField {
 public:
  /// G = I (Fisher-Rao on square-root space).
  static MetricField uniform();
  static MetricField diagonal(Vector weights);
  static MetricField diagonal_field(WeightRule rule, std::string name,
                                    double parameter = 0.0);
  /// w_j(gamma) = 1 / (gamma_j^2 + delta): resistance grows where
  /// probability is small.
  static MetricField resistive(double delta = 1e-9);
  static MetricField dense(const Matrix& g);

  MetricKind kind() const noexcept { return kind_; }
  const std::string& field_name() const noexcept { return field_name_; }
  double field_parameter() const noexcept { return field_parameter_; }
  const Vector& weights() const noexcept { return weights_; }
  Matrix matrix() const;

  MetricForm evaluate(const SquareRootState& state) const;
  /// Same as evaluate(state) without validating gamma; used on trial points
  /// of the integrator.
  MetricForm evaluate_at(const Vector& gamma) const;
  MetricForm evaluate(const SquareRootState& state, const Support& support) const;

 private:
  MetricKind kind_ = MetricKind::uniform;
  Vector weights_;
  std::shared_ptr<const MetricForm> fixed_;
  WeightRule rule_;
  std::string field_name_;
  double field_parameter_ = 0.0;
};

}  // namespace sea
