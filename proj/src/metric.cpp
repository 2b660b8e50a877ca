#include "sea/metric.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sea/errors.hpp"

namespace sea {

struct MetricForm::Dense {
  Matrix g;
  Eigen::LLT<Matrix> llt;
  double condition = 1.0;
};

namespace {

void validate_weights(const Vector& w) {
  for (Index j = 0; j < w.size(); ++j) {
    if (!std::isfinite(w(j)) || w(j) <= 0.0) {
      std::ostringstream os;
      os << "metric weight " << j << " is " << w(j)
         << "; diagonal weights must be finite and > 0";
      throw InvalidArgument(os.str());
    }
  }
}

void require_length(Index got, Index expected, const char* what) {
  if (got != expected) {
    std::ostringstream os;
    os << what << ": length " << got << " does not match metric size "
       << expected;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

MetricForm MetricForm::identity(Index n) {
  MetricForm f;
  f.weights_ = Vector::Ones(n);
  f.identity_ = true;
  return f;
}

MetricForm MetricForm::diagonal(Vector weights) {
  if (weights.size() == 0) throw InvalidArgument("metric weights are empty");
  validate_weights(weights);
  MetricForm f;
  f.identity_ = (weights.array() == 1.0).all();
  f.weights_ = std::move(weights);
  return f;
}

MetricForm MetricForm::dense(const Matrix& g) {
  if (g.rows() == 0 || g.rows() != g.cols()) {
    throw InvalidArgument("dense metric must be a non-empty square matrix");
  }
  if (!g.allFinite()) throw InvalidArgument("dense metric has non-finite entries");
  const double scale = g.cwiseAbs().maxCoeff();
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("dense metric is not symmetric");
  }
  auto d = std::make_shared<Dense>();
  d->g = 0.5 * (g + g.transpose());
  d->llt.compute(d->g);
  if (d->llt.info() != Eigen::Success) {
    throw InvalidArgument(
        "dense metric rejected: Cholesky (LLT) factorization failed, the "
        "matrix is not positive-definite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(d->g, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  d->condition = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0)
                             : std::numeric_limits<double>::infinity();
  MetricForm f;
  f.dense_ = std::move(d);
  return f;
}

Index MetricForm::size() const noexcept {
  return dense_ ? dense_->g.rows() : weights_.size();
}

double MetricForm::condition_estimate() const noexcept {
  if (dense_) return dense_->condition;
  if (identity_ || weights_.size() == 0) return 1.0;
  return weights_.maxCoeff() / weights_.minCoeff();
}

void MetricForm::guard_condition() const {
  const double cond = condition_estimate();
  if (!(cond <= kMaxMetricCondition)) {
    std::ostringstream os;
    os << "metric is ill-conditioned (condition estimate " << cond
       << " > " << kMaxMetricCondition << ")";
    throw NumericalError(os.str());
  }
}

Vector MetricForm::apply(const Vector& v) const {
  require_length(v.size(), size(), "MetricForm::apply");
  if (identity_) return v;
  if (dense_) return dense_->g * v;
  return weights_.cwiseProduct(v);
}

Vector MetricForm::apply_inverse(const Vector& v) const {
  require_length(v.size(), size(), "MetricForm::apply_inverse");
  if (identity_) return v;
  guard_condition();
  if (!dense_) return v.cwiseQuotient(weights_);
  Vector x = dense_->llt.solve(v);
  const Vector r = v - dense_->g * x;
  x += dense_->llt.solve(r);
  return x;
}

Matrix MetricForm::apply_inverse(const Matrix& v) const {
  require_length(v.rows(), size(), "MetricForm::apply_inverse");
  if (identity_) return v;
  guard_condition();
  if (!dense_) return weights_.cwiseInverse().asDiagonal() * v;
  Matrix x = dense_->llt.solve(v);
  const Matrix r = v - dense_->g * x;
  x += dense_->llt.solve(r);
  return x;
}

double MetricForm::quadratic(const Vector& v) const {
  require_length(v.size(), size(), "MetricForm::quadratic");
  if (identity_) return v.squaredNorm();
  if (dense_) return v.dot(dense_->g * v);
  return v.cwiseAbs2().dot(weights_);
}

double MetricForm::inverse_quadratic(const Vector& v) const {
  return v.dot(apply_inverse(v));
}

Matrix MetricForm::to_dense() const {
  if (dense_) return dense_->g;
  return weights_.asDiagonal();
}

MetricForm MetricForm::restricted(const Support& support) const {
  require_length(support.full_size(), size(), "MetricForm::restricted");
  if (support.is_full()) return *this;
  if (identity_) return identity(support.size());
  if (!dense_) {
    MetricForm f;
    f.weights_ = support.restrict(weights_);
    return f;
  }
  return dense(support.restrict_square(dense_->g));
}

double g_norm(const MetricForm& form, const Vector& v) {
  return std::sqrt(std::max(0.0, form.quadratic(v)));
}

Vector apply_inverse(const MetricForm& form, const Vector& v) {
  return form.apply_inverse(v);
}

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::uniform: return "uniform";
    case MetricKind::diagonal: return "diagonal";
    case MetricKind::diagonal_field: return "diagonal_field";
    case MetricKind::dense: return "dense";
  }
  return "unknown";
}

MetricField MetricField::uniform() { return MetricField{}; }

MetricField MetricField::diagonal(Vector weights) {
  MetricField m;
  m.kind_ = MetricKind::diagonal;
  m.fixed_ = std::make_shared<const MetricForm>(MetricForm::diagonal(weights));
  m.weights_ = std::move(weights);
  return m;
}

MetricField MetricField::diagonal_field(WeightRule rule, std::string name,
                                        double parameter) {
  if (!rule) throw InvalidArgument("diagonal_field metric needs a weight rule");
  MetricField m;
  m.kind_ = MetricKind::diagonal_field;
  m.rule_ = std::move(rule);
  m.field_name_ = std::move(name);
  m.field_parameter_ = parameter;
  return m;
}

MetricField MetricField::resistive(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("resistive metric needs delta > 0");
  }
  return diagonal_field(
      [delta](const Vector& gamma) -> Vector {
        return (gamma.array().square() + delta).inverse().matrix();
      },
      "resistive", delta);
}

MetricField MetricField::dense(const Matrix& g) {
  MetricField m;
  m.kind_ = MetricKind::dense;
  m.fixed_ = std::make_shared<const MetricForm>(MetricForm::dense(g));
  return m;
}

Matrix MetricField::matrix() const {
  return kind_ == MetricKind::dense ? fixed_->to_dense() : Matrix{};
}

MetricForm MetricField::evaluate(const SquareRootState& state) const {
  return evaluate_at(state.gamma());
}

MetricForm MetricField::evaluate_at(const Vector& gamma) const {
  switch (kind_) {
    case MetricKind::uniform:
      return MetricForm::identity(gamma.size());
    case MetricKind::diagonal:
    case MetricKind::dense:
      require_length(gamma.size(), fixed_->size(), "MetricField::evaluate");
      return *fixed_;
    case MetricKind::diagonal_field: {
      Vector w = rule_(gamma);
      require_length(w.size(), gamma.size(), "metric weight rule output");
      return MetricForm::diagonal(std::move(w));
    }
  }
  throw InvalidArgument("unknown metric kind");
}

MetricForm MetricField::evaluate(const SquareRootState& state,
                                 const Support& support) const {
  return evaluate(state).restricted(support);
}

}  // namespace sea
