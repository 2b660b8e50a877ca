#include "sea/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sea/errors.hpp"

namespace sea {

namespace {

void require_same_length(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": length mismatch (" << a << " vs " << b << ")";
    throw InvalidArgument(os.str());
  }
}

bool is_unity(const Vector& v) {
  return (v.array() == 1.0).all();
}

std::string dependent_combination(const std::vector<Constraint>& rows,
                                  const Vector& coefficients) {
  const double peak = coefficients.cwiseAbs().maxCoeff();
  std::ostringstream os;
  os.precision(4);
  std::vector<std::string> named;
  bool first = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double a = coefficients(static_cast<Index>(i)) / peak;
    if (std::abs(a) < 1e-6) continue;
    named.push_back("'" + rows[i].name + "'");
    os << (first ? (a < 0 ? "-" : "") : (a < 0 ? " - " : " + "))
       << std::abs(a) << "*" << rows[i].name;
    first = false;
  }
  std::string names;
  for (std::size_t k = 0; k < named.size(); ++k) {
    names += (k == 0 ? "" : (k + 1 == named.size() ? " and " : ", ")) + named[k];
  }
  return "constraint rows " + names +
         " are linearly dependent (" + os.str() + " = 0)";
}

}  // namespace

SquareRootState SquareRootState::from_probabilities(std::span<const double> p) {
  Vector v(static_cast<Index>(p.size()));
  for (std::size_t j = 0; j < p.size(); ++j) v(static_cast<Index>(j)) = p[j];
  return from_probabilities(v);
}

SquareRootState SquareRootState::from_probabilities(const Vector& p) {
  if (p.size() == 0) throw InvalidArgument("probability vector is empty");
  Vector gamma(p.size());
  for (Index j = 0; j < p.size(); ++j) {
    if (!std::isfinite(p(j)) || p(j) < 0.0) {
      std::ostringstream os;
      os << "probability at index " << j << " is invalid (" << p(j)
         << "); entries must be finite and >= 0";
      throw InvalidArgument(os.str());
    }
    gamma(j) = std::sqrt(p(j));
  }
  return SquareRootState(std::move(gamma));
}

SquareRootState SquareRootState::from_gamma(Vector gamma) {
  if (gamma.size() == 0) throw InvalidArgument("state vector is empty");
  for (Index j = 0; j < gamma.size(); ++j) {
    if (!std::isfinite(gamma(j)) || gamma(j) < 0.0) {
      std::ostringstream os;
      os << "square-root state at index " << j << " is invalid (" << gamma(j)
         << "); entries must be finite and >= 0";
      throw InvalidArgument(os.str());
    }
  }
  return SquareRootState(std::move(gamma));
}

double inner_product(const Vector& a, const Vector& b) {
  require_same_length(a.size(), b.size(), "inner_product");
  return a.dot(b);
}

double mean_value(const SquareRootState& state, const Vector& c) {
  require_same_length(state.size(), c.size(), "mean_value");
  const Vector& g = state.gamma();
  long double sum = 0.0L;
  for (Index j = 0; j < g.size(); ++j) {
    sum += static_cast<long double>(g(j) * g(j)) * c(j);
  }
  return static_cast<double>(sum);
}

double entropy(const SquareRootState& state, double k_b) {
  long double sum = 0.0L;
  for (Index j = 0; j < state.size(); ++j) {
    const double p = state.gamma()(j) * state.gamma()(j);
    if (p > 0.0) sum -= static_cast<long double>(p) * std::log(p);
  }
  return k_b * static_cast<double>(sum);
}

Vector entropy_gradient_phi(const SquareRootState& state, double k_b) {
  const Vector& g = state.gamma();
  Vector phi(g.size());
  for (Index j = 0; j < g.size(); ++j) {
    const double x = g(j);
    phi(j) = x > 0.0 ? -2.0 * k_b * x * std::log(x * x) : 0.0;
  }
  return phi;
}

ConstraintSet::ConstraintSet(std::vector<Constraint> rows, bool add_unity)
    : rows_(std::move(rows)) {
  if (rows_.empty() && !add_unity) {
    throw InvalidArgument("constraint set is empty");
  }
  if (!rows_.empty()) dimension_ = rows_.front().values.size();
  for (const auto& r : rows_) {
    if (r.values.size() == 0) {
      throw InvalidArgument("constraint row '" + r.name + "' is empty");
    }
    if (r.values.size() != dimension_) {
      std::ostringstream os;
      os << "constraint row '" << r.name << "' has length " << r.values.size()
         << ", expected " << dimension_;
      throw InvalidArgument(os.str());
    }
    if (!r.values.allFinite()) {
      throw InvalidArgument("constraint row '" + r.name +
                            "' contains non-finite values");
    }
  }
  if (dimension_ == 0) {
    throw InvalidArgument("cannot infer the event count of an empty constraint set");
  }

  std::vector<std::size_t> unity_rows;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (is_unity(rows_[i].values)) unity_rows.push_back(i);
  }
  if (unity_rows.empty()) {
    if (!add_unity) throw InvalidArgument("constraint set lacks the unity row");
    rows_.push_back({"I", Vector::Ones(dimension_)});
    unity_rows.push_back(rows_.size() - 1);
  }
  if (unity_rows.size() > 1) {
    throw InvalidArgument("constraint rows '" + rows_[unity_rows[0]].name +
                          "' and '" + rows_[unity_rows[1]].name +
                          "' are both the unity vector");
  }
  unity_ = unity_rows.front();

  const Index c = static_cast<Index>(rows_.size());
  if (c > dimension_) {
    std::ostringstream os;
    os << c << " constraint rows cannot be independent in dimension "
       << dimension_;
    throw InvalidArgument(os.str());
  }
  Matrix m = matrix();
  Vector norms = m.colwise().norm().transpose();
  for (Index i = 0; i < c; ++i) {
    if (norms(i) == 0.0) {
      throw InvalidArgument("constraint row '" + rows_[i].name + "' is zero");
    }
    m.col(i) /= norms(i);
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (sv(c - 1) <= 1e-10 * sv(0)) {
    Vector null = svd.matrixV().col(c - 1).cwiseQuotient(norms);
    throw InvalidArgument(dependent_combination(rows_, null));
  }
}

ConstraintSet ConstraintSet::normalization(Index n) {
  if (n < 1) throw InvalidArgument("normalization needs at least one event");
  return ConstraintSet({{"I", Vector::Ones(n)}});
}

Matrix ConstraintSet::matrix() const {
  Matrix m(dimension_, static_cast<Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    m.col(static_cast<Index>(i)) = rows_[i].values;
  }
  return m;
}

ConstraintSet ConstraintSet::with_targets(const SquareRootState& state) const {
  require_same_length(state.size(), dimension_, "ConstraintSet::with_targets");
  Vector t(static_cast<Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    t(static_cast<Index>(i)) = mean_value(state, rows_[i].values);
  }
  return with_targets(std::move(t));
}

ConstraintSet ConstraintSet::with_targets(Vector targets) const {
  if (targets.size() != static_cast<Index>(rows_.size())) {
    throw InvalidArgument("target count does not match constraint count");
  }
  if (!targets.allFinite()) throw InvalidArgument("targets must be finite");
  const double unity = targets(static_cast<Index>(unity_));
  if (std::abs(unity - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(17);
    os << "unity target is " << unity
       << "; the distribution must be normalized";
    throw InvalidArgument(os.str());
  }
  ConstraintSet copy = *this;
  copy.targets_ = std::move(targets);
  copy.targets_(static_cast<Index>(unity_)) = 1.0;
  return copy;
}

Matrix constraint_gradients_psi(const SquareRootState& state,
                                const ConstraintSet& constraints) {
  require_same_length(state.size(), constraints.dimension(),
                      "constraint_gradients_psi");
  Matrix psi(state.size(), static_cast<Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    psi.col(static_cast<Index>(i)) =
        2.0 * state.gamma().cwiseProduct(constraints.row(i).values);
  }
  return psi;
}

GradientVectors gradient_vectors(const SquareRootState& state,
                                 const ConstraintSet& constraints, double k_b) {
  GradientVectors g;
  g.phi = entropy_gradient_phi(state, k_b);
  g.psi = constraint_gradients_psi(state, constraints);
  for (const auto& r : constraints.rows()) g.labels.push_back(r.name);
  return g;
}

Support Support::of(const SquareRootState& state, double epsilon) {
  Support s;
  s.full_size_ = state.size();
  for (Index j = 0; j < state.size(); ++j) {
    if (state.gamma()(j) > epsilon) s.active_.push_back(j);
  }
  return s;
}

Support Support::full(Index n) {
  Support s;
  s.full_size_ = n;
  s.active_.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) s.active_[static_cast<std::size_t>(j)] = j;
  return s;
}

Support Support::from_indices(std::vector<Index> active, Index full_size) {
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  if (!active.empty() && (active.front() < 0 || active.back() >= full_size)) {
    throw InvalidArgument("support index out of range");
  }
  Support s;
  s.active_ = std::move(active);
  s.full_size_ = full_size;
  return s;
}

bool Support::contains(Index j) const {
  return std::binary_search(active_.begin(), active_.end(), j);
}

Vector Support::restrict(const Vector& v) const {
  require_same_length(v.size(), full_size_, "Support::restrict");
  if (is_full()) return v;
  Vector out(size());
  for (Index k = 0; k < size(); ++k) out(k) = v(active_[static_cast<std::size_t>(k)]);
  return out;
}

Matrix Support::restrict_rows(const Matrix& m) const {
  require_same_length(m.rows(), full_size_, "Support::restrict_rows");
  if (is_full()) return m;
  Matrix out(size(), m.cols());
  for (Index k = 0; k < size(); ++k) {
    out.row(k) = m.row(active_[static_cast<std::size_t>(k)]);
  }
  return out;
}

Matrix Support::restrict_square(const Matrix& m) const {
  require_same_length(m.rows(), full_size_, "Support::restrict_square");
  if (is_full()) return m;
  Matrix out(size(), size());
  for (Index a = 0; a < size(); ++a) {
    for (Index b = 0; b < size(); ++b) {
      out(a, b) = m(active_[static_cast<std::size_t>(a)],
                    active_[static_cast<std::size_t>(b)]);
    }
  }
  return out;
}

Vector Support::expand(const Vector& v) const {
  require_same_length(v.size(), size(), "Support::expand");
  if (is_full()) return v;
  Vector out = Vector::Zero(full_size_);
  for (Index k = 0; k < size(); ++k) out(active_[static_cast<std::size_t>(k)]) = v(k);
  return out;
}

Support Support::without(const std::vector<Index>& dropped) const {
  Support s;
  s.full_size_ = full_size_;
  for (Index j : active_) {
    if (std::find(dropped.begin(), dropped.end(), j) == dropped.end()) {
      s.active_.push_back(j);
    }
  }
  return s;
}

}  // namespace sea
