#pragma once

// Discrete probability states in square-root representation, the conserved
// properties they carry, and the entropy functional with its gradients.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sea {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Components with gamma_j at or below this are treated as outside the support.
inline constexpr double kDefaultSupportEpsilon = 1e-14;

/// Vector gamma of square-root probabilities, p_j = gamma_j^2.
///
/// Entries are finite and nonnegative. Normalization is not enforced here;
/// it is carried by the unity constraint of a ConstraintSet.
class SquareRootState {
 public:
  SquareRootState() = default;

  /// gamma_j = sqrt(p_j). Throws InvalidArgument naming the first negative or
  /// non-finite entry.
  static SquareRootState from_probabilities(std::span<const double> p);
  static SquareRootState from_probabilities(const Vector& p);

  /// Adopts gamma directly after validation.
  static SquareRootState from_gamma(Vector gamma);

  const Vector& gamma() const noexcept { return gamma_; }
  Index size() const noexcept { return gamma_.size(); }
  Vector probabilities() const { return gamma_.array().square().matrix(); }

 private:
  explicit SquareRootState(Vector gamma) : gamma_(std::move(gamma)) {}

  Vector gamma_;
};

/// Euclidean inner product (A|B) = sum_j a_j b_j.
double inner_product(const Vector& a, const Vector& b);

/// sum_j gamma_j^2 C_j.
double mean_value(const SquareRootState& state, const Vector& c);

/// S = -k_B sum_j p_j ln p_j, with 0 ln 0 = 0.
double entropy(const SquareRootState& state, double k_b = 1.0);

/// Phi_j = -2 k_B gamma_j ln gamma_j^2, and 0 where gamma_j = 0.
Vector entropy_gradient_phi(const SquareRootState& state, double k_b = 1.0);

struct Constraint {
  std::string name;
  Vector values;

  bool operator==(const Constraint&) const = default;
};

/// Conserved-property vectors {C_i}, always containing the unity row I.
///
/// Rows are checked for linear independence at construction. Targets are
/// optional until read from a state with with_targets().
class ConstraintSet {
 public:
  ConstraintSet() = default;

  /// Appends an all-ones row named "I" when no row equals the unity vector
  /// and add_unity is true. Throws InvalidArgument for empty rows, length
  /// mismatches, non-finite values, more than one unity row, or linearly
  /// dependent rows (the message names the dependent combination).
  explicit ConstraintSet(std::vector<Constraint> rows, bool add_unity = true);
  /// The unity row alone, for n events.
  static ConstraintSet normalization(Index n);

  std::size_t size() const noexcept { return rows_.size(); }
  Index dimension() const noexcept { return dimension_; }
  std::size_t unity_index() const noexcept { return unity_; }

  const Constraint& row(std::size_t i) const { return rows_.at(i); }
  const std::vector<Constraint>& rows() const noexcept { return rows_; }

  /// n x c matrix whose columns are the C_i.
  Matrix matrix() const;

  bool has_targets() const noexcept { return targets_.size() > 0; }
  const Vector& targets() const noexcept { return targets_; }

  /// Copy with targets_i = mean_value(state, C_i). The unity target must come
  /// out as 1 within 1e-9, otherwise the state is not normalized.
  ConstraintSet with_targets(const SquareRootState& state) const;
  ConstraintSet with_targets(Vector targets) const;

 private:
  std::vector<Constraint> rows_;
  Vector targets_;
  Index dimension_ = 0;
  std::size_t unity_ = 0;
};

/// Psi_i = 2 gamma C_i as the columns of an n x c matrix.
Matrix constraint_gradients_psi(const SquareRootState& state,
                                const ConstraintSet& constraints);

struct GradientVectors {
  Vector phi;
  Matrix psi;  // column i is Psi_i
  std::vector<std::string> labels;
};

GradientVectors gradient_vectors(const SquareRootState& state,
                                 const ConstraintSet& constraints,
                                 double k_b = 1.0);

/// Indices with gamma_j > epsilon. Computed once per trajectory; zero
/// components are fixed points of the dynamics.
class Support {
 public:
  Support() = default;
  static Support of(const SquareRootState& state,
                    double epsilon = kDefaultSupportEpsilon);
  static Support full(Index n);
  static Support from_indices(std::vector<Index> active, Index full_size);

  Index full_size() const noexcept { return full_size_; }
  Index size() const noexcept { return static_cast<Index>(active_.size()); }
  bool is_full() const noexcept { return size() == full_size_; }
  bool contains(Index j) const;
  const std::vector<Index>& indices() const noexcept { return active_; }

  Vector restrict(const Vector& v) const;
  Matrix restrict_rows(const Matrix& m) const;
  Matrix restrict_square(const Matrix& m) const;
  /// Scatters a support-length vector into a zero vector of full size.
  Vector expand(const Vector& v) const;

  /// Copy without the components listed in `dropped` (full-space indices).
  Support without(const std::vector<Index>& dropped) const;

  bool operator==(const Support&) const = default;

 private:
  std::vector<Index> active_;
  Index full_size_ = 0;
};

}  // namespace sea
