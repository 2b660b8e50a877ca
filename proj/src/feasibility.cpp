// Max-min weight program deciding whether constraint targets lie strictly
// inside the convex hull of the support points. Dense two-phase simplex with
// Bland's rule; the programs here have c rows and m + 1 columns.

#include <cmath>
#include <limits>
#include <vector>

#include "sea/errors.hpp"
#include "sea/maxent.hpp"

namespace sea {

namespace {

class Tableau {
 public:
  Tableau(Matrix a, Vector rhs) : rows_(a.rows()), cols_(a.cols()) {
    // Columns: [structural | artificial], last column = rhs.
    t_ = Matrix::Zero(rows_ + 1, cols_ + rows_ + 1);
    t_.block(0, 0, rows_, cols_) = a;
    t_.block(0, cols_, rows_, rows_).setIdentity();
    t_.col(cols_ + rows_).head(rows_) = rhs;
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Index r = 0; r < rows_; ++r) basis_[static_cast<std::size_t>(r)] = cols_ + r;
  }

  // Phase I: minimize the sum of artificials. Returns the residual sum.
  double phase_one() {
    set_objective(Vector::Zero(cols_), /*artificial_cost=*/1.0);
    run(cols_ + rows_);
    return -t_(rows_, cols_ + rows_);
  }

  // Phase II: minimize cost^T x over structural columns.
  void phase_two(const Vector& cost) {
    drive_out_artificials();
    set_objective(cost, 0.0);
    run(cols_);
  }

  Vector solution() const {
    Vector x = Vector::Zero(cols_);
    for (Index r = 0; r < rows_; ++r) {
      const Index b = basis_[static_cast<std::size_t>(r)];
      if (b < cols_) x(b) = t_(r, cols_ + rows_);
    }
    return x;
  }

 private:
  void set_objective(const Vector& cost, double artificial_cost) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_) = cost.transpose();
    for (Index r = 0; r < rows_; ++r) t_(rows_, cols_ + r) = artificial_cost;
    // Reduced costs relative to the current basis.
    for (Index r = 0; r < rows_; ++r) {
      const Index b = basis_[static_cast<std::size_t>(r)];
      const double cb = t_(rows_, b);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(r);
    }
  }

  void pivot(Index row, Index col) {
    t_.row(row) /= t_(row, col);
    for (Index r = 0; r <= rows_; ++r) {
      if (r != row && t_(r, col) != 0.0) t_.row(r) -= t_(r, col) * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule over the first `allowed` columns.
  void run(Index allowed) {
    constexpr double tol = 1e-12;
    for (int iter = 0; iter < 100000; ++iter) {
      Index enter = -1;
      for (Index c = 0; c < allowed; ++c) {
        if (t_(rows_, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < rows_; ++r) {
        const double a = t_(r, enter);
        if (a > tol) {
          const double ratio = t_(r, cols_ + rows_) / a;
          if (ratio < best - tol ||
              (std::abs(ratio - best) <= tol && leave >= 0 &&
               basis_[static_cast<std::size_t>(r)] <
                   basis_[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) throw NumericalError("feasibility program is unbounded");
      pivot(leave, enter);
    }
    throw NumericalError("feasibility program did not terminate");
  }

  void drive_out_artificials() {
    for (Index r = 0; r < rows_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < cols_) continue;
      for (Index c = 0; c < cols_; ++c) {
        if (std::abs(t_(r, c)) > 1e-9) {
          pivot(r, c);
          break;
        }
      }
    }
  }

  Index rows_;
  Index cols_;
  Matrix t_;
  std::vector<Index> basis_;
};

}  // namespace

double feasibility_margin(const ConstraintSet& constraints, const Support& support) {
  if (!constraints.has_targets()) {
    throw InvalidArgument("feasibility_margin needs constraint targets");
  }
  const Index m = support.size();
  if (m == 0) throw InvalidArgument("feasibility_margin: empty support");
  const Matrix c = support.restrict_rows(constraints.matrix());
  const Vector& targets = constraints.targets();

  // Variables x = (u_1..u_m, s) >= 0 with weights w_j = u_j + s.
  //   sum_j w_j (C_ij - t_i) = 0  for every non-unity row i
  //   sum_j w_j = 1
  // maximize s.
  const Index rows = static_cast<Index>(constraints.size());
  Matrix a = Matrix::Zero(rows, m + 1);
  Vector rhs = Vector::Zero(rows);
  Index r = 0;
  for (Index i = 0; i < c.cols(); ++i) {
    if (static_cast<std::size_t>(i) == constraints.unity_index()) continue;
    Vector d = c.col(i).array() - targets(i);
    const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
    d /= scale;
    a.block(r, 0, 1, m) = d.transpose();
    a(r, m) = d.sum();
    ++r;
  }
  a.block(r, 0, 1, m).setOnes();
  a(r, m) = static_cast<double>(m);
  rhs(r) = 1.0;
  for (Index k = 0; k < rows; ++k) {
    if (rhs(k) < 0.0) {
      a.row(k) *= -1.0;
      rhs(k) *= -1.0;
    }
  }

  Tableau tableau(a, rhs);
  const double infeasibility = tableau.phase_one();
  if (infeasibility > 1e-9) return -infeasibility;
  Vector cost = Vector::Zero(m + 1);
  cost(m) = -1.0;
  tableau.phase_two(cost);
  return static_cast<double>(m) * tableau.solution()(m);
}

}  // namespace sea
