// Determinant-ratio form of the rate vector. Every determinant is expanded by
// cofactors, so this route shares no factorization with solve_sea.

#include <cmath>
#include <sstream>

#include "internal.hpp"
#include "sea/errors.hpp"

namespace sea {

namespace {

// Laplace expansion along the first row.
double laplace_determinant(const Matrix& m) {
  const Index n = m.rows();
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double det = 0.0;
  Matrix minor(n - 1, n - 1);
  for (Index k = 0; k < n; ++k) {
    for (Index r = 1; r < n; ++r) {
      for (Index c = 0, cc = 0; c < n; ++c) {
        if (c == k) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    }
    const double term = m(0, k) * laplace_determinant(minor);
    det += (k % 2 == 0) ? term : -term;
  }
  return det;
}

}  // namespace

SeaSolution solve_sea_cramer(const GradientVectors& grads, const MetricForm& form,
                             const TauPolicy& tau, const Vector& gamma,
                             double k_b) {
  if (!(k_b > 0.0)) throw InvalidArgument("k_B must be > 0");
  const Index c = grads.psi.cols();
  if (static_cast<std::size_t>(c) > kMaxCramerConstraints) {
    std::ostringstream os;
    os << "determinant-ratio construction limited to " << kMaxCramerConstraints
       << " constraints (got " << c << ")";
    throw InvalidArgument(os.str());
  }
  if (grads.psi.rows() != form.size() || grads.phi.size() != form.size()) {
    throw InvalidArgument("solve_sea_cramer: gradient and metric sizes differ");
  }

  // Columns of the bordered matrix's first row: G^-1 Phi, G^-1 Psi_1..c.
  Matrix vectors(form.size(), c + 1);
  vectors.col(0) = form.apply_inverse(grads.phi);
  vectors.rightCols(c) = form.apply_inverse(grads.psi);

  // Scalar block: row i is [(Psi_i|G^-1|Phi), (Psi_i|G^-1|Psi_1..c)].
  Matrix scalars(c, c + 1);
  for (Index i = 0; i < c; ++i) {
    for (Index k = 0; k <= c; ++k) {
      scalars(i, k) = static_cast<double>(
          detail::dot_extended(grads.psi.col(i), vectors.col(k)));
    }
  }
  for (Index i = 0; i < c; ++i) {
    for (Index k = i + 1; k < c; ++k) {
      const double s = 0.5 * (scalars(i, k + 1) + scalars(k, i + 1));
      scalars(i, k + 1) = s;
      scalars(k, i + 1) = s;
    }
  }
  detail::check_gram_condition(scalars.rightCols(c), grads);

  const Matrix gram = scalars.rightCols(c);
  const double denominator = laplace_determinant(gram);
  double hadamard = 1.0;
  for (Index i = 0; i < c; ++i) hadamard *= gram(i, i);
  if (!(std::abs(denominator) > 1e-14 * hadamard)) {
    throw DegenerateError("determinant-ratio construction: singular Gram determinant");
  }

  // Cofactor of first-row entry k in the (c+1)x(c+1) bordered matrix.
  Vector cofactor(c + 1);
  Matrix minor(c, c);
  for (Index k = 0; k <= c; ++k) {
    for (Index i = 0; i < c; ++i) {
      for (Index col = 0, cc = 0; col <= c; ++col) {
        if (col == k) continue;
        minor(i, cc++) = scalars(i, col);
      }
    }
    const double d = laplace_determinant(minor);
    cofactor(k) = (k % 2 == 0) ? d : -d;
  }

  SeaSolution sol;
  sol.k_b = k_b;
  sol.phi = grads.phi;
  // The ratio is G^-1 Phi - sum_k (k_B beta_k) G^-1 Psi_k.
  sol.beta = Vector(c);
  for (Index k = 0; k < c; ++k) {
    sol.beta(k) = -cofactor(k + 1) / (denominator * k_b);
  }
  Vector ratio = Vector::Zero(form.size());
  for (Index j = 0; j < ratio.size(); ++j) {
    long double s = 0.0L;
    for (Index k = 0; k <= c; ++k) {
      s += static_cast<long double>(vectors(j, k)) * cofactor(k);
    }
    ratio(j) = static_cast<double>(s / denominator);
  }
  sol.lambda = detail::affinity_extended(grads.phi, grads.psi, sol.beta, k_b);
  sol.dod = static_cast<double>(detail::dot_extended(sol.lambda, ratio));
  detail::finish_solution(sol, form, tau, gamma, ratio);
  return sol;
}

}  // namespace sea
