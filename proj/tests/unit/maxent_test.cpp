#include <cmath>
#include <numbers>

#include <doctest.h>

#include "instances.hpp"
#include "sea/errors.hpp"
#include "sea/maxent.hpp"

using namespace sea;
using doctest::Approx;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) v(j++) = x;
  return v;
}
ConstraintSet energy_set(const Vector& e, double mean) {
  return ConstraintSet({{"H", e}}).with_targets(vec({mean, 1.0}));
}
}  // namespace

TEST_SUITE("maxent") {

TEST_CASE("normalization only gives the uniform distribution") {
  for (Index n : {1, 2, 7, 30}) {
    const ConstraintSet c = ConstraintSet({{"I", Vector::Ones(n)}}).with_targets(vec({1.0}));
    const MaxEntResult r = solve_maxent(c);
    CHECK((r.distribution.array() - 1.0 / double(n)).abs().maxCoeff() <= 1e-15);
    CHECK(r.dual_multipliers(0) == Approx(std::log(double(n))).epsilon(1e-14));
  }
}

TEST_CASE("symmetric two-level target") {
  const MaxEntResult r = solve_maxent(energy_set(vec({0, 1}), 0.5));
  CHECK(r.distribution(0) == Approx(0.5).epsilon(1e-14));
  CHECK(r.distribution(1) == Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(r.dual_multipliers(0)) <= 1e-14);
}

TEST_CASE("three-level Gibbs distribution against bisection") {
  const Vector e = vec({0, 1, 2});
  double nu = 0.0;
  const Vector oracle = testing::gibbs_by_bisection(e, 0.4, &nu);
  const MaxEntResult r = solve_maxent(energy_set(e, 0.4));
  CHECK((r.distribution - oracle).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(r.distribution(0) == Approx(0.681866541822748961070945055792009).epsilon(1e-13));
  CHECK(r.distribution(2) == Approx(0.0818665418227489610709450557920135).epsilon(1e-13));
  CHECK(r.dual_multipliers(0) == Approx(1.05987178479008207490819878182).epsilon(1e-12));
  CHECK(r.dual_multipliers(1) == Approx(0.382921326764679443565858447101).epsilon(1e-12));
  CHECK(std::abs(r.achieved_means(0) - 0.4) <= 1e-12 * 1.4);
  CHECK(r.residual_norm <= 1e-12);
}

TEST_CASE("Gibbs oracle over many energy spectra") {
  testing::InstanceGenerator gen(404);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = gen.integer(2, 20);
    Vector e(n);
    for (Index j = 0; j < n; ++j) e(j) = gen.uniform(-3.0, 5.0);
    const double mean = e.minCoeff() + gen.uniform(0.05, 0.95) * (e.maxCoeff() - e.minCoeff());
    const MaxEntResult r = solve_maxent(energy_set(e, mean));
    CAPTURE(trial);
    CHECK(testing::total_variation(r.distribution, testing::gibbs_by_bisection(e, mean)) <= 1e-10);
  }
}

TEST_CASE("infeasible targets") {
  const Vector e = vec({0, 1, 2});
  CHECK_THROWS_AS(solve_maxent(energy_set(e, 2.5)), InfeasibleError);
  CHECK_THROWS_AS(solve_maxent(energy_set(e, 0.0)), InfeasibleError);  // only (1, 0, 0) fits
  CHECK_THROWS_AS(solve_maxent(ConstraintSet({{"H", e}})), InvalidArgument);  // no targets
  CHECK(feasibility_margin(energy_set(e, 1.0), Support::full(3)) > 0.5);
  CHECK(std::abs(feasibility_margin(energy_set(e, 2.0), Support::full(3))) <= 1e-12);
  CHECK(feasibility_margin(energy_set(e, 3.0), Support::full(3)) < 0.0);
  // On the support {0, 1} a mean of 1.5 is out of reach.
  CHECK_THROWS_AS(solve_maxent(energy_set(e, 1.5), Support::from_indices({0, 1}, 3)), InfeasibleError);
}

TEST_CASE("support restriction") {
  const auto s = SquareRootState::from_probabilities(vec({0.5, 0.0, 0.3, 0.2}));
  const ConstraintSet c = ConstraintSet({{"H", vec({0, 1, 2, 3})}}).with_targets(s);
  const MaxEntResult r = solve_maxent(c, Support::of(s));
  CHECK(r.distribution(1) == 0.0);
  CHECK(r.distribution.sum() == Approx(1.0).epsilon(1e-14));
  CHECK(r.support == Support::of(s));
}

TEST_CASE("iteration cap reports the residual") {
  MaxEntOptions tight;
  tight.max_iterations = 1;
  CHECK_THROWS_WITH_AS(solve_maxent(energy_set(vec({0, 1, 2, 7}), 0.3), tight),
                       doctest::Contains("residual"), NumericalError);
}

TEST_CASE("dual feasibility, maximality and zero affinity on random problems") {
  testing::InstanceGenerator gen(99);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = gen.integer(3, 6);
    const auto inst = gen.make(n, static_cast<std::size_t>(gen.integer(1, n - 1)), MetricKind::uniform);
    const ConstraintSet c = inst.constraints.with_targets(inst.state);
    const MaxEntResult r = solve_maxent(c);
    CAPTURE(inst.label);
    const Vector achieved = c.matrix().transpose() * r.distribution;
    CHECK((achieved - c.targets()).norm() <= 1e-12 * (1.0 + c.targets().norm()));
    CHECK(r.residual_norm <= 1e-12 * (1.0 + c.targets().norm()));

    const auto top = SquareRootState::from_probabilities(r.distribution);
    const double s_max = entropy(top);
    const Matrix cm = c.matrix();
    const Eigen::FullPivLU<Matrix> lu(cm.transpose());
    const Matrix null = lu.kernel();
    int accepted = 0;
    for (int draw = 0; draw < 4000 && accepted < 200; ++draw) {
      const Vector p = r.distribution + null * (gen.normal(null.cols()) * gen.uniform(0.0, 0.3));
      if (p.minCoeff() < 0.0) continue;
      ++accepted;
      CHECK(entropy(SquareRootState::from_probabilities(p)) <= s_max + 1e-12);
    }
    CHECK(accepted > 0);

    const SeaSolution at = sea_direction(top, c, MetricField::uniform(), TauPolicy::constant(1));
    CHECK(at.lambda.norm() <= 1e-8);
    CHECK(kl_divergence(inst.state, r) > 0.0);
    CHECK(kl_divergence(top, r) == Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("KL divergence") {
  CHECK(kl_divergence(vec({1, 0}), vec({0.5, 0.5})) == Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(kl_divergence(vec({0.9, 0.1}), vec({0.5, 0.5})) ==
        Approx(0.368064207168497069910682093234).epsilon(1e-14));
  CHECK(kl_divergence(vec({0.2, 0.8}), vec({0.2, 0.8})) == 0.0);
  CHECK_THROWS_AS(kl_divergence(vec({0.5, 0.5}), vec({1.0, 0.0})), InvalidArgument);
  CHECK_THROWS_AS(kl_divergence(vec({1.0}), vec({0.5, 0.5})), InvalidArgument);
  // Nonnegative even when the first argument is slightly off normalization.
  CHECK(kl_divergence(vec({0.5 + 1e-9, 0.5 - 3e-9}), vec({0.5, 0.5})) >= 0.0);
}

TEST_CASE("disequilibrium report") {
  const auto u = SquareRootState::from_probabilities(vec({0.5, 0.5}));
  const ConstraintSet n({{"I", Vector::Ones(2)}});
  const DisequilibriumReport zero = disequilibrium_report(u, n, MetricField::uniform());
  CHECK(zero.dod <= 1e-30);
  CHECK(zero.path_length == 0.0);
  CHECK(zero.kl_divergence == 0.0);
  CHECK(zero.affinity_norm_sq <= 1e-30);
  CHECK(zero.status == TrajectoryStatus::converged);

  const auto s = SquareRootState::from_probabilities(vec({0.9, 0.1}));
  const DisequilibriumReport r = disequilibrium_report(s, n, MetricField::uniform());
  const double values[] = {r.dod, r.path_length, r.kl_divergence, r.affinity_norm_sq};
  for (double v : values) CHECK(v > 0.0);
  // Under the uniform metric (L|L) and DoD coincide; the other pairs differ.
  CHECK(r.dod == Approx(r.affinity_norm_sq).epsilon(1e-14));
  CHECK(r.dod != Approx(r.path_length).epsilon(1e-3));
  CHECK(r.dod != Approx(r.kl_divergence).epsilon(1e-3));
  CHECK(r.path_length != Approx(r.kl_divergence).epsilon(1e-3));
  CHECK(r.path_length == Approx(0.927295218001612232428512462923).epsilon(1e-6));
  CHECK(r.kl_divergence == Approx(0.368064207168497069910682093234).epsilon(1e-12));

  const DisequilibriumReport d = disequilibrium_report(s, n, MetricField::diagonal(vec({1, 3})));
  CHECK(d.dod != Approx(d.affinity_norm_sq).epsilon(1e-3));
}

TEST_CASE("measures shrink toward MaxEnt") {
  const ConstraintSet n({{"I", Vector::Ones(2)}});
  double last_dod = 1e300, last_kl = 1e300, last_len = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto s = SquareRootState::from_probabilities(vec({0.5 + eps, 0.5 - eps}));
    const DisequilibriumReport r = disequilibrium_report(s, n, MetricField::uniform());
    CHECK(r.dod < last_dod);
    CHECK(r.kl_divergence < last_kl);
    CHECK(r.path_length < last_len);
    last_dod = r.dod;
    last_kl = r.kl_divergence;
    last_len = r.path_length;
  }
}

}  // TEST_SUITE
