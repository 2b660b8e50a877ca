#include <cmath>
#include <numbers>

#include <doctest.h>

#include "instances.hpp"
#include "sea/dynamics.hpp"
#include "sea/errors.hpp"

using namespace sea;
using doctest::Approx;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) v(j++) = x;
  return v;
}
const ConstraintSet kNormOnly2({{"I", Vector::Ones(2)}});
}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("gram system for normalization only") {
  const auto s = SquareRootState::from_probabilities(vec({0.6, 0.3, 0.1}));
  const ConstraintSet c({{"I", Vector::Ones(3)}});
  const GramSystem g = gram_system(s, c, MetricField::uniform());
  CHECK(g.a(0, 0) == Approx(4.0).epsilon(1e-15));
  CHECK(g.b(0) == Approx(4.0 * entropy(s)).epsilon(1e-14));
  CHECK(solve_multipliers(g)(0) == Approx(entropy(s)).epsilon(1e-14));
  CHECK(solve_multipliers(g, 2.0)(0) == Approx(entropy(s) / 2.0).epsilon(1e-14));

  const auto half = SquareRootState::from_probabilities(vec({0.5, 0.5}));
  CHECK(solve_multipliers(gram_system(half, kNormOnly2, MetricField::uniform()))(0) ==
        Approx(std::numbers::ln2).epsilon(1e-15));
}

TEST_CASE("constraints dependent on the support are degenerate") {
  const auto s = SquareRootState::from_probabilities(vec({0.5, 0.5, 0.0}));
  const ConstraintSet c({{"A", vec({0, 0, 1})}});
  CHECK_THROWS_WITH_AS(gram_system(s, c, MetricField::uniform()), doctest::Contains("A"),
                       DegenerateError);
  CHECK_THROWS_AS(sea_direction(s, c, MetricField::uniform(), TauPolicy::constant(1)),
                  DegenerateError);
  // {B, I} restricted to {0, 1} are proportional: B = 2 I there.
  const ConstraintSet d({{"B", vec({2, 2, 5})}});
  CHECK_THROWS_WITH_AS(gram_system(s, d, MetricField::uniform()),
                       doctest::Contains("degenerate constraints on current support"),
                       DegenerateError);
}

TEST_CASE("Gibbs states have zero affinity and Gibbs multipliers") {
  const Vector e = vec({0, 1, 2});
  double nu = 0.0;
  const Vector p = testing::gibbs_by_bisection(e, 0.4, &nu);
  CHECK(nu == Approx(1.05987178479008207490819878182).epsilon(1e-12));
  const auto s = SquareRootState::from_probabilities(p);
  const ConstraintSet c({{"H", e}});
  const Vector beta = solve_multipliers(gram_system(s, c, MetricField::uniform()));
  CHECK(beta(0) == Approx(nu).epsilon(1e-10));
  CHECK(beta(1) == Approx(std::log((-nu * e.array()).exp().sum())).epsilon(1e-10));
  CHECK(affinity(s, c, beta).norm() <= 1e-10);

  const auto u = SquareRootState::from_probabilities(Vector::Constant(5, 0.2));
  const ConstraintSet n({{"I", Vector::Ones(5)}});
  const Vector bu = solve_multipliers(gram_system(u, n, MetricField::uniform()));
  CHECK(affinity(u, n, bu).norm() <= 1e-14);
}

TEST_CASE("non-Gibbs affinity matches the reference values") {
  const auto s = SquareRootState::from_probabilities(vec({0.7, 0.2, 0.1}));
  const ConstraintSet c({{"H", vec({0, 1, 2})}});
  const SeaSolution sol = sea_direction(s, c, MetricField::uniform(), TauPolicy::constant(1));
  CHECK(sol.beta(0) == Approx(1.04926631833703247340779753088428).epsilon(1e-13));
  CHECK(sol.beta(1) == Approx(0.382112025208524319197679097628762).epsilon(1e-13));
  CHECK(sol.lambda(0) == Approx(-0.042564378180267121783203526971628).epsilon(1e-12));
  CHECK(sol.lambda(1) == Approx(0.15926132003163604949843158514171).epsilon(1e-12));
  CHECK(sol.lambda(2) == Approx(-0.112614759375090790109104931657255).epsilon(1e-12));
  CHECK(sol.dod == Approx(0.0398579783772015968672187691218).epsilon(1e-12));

  const SeaSolution d = sea_direction(s, c, MetricField::diagonal(vec({2, 3, 5})),
                                      TauPolicy::constant(1));
  CHECK(d.beta(0) == Approx(1.08983685302049809968520371676846).epsilon(1e-13));
  CHECK(d.pi_gamma(0) == Approx(-0.0118533711388085655598794632072745).epsilon(1e-12));
  CHECK(d.pi_gamma(1) == Approx(0.0443512536796961150501961376343903).epsilon(1e-12));
  CHECK(d.pi_gamma(2) == Approx(-0.0313610722310379415493709936261428).epsilon(1e-12));
  CHECK(d.dod == Approx(0.0110996901809928497604913027934).epsilon(1e-12));
}

TEST_CASE("two-state direction points along the circle toward uniform") {
  const auto s = SquareRootState::from_probabilities(vec({0.9, 0.1}));
  const SeaSolution sol = sea_direction(s, kNormOnly2, MetricField::uniform(), TauPolicy::constant(1));
  CHECK(sol.beta(0) == Approx(0.325082973391448239506550028224).epsilon(1e-14));
  CHECK(sol.pi_gamma(0) == Approx(-0.416894051716994164178446818815779).epsilon(1e-13));
  CHECK(sol.pi_gamma(1) == Approx(1.25068215515098249253534045644724).epsilon(1e-13));
  CHECK(entropy_production(sol) == Approx(sol.lambda.squaredNorm()).epsilon(1e-12));
  CHECK(entropy_production(sol) == Approx(1.73800650357011804809504193834).epsilon(1e-12));

  // Brute force: maximize (Phi|z) over unit z with (Psi_I|z) = 0 on an angular grid.
  const Vector phi = entropy_gradient_phi(s);
  const Vector psi = 2.0 * s.gamma();
  double best = -1e300, best_angle = 0.0;
  const int steps = 200000;
  for (int k = 0; k < steps; ++k) {
    const double a = 2.0 * std::numbers::pi * k / steps;
    const Vector z = vec({std::cos(a), std::sin(a)});
    if (std::abs(psi.dot(z)) > 1e-4) continue;
    if (phi.dot(z) > best) {
      best = phi.dot(z);
      best_angle = a;
    }
  }
  const double angle = std::atan2(sol.pi_gamma(1), sol.pi_gamma(0));
  CHECK(std::abs(std::remainder(angle - best_angle, 2.0 * std::numbers::pi)) < 1e-3);
  CHECK(sol.pi_gamma(1) > 0.0);  // toward larger p_2
}

TEST_CASE("tau scaling") {
  testing::InstanceGenerator gen(21);
  const auto inst = gen.make(7, 3, MetricKind::dense);
  const SeaSolution a = sea_direction(inst.state, inst.constraints, inst.metric, TauPolicy::constant(1.0));
  const SeaSolution b = sea_direction(inst.state, inst.constraints, inst.metric, TauPolicy::constant(2.0));
  CHECK((b.pi_gamma - 0.5 * a.pi_gamma).norm() <= 1e-15 * a.pi_gamma.norm());
  CHECK(b.lambda == a.lambda);
  CHECK(b.beta == a.beta);
  CHECK(entropy_production(b) == Approx(0.5 * entropy_production(a)).epsilon(1e-13));
}

TEST_CASE("MaxEnt states are stationary") {
  const auto u = SquareRootState::from_probabilities(Vector::Constant(4, 0.25));
  const ConstraintSet n({{"I", Vector::Ones(4)}});
  for (const auto& m : {MetricField::uniform(), MetricField::resistive()}) {
    const SeaSolution sol = sea_direction(u, n, m, TauPolicy::constant(1));
    CHECK(sol.at_equilibrium);
    CHECK(sol.pi_gamma.isZero(0.0));
    CHECK(sol.dod < kEquilibriumDod);
    CHECK(entropy_production(sol) == 0.0);
    const SeaSolution cr = sea_direction_cramer(u, n, m, TauPolicy::constant(1));
    CHECK(cr.pi_gamma.isZero(0.0));
  }
  CHECK(degree_of_disequilibrium(u, n, MetricField::uniform()) < kEquilibriumDod);
}

TEST_CASE("degree of disequilibrium under scalar metrics") {
  const auto s = SquareRootState::from_probabilities(vec({0.7, 0.2, 0.1}));
  const ConstraintSet c({{"H", vec({0, 1, 2})}});
  const SeaSolution sol = sea_direction(s, c, MetricField::uniform(), TauPolicy::constant(1));
  CHECK(degree_of_disequilibrium(s, c, MetricField::uniform()) ==
        Approx(sol.lambda.squaredNorm()).epsilon(1e-14));
  CHECK(degree_of_disequilibrium(s, c, MetricField::diagonal(vec({2, 2, 2}))) ==
        Approx(sol.lambda.squaredNorm() / 2).epsilon(1e-14));
  const SeaSolution t = sea_direction(s, c, MetricField::uniform(), TauPolicy::constant(0.25));
  CHECK(t.entropy_production * t.k_b * t.tau == Approx(t.dod).epsilon(1e-12));
}

TEST_CASE("resolve_tau") {
  const Vector g = vec({0.6, 0.8});
  CHECK(resolve_tau(TauPolicy::constant(0.5), 3.0, g, 1.0) == 0.5);
  CHECK(resolve_tau(TauPolicy::prescribed_entropy_production(1.0), 0.37, g, 1.0) ==
        Approx(0.37).epsilon(1e-15));
  CHECK(resolve_tau(TauPolicy::prescribed_speed(2.0), 16.0, g, 1.0) == Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(resolve_tau(TauPolicy::prescribed_speed(2.0), 0.0, g, 1.0),
                       doctest::Contains("relaxation time undefined at equilibrium"), NumericalError);
  CHECK_THROWS_AS(TauPolicy::constant(0.0), InvalidArgument);

  const auto s = SquareRootState::from_probabilities(vec({0.7, 0.2, 0.1}));
  const ConstraintSet c({{"H", vec({0, 1, 2})}});
  const MetricField m = MetricField::diagonal(vec({2, 3, 5}));
  const SeaSolution pe = sea_direction(s, c, m, TauPolicy::prescribed_entropy_production(0.3));
  CHECK(entropy_production(pe) == Approx(0.3).epsilon(1e-9));
  const SeaSolution sp = sea_direction(s, c, m, TauPolicy::prescribed_speed(0.7));
  CHECK(std::sqrt(m.evaluate(s).quadratic(sp.pi_gamma)) == Approx(0.7).epsilon(1e-9));
  const auto rule = TauPolicy::prescribed_entropy_production(
      [](const Vector& gamma) { return 1.0 + gamma(0); });
  const SeaSolution pr = sea_direction(s, c, m, rule);
  CHECK(entropy_production(pr) == Approx(1.0 + s.gamma()(0)).epsilon(1e-9));
  const auto u = SquareRootState::from_probabilities(Vector::Constant(3, 1.0 / 3));
  CHECK_THROWS_AS(resolve_tau(TauPolicy::prescribed_speed(1.0), u, ConstraintSet({{"I", Vector::Ones(3)}}),
                              MetricField::uniform()),
                  NumericalError);
}

TEST_CASE("zero-probability events stay fixed") {
  const auto s = SquareRootState::from_probabilities(vec({0.5, 0.0, 0.3, 0.2}));
  const ConstraintSet c({{"H", vec({0, 1, 2, 3})}});
  Matrix g = Matrix::Identity(4, 4);
  g(0, 1) = g(1, 0) = 0.3;
  g(1, 2) = g(2, 1) = 0.2;
  for (const auto& m : {MetricField::uniform(), MetricField::resistive(), MetricField::dense(g)}) {
    const SeaSolution sol = sea_direction(s, c, m, TauPolicy::constant(1));
    CHECK(sol.pi_gamma(1) == 0.0);
    CHECK(sol.lambda(1) == 0.0);
    CHECK(sol.entropy_production > 0.0);
  }
}

TEST_CASE("c = 1 determinant form reduces to the projected gradient") {
  testing::InstanceGenerator gen(8);
  const auto s = gen.positive_state(5);
  const ConstraintSet c({{"I", Vector::Ones(5)}});
  const MetricField m = gen.metric(5, MetricKind::dense);
  const MetricForm f = m.evaluate(s);
  const Vector phi = entropy_gradient_phi(s);
  const Vector psi = 2.0 * s.gamma();
  const double a11 = psi.dot(f.apply_inverse(psi));
  const double b1 = psi.dot(f.apply_inverse(phi));
  const Vector hand = f.apply_inverse(phi) - (b1 / a11) * f.apply_inverse(psi);
  const SeaSolution cr = sea_direction_cramer(s, c, m, TauPolicy::constant(1));
  CHECK((cr.pi_gamma - hand).norm() <= 1e-12 * hand.norm());
  CHECK(cr.beta(0) == Approx(b1 / a11).epsilon(1e-12));
}

TEST_CASE("determinant form guards") {
  testing::InstanceGenerator gen(9);
  const auto inst = gen.make(12, 7, MetricKind::uniform);
  CHECK_THROWS_AS(sea_direction_cramer(inst.state, inst.constraints, inst.metric, TauPolicy::constant(1)),
                  InvalidArgument);
  const auto s = SquareRootState::from_probabilities(vec({0.5, 0.5, 0.0}));
  CHECK_THROWS_AS(sea_direction_cramer(s, ConstraintSet({{"A", vec({0, 0, 1})}}), MetricField::uniform(),
                                       TauPolicy::constant(1)),
                  DegenerateError);
}

TEST_CASE("structural invariants on random instances") {
  testing::InstanceGenerator gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = gen.integer(2, 64);
    const std::size_t c = static_cast<std::size_t>(gen.integer(1, std::min<Index>(5, n)));
    const auto kind = testing::kAllKinds[trial % 4];
    const auto inst = gen.make(n, c, kind);
    CAPTURE(inst.label);
    const double tau = gen.uniform(0.2, 3.0);
    const SeaSolution sol = sea_direction(inst.state, inst.constraints, inst.metric, TauPolicy::constant(tau));
    const GradientVectors grads = gradient_vectors(inst.state, inst.constraints);
    const MetricForm form = inst.metric.evaluate(inst.state);

    CHECK(entropy_production(sol) >= -1e-12);
    if (sol.at_equilibrium) continue;
    for (Index i = 0; i < grads.psi.cols(); ++i) {
      const Vector psi = grads.psi.col(i);
      CHECK(std::abs(psi.dot(sol.pi_gamma)) <= 1e-9 * psi.norm() * sol.pi_gamma.norm());
    }
    // G^{1/2} Pi parallel to G^{-1/2} Lambda: (Pi|Lambda)^2 = (Pi|G|Pi)(Lambda|G^-1|Lambda)
    const double cross = sol.pi_gamma.dot(sol.lambda);
    const double cosine = cross / std::sqrt(form.quadratic(sol.pi_gamma) * form.inverse_quadratic(sol.lambda));
    CHECK(cosine >= 1.0 - 1e-10);
    // Speed identity.
    const double speed_sq = form.quadratic(sol.pi_gamma);
    CHECK(std::abs(speed_sq - sol.entropy_production / (sol.k_b * sol.tau)) <= 1e-10 * speed_sq);
    CHECK(sol.speed == Approx(std::sqrt(speed_sq)).epsilon(1e-10));

    if (kind == MetricKind::dense) {
      const Matrix l = form.apply_inverse(Matrix(Matrix::Identity(n, n))) / (sol.k_b * tau);
      CHECK((l - l.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * l.cwiseAbs().maxCoeff());
    }

    // Shifting Phi within the constraint span changes only the multipliers.
    GradientVectors shifted = grads;
    shifted.phi += grads.psi * gen.normal(grads.psi.cols());
    const SeaSolution moved = solve_sea(shifted, form, TauPolicy::constant(tau), inst.state.gamma(), 1.0);
    CHECK((moved.pi_gamma - sol.pi_gamma).norm() <= 1e-9 * sol.pi_gamma.norm());
  }
}

TEST_CASE("k_B enters through the multipliers and the time scale") {
  testing::InstanceGenerator gen(77);
  const auto inst = gen.make(6, 2, MetricKind::diagonal);
  SeaOptions two;
  two.k_b = 2.0;
  const SeaSolution a = sea_direction(inst.state, inst.constraints, inst.metric, TauPolicy::constant(1), SeaOptions{});
  const SeaSolution b = sea_direction(inst.state, inst.constraints, inst.metric, TauPolicy::constant(1), two);
  CHECK((b.beta - a.beta).norm() <= 1e-13 * a.beta.norm());
  CHECK((b.lambda - 2.0 * a.lambda).norm() <= 1e-13 * a.lambda.norm());
  CHECK((b.pi_gamma - a.pi_gamma).norm() <= 1e-13 * a.pi_gamma.norm());
  CHECK(b.dod == Approx(4.0 * a.dod).epsilon(1e-13));
}

}  // TEST_SUITE
