#include <cmath>
#include <sstream>

#include <doctest.h>

#include "instances.hpp"
#include "sea/errors.hpp"
#include "sea/maxent.hpp"
#include "sea/phase.hpp"

using namespace sea;
using doctest::Approx;

namespace {
PhaseGrid box(std::size_t cells, double half_width, int quadrature = 3) {
  PhaseGrid g;
  g.q_min = g.p_min = -half_width;
  g.q_max = g.p_max = half_width;
  g.n_q = g.n_p = cells;
  g.quadrature = quadrature;
  return g;
}
PhaseModel oscillator() {
  PhaseModel m;
  m.potential = Potential::harmonic(1.0);
  return m;
}
double canonical_affinity(std::size_t cells, int quadrature) {
  const PhaseModel m = oscillator();
  const auto d = discretize(m, box(cells, 6.0, quadrature), densities::canonical(m, 1.0));
  return sea_direction(d.state, d.constraints, MetricField::uniform(), TauPolicy::constant(1)).lambda.norm();
}
}  // namespace

TEST_SUITE("phase") {

TEST_CASE("grid geometry and validation") {
  const PhaseGrid g = box(4, 2.0);
  CHECK(g.cell_count() == 16);
  CHECK(g.dq() == 1.0);
  CHECK(g.cell_measure() == 1.0);
  CHECK(g.center(0) == std::array<double, 2>{-1.5, -1.5});
  CHECK(g.center(5) == std::array<double, 2>{-0.5, -0.5});
  CHECK(g.center(7) == std::array<double, 2>{-0.5, 1.5});

  PhaseGrid bad = g;
  bad.q_max = bad.q_min;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = g;
  bad.n_p = 1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = g;
  bad.quadrature = 7;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  const PhaseGrid axis = PhaseGrid::momentum_axis(-2, 2, 8);
  CHECK_NOTHROW(axis.validate());
  CHECK(axis.cell_count() == 8);
  CHECK(axis.q_center(0) == 0.0);
}

TEST_CASE("potentials") {
  CHECK(Potential::free()(3.0) == 0.0);
  CHECK(Potential::harmonic(2.0)(3.0) == 9.0);
  CHECK_THROWS_AS(Potential::harmonic(-1.0), InvalidArgument);

  std::istringstream text("# q V\n1 4\n\n-1 0   # left\n0 1\n");
  const Potential t = Potential::parse_table(text);
  CHECK(t.points().front().first == -1.0);
  CHECK(t(-0.5) == Approx(0.5));
  CHECK(t(0.25) == Approx(1.75));
  CHECK(t(1.0) == 4.0);
  CHECK_THROWS_WITH_AS(t(1.5), doctest::Contains("outside"), InvalidArgument);

  std::istringstream broken("0 1\n1 x\n");
  CHECK_THROWS_WITH_AS(Potential::parse_table(broken), doctest::Contains("line 2"), InvalidArgument);
  std::istringstream extra("0 1 2\n");
  CHECK_THROWS_WITH_AS(Potential::parse_table(extra), doctest::Contains("line 1"), InvalidArgument);
  std::istringstream single("0 1\n");
  CHECK_THROWS_AS(Potential::parse_table(single), InvalidArgument);
  CHECK_THROWS_AS(Potential::load_table("/nonexistent/table.txt"), InvalidArgument);
}

TEST_CASE("observable names") {
  CHECK(parse_phase_observable("H") == PhaseObservable::energy);
  CHECK(parse_phase_observable("momentum") == PhaseObservable::momentum);
  CHECK(std::string(to_string(PhaseObservable::unity)) == "I");
  CHECK_THROWS_AS(parse_phase_observable("N"), InvalidArgument);
}

TEST_CASE("uniform density gives uniform cells") {
  const auto d = discretize(oscillator(), box(5, 1.0), densities::uniform());
  const Vector p = d.state.probabilities();
  CHECK((p.array() - 1.0 / 25).abs().maxCoeff() <= 1e-15);
  CHECK(d.constraints.size() == 2);
  CHECK(d.cell_centers.size() == 25);
}

TEST_CASE("constraint rows are the observables at cell centres") {
  PhaseModel m;
  m.mass = 2.0;
  m.potential = Potential::harmonic(3.0);
  const PhaseGrid g = box(3, 1.5);
  const auto d = discretize(m, g, densities::uniform(),
                            {PhaseObservable::energy, PhaseObservable::momentum});
  REQUIRE(d.constraints.size() == 3);
  const Matrix c = d.constraints.matrix();
  for (Index j = 0; j < 9; ++j) {
    const auto [q, p] = g.center(static_cast<std::size_t>(j));
    CHECK(c(j, 0) == Approx(p * p / 4.0 + 1.5 * q * q));
    CHECK(c(j, 1) == p);
    CHECK(c(j, 2) == 1.0);
  }
}

TEST_CASE("density errors") {
  CHECK_THROWS_WITH_AS(discretize(oscillator(), box(3, 1.0), [](double q, double) { return q; }),
                       doctest::Contains("negative"), InvalidArgument);
  CHECK_THROWS_WITH_AS(discretize(oscillator(), box(3, 1.0), [](double, double) { return 0.0; }),
                       doctest::Contains("zero total mass"), InvalidArgument);
  PhaseModel m;
  m.potential = Potential::table({{-1.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(discretize(m, box(3, 1.0), densities::uniform()), InvalidArgument);
}

TEST_CASE("midpoint collocation of a canonical density is exactly Gibbs") {
  CHECK(canonical_affinity(16, 1) <= 1e-12);
}

TEST_CASE("quadrature masses approach Gibbs under refinement") {
  const double a8 = canonical_affinity(8, 3);
  const double a16 = canonical_affinity(16, 3);
  const double a32 = canonical_affinity(32, 3);
  CHECK(a8 > a16);
  CHECK(a16 > a32);
  CHECK(a32 > 0.0);
}

TEST_CASE("mean energy converges to the phase-space average") {
  // Canonical oscillator at T = 1: <H> = 1 on the whole plane; the box tail
  // beyond |q|, |p| = 8 is below 1e-12. Cell-centred energies with exact cell
  // masses miss the integral by -(h^2 / 24) * Laplacian(H) = -h^2 / 12.
  const PhaseModel m = oscillator();
  double last = 1.0;
  for (std::size_t cells : {8, 16, 32, 64}) {
    const auto d = discretize(m, box(cells, 8.0), densities::canonical(m, 1.0));
    const double err = std::abs(mean_value(d.state, d.constraints.row(0).values) - 1.0);
    const double h = 16.0 / double(cells);
    CAPTURE(cells);
    CHECK(err < last);
    if (cells >= 32) CHECK(err == Approx(h * h / 12.0).epsilon(1e-2));
    last = err;
  }
}

TEST_CASE("canonical start converges immediately") {
  const PhaseModel m = oscillator();
  const auto r = relax_phase(m, box(10, 5.0, 1), densities::canonical(m, 0.8),
                             {PhaseObservable::energy}, MetricField::uniform(), TauPolicy::constant(1));
  CHECK(r.status == TrajectoryStatus::converged);
  CHECK(r.samples.size() == 1);
}

TEST_CASE("bimodal start relaxes to the grid Gibbs distribution") {
  const PhaseModel m = oscillator();
  const PhaseGrid g = box(10, 4.0);
  const auto init = densities::bimodal(-1.5, 0.0, 1.5, 0.0, 0.5, 0.6);
  const auto d = discretize(m, g, init);
  const auto r = relax_phase(m, g, init, {PhaseObservable::energy}, MetricField::uniform(),
                             TauPolicy::constant(1));
  REQUIRE(r.status == TrajectoryStatus::converged);
  const Vector energies = d.constraints.row(0).values;
  const Vector oracle = testing::gibbs_by_bisection(energies, mean_value(d.state, energies));
  CHECK(testing::total_variation(r.final_state().probabilities(), oracle) <= 1e-6);
}

TEST_CASE("shifted Gaussian relaxes to a drifting equilibrium") {
  const PhaseModel m = oscillator();
  const PhaseGrid g = box(8, 4.0);
  const auto init = densities::gaussian(0.4, 0.9, 0.7, 0.8);
  const std::vector<PhaseObservable> obs{PhaseObservable::energy, PhaseObservable::momentum,
                                         PhaseObservable::unity};
  const auto d = discretize(m, g, init, obs);
  const auto r = relax_phase(m, g, init, obs, MetricField::uniform(), TauPolicy::constant(1));
  REQUIRE(r.status == TrajectoryStatus::converged);
  const Vector p = r.final_state().probabilities();

  // ln p must be an affine function of (H, M): least-squares fit residual.
  const Matrix c = d.constraints.matrix();
  const Vector logp = p.array().log().matrix();
  const Vector coef = c.colPivHouseholderQr().solve(logp);
  CHECK((c * coef - logp).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(std::abs(coef(1)) > 0.1);  // momentum multiplier is active

  const MaxEntResult oracle = solve_maxent(d.constraints.with_targets(d.state));
  CHECK(testing::total_variation(p, oracle.distribution) <= 1e-6);
  CHECK(coef(0) == Approx(-oracle.dual_multipliers(0)).epsilon(1e-5));
  CHECK(coef(1) == Approx(-oracle.dual_multipliers(1)).epsilon(1e-5));
}

TEST_CASE("momentum axis keeps its momentum") {
  PhaseModel m;
  const PhaseGrid g = PhaseGrid::momentum_axis(-3.0, 3.0, 16);
  const auto init = densities::bimodal(0.0, -1.0, 0.0, 1.4, 1.0, 0.4, 0.3);
  const auto r = relax_phase(m, g, init, {PhaseObservable::energy, PhaseObservable::momentum},
                             MetricField::uniform(), TauPolicy::constant(1));
  REQUIRE(r.status == TrajectoryStatus::converged);
  const Vector target = r.constraints.targets();
  for (const auto& s : r.samples) {
    CHECK((s.conserved - target).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + target.cwiseAbs().maxCoeff()));
  }
  CHECK(std::abs(target(1)) > 0.1);
}

}  // TEST_SUITE
