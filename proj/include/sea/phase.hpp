#pragma once

// Reduction of a classical one-degree-of-freedom phase space (q, p) to the
// discrete machinery: cells become events, the Gibbs density becomes cell
// masses, and H, M, I become constraint rows.

#include <array>
#include <functional>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "sea/integrator.hpp"

namespace sea {

struct PhaseGrid {
  double q_min = -1.0;
  double q_max = 1.0;
  double p_min = -1.0;
  double p_max = 1.0;
  std::size_t n_q = 2;
  std::size_t n_p = 2;
  // Gauss-Legendre points per axis used for cell masses; 1 is midpoint
  // collocation.
  int quadrature = 3;
  // A momentum-only grid has a single q cell of unit width at q = 0.
  bool momentum_only = false;

  static PhaseGrid momentum_axis(double p_min, double p_max, std::size_t n_p,
                                 int quadrature = 3);

  void validate() const;
  std::size_t cell_count() const { return n_q * n_p; }
  double dq() const;
  double dp() const;
  double cell_measure() const { return dq() * dp(); }
  double q_center(std::size_t a) const;
  double p_center(std::size_t b) const;
  // Cell j = a * n_p + b.
  std::array<double, 2> center(std::size_t j) const;

  bool operator==(const PhaseGrid&) const = default;
};

/// V(q): free, harmonic (stiffness/2 q^2), or a linearly interpolated table.
class Potential {
 public:
  enum class Kind { free, harmonic, table };

  static Potential free();
  static Potential harmonic(double stiffness);
  /// Points need not be sorted; at least two distinct q values.
  static Potential table(std::vector<std::pair<double, double>> points);
  /// Two-column numeric text (q V), '#' comments and blank lines allowed.
  /// Throws InvalidArgument naming the offending line.
  static Potential parse_table(std::istream& in);
  static Potential load_table(const std::string& path);

  Kind kind() const noexcept { return kind_; }
  double stiffness() const noexcept { return stiffness_; }
  const std::vector<std::pair<double, double>>& points() const noexcept {
    return points_;
  }
  /// Throws InvalidArgument outside a table's range.
  double operator()(double q) const;

 private:
  Kind kind_ = Kind::free;
  double stiffness_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

struct PhaseModel {
  double mass = 1.0;
  Potential potential;
  // Particle species. On a single-particle phase space every N_i equals the
  // unity function, so they add no rows beyond I.
  std::size_t species = 1;

  double hamiltonian(double q, double p) const;
};

enum class PhaseObservable { energy, momentum, unity };

const char* to_string(PhaseObservable o);
/// "H", "M", "I" (also "energy", "momentum", "unity").
PhaseObservable parse_phase_observable(const std::string& name);

using DensityRule = std::function<double(double q, double p)>;

namespace densities {
DensityRule uniform();
/// exp(-H / (k_B T))
DensityRule canonical(const PhaseModel& model, double temperature,
                      double k_b = 1.0);
DensityRule gaussian(double q0, double p0, double sigma_q, double sigma_p);
/// weight * gaussian(a) + (1 - weight) * gaussian(b)
DensityRule bimodal(double q0, double p0, double q1, double p1, double sigma_q,
                    double sigma_p, double weight = 0.5);
}  // namespace densities

struct DiscretizedPhase {
  SquareRootState state;
  ConstraintSet constraints;
  std::vector<std::array<double, 2>> cell_centers;
};

/// Cell masses p_j = integral of f_G over cell j, normalized; constraint rows
/// are the observables at cell centres. Throws InvalidArgument on a negative
/// or non-finite density or zero total mass.
DiscretizedPhase discretize(const PhaseModel& model, const PhaseGrid& grid,
                            const DensityRule& density,
                            const std::vector<PhaseObservable>& observables = {
                                PhaseObservable::energy, PhaseObservable::unity});

/// Dissipative relaxation of the discretized density under the SEA flow.
TrajectoryRecord relax_phase(const PhaseModel& model, const PhaseGrid& grid,
                             const DensityRule& initial,
                             const std::vector<PhaseObservable>& observables,
                             const MetricField& metric, const TauPolicy& tau,
                             const IntegratorConfig& config = {},
                             const SeaOptions& options = {});

}  // namespace sea
