#include "sea/phase.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sea/errors.hpp"

namespace sea {

namespace {

struct Rule1D {
  std::vector<double> nodes;    // on [-1/2, 1/2]
  std::vector<double> weights;  // sum to 1
};

Rule1D gauss_legendre(int points) {
  switch (points) {
    case 1:
      return {{0.0}, {1.0}};
    case 2: {
      const double x = 0.5 / std::sqrt(3.0);
      return {{-x, x}, {0.5, 0.5}};
    }
    case 3: {
      const double x = 0.5 * std::sqrt(0.6);
      return {{-x, 0.0, x}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
    }
    case 4: {
      const double a = 0.5 * std::sqrt(3.0 / 7 - 2.0 / 7 * std::sqrt(1.2));
      const double b = 0.5 * std::sqrt(3.0 / 7 + 2.0 / 7 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 72;
      const double wb = (18.0 - std::sqrt(30.0)) / 72;
      return {{-b, -a, a, b}, {wb, wa, wa, wb}};
    }
    case 5: {
      const double a = 0.5 / 3 * std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7));
      const double b = 0.5 / 3 * std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7));
      const double w0 = 128.0 / 450;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 1800;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 1800;
      return {{-b, -a, 0.0, a, b}, {wb, wa, w0, wa, wb}};
    }
    default:
      throw InvalidArgument("phase grid quadrature must use 1 to 5 points per axis");
  }
}

}  // namespace

PhaseGrid PhaseGrid::momentum_axis(double p_min, double p_max, std::size_t n_p,
                                   int quadrature) {
  PhaseGrid g;
  g.q_min = -0.5;
  g.q_max = 0.5;
  g.p_min = p_min;
  g.p_max = p_max;
  g.n_q = 1;
  g.n_p = n_p;
  g.quadrature = quadrature;
  g.momentum_only = true;
  return g;
}

void PhaseGrid::validate() const {
  if (!std::isfinite(p_min) || !std::isfinite(p_max) || !(p_min < p_max)) {
    throw InvalidArgument("phase grid momentum bounds must be finite and ordered");
  }
  if (n_p < 2) throw InvalidArgument("phase grid needs at least 2 momentum cells");
  if (momentum_only) {
    if (n_q != 1) throw InvalidArgument("momentum-only grid must have n_q = 1");
  } else {
    if (!std::isfinite(q_min) || !std::isfinite(q_max) || !(q_min < q_max)) {
      throw InvalidArgument("phase grid position bounds must be finite and ordered");
    }
    if (n_q < 2) throw InvalidArgument("phase grid needs at least 2 position cells");
  }
  gauss_legendre(quadrature);
}

double PhaseGrid::dq() const {
  return momentum_only ? 1.0 : (q_max - q_min) / static_cast<double>(n_q);
}

double PhaseGrid::dp() const { return (p_max - p_min) / static_cast<double>(n_p); }

double PhaseGrid::q_center(std::size_t a) const {
  return momentum_only ? 0.0 : q_min + (static_cast<double>(a) + 0.5) * dq();
}

double PhaseGrid::p_center(std::size_t b) const {
  return p_min + (static_cast<double>(b) + 0.5) * dp();
}

std::array<double, 2> PhaseGrid::center(std::size_t j) const {
  return {q_center(j / n_p), p_center(j % n_p)};
}

Potential Potential::free() { return Potential{}; }

Potential Potential::harmonic(double stiffness) {
  if (!(stiffness > 0.0) || !std::isfinite(stiffness)) {
    throw InvalidArgument("harmonic stiffness must be finite and > 0");
  }
  Potential v;
  v.kind_ = Kind::harmonic;
  v.stiffness_ = stiffness;
  return v;
}

Potential Potential::table(std::vector<std::pair<double, double>> points) {
  std::sort(points.begin(), points.end());
  if (points.size() < 2) throw InvalidArgument("potential table needs at least 2 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second)) {
      throw InvalidArgument("potential table has non-finite entries");
    }
    if (i > 0 && points[i].first == points[i - 1].first) {
      throw InvalidArgument("potential table repeats q value");
    }
  }
  Potential v;
  v.kind_ = Kind::table;
  v.points_ = std::move(points);
  return v;
}

Potential Potential::parse_table(std::istream& in) {
  std::vector<std::pair<double, double>> points;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double q = 0.0;
    double v = 0.0;
    if (!(fields >> q)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw InvalidArgument("potential table line " + std::to_string(number) +
                            ": expected two numbers");
    }
    std::string rest;
    if (!(fields >> v) || (fields >> rest)) {
      throw InvalidArgument("potential table line " + std::to_string(number) +
                            ": expected two numbers");
    }
    points.emplace_back(q, v);
  }
  return table(std::move(points));
}

Potential Potential::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open potential table '" + path + "'");
  return parse_table(in);
}

double Potential::operator()(double q) const {
  switch (kind_) {
    case Kind::free:
      return 0.0;
    case Kind::harmonic:
      return 0.5 * stiffness_ * q * q;
    case Kind::table: {
      if (q < points_.front().first || q > points_.back().first) {
        std::ostringstream os;
        os << "q = " << q << " lies outside the potential table range ["
           << points_.front().first << ", " << points_.back().first << "]";
        throw InvalidArgument(os.str());
      }
      auto hi = std::lower_bound(points_.begin(), points_.end(), q,
                                 [](const auto& pt, double x) { return pt.first < x; });
      if (hi == points_.begin()) return hi->second;
      auto lo = hi - 1;
      const double s = (q - lo->first) / (hi->first - lo->first);
      return lo->second + s * (hi->second - lo->second);
    }
  }
  return 0.0;
}

double PhaseModel::hamiltonian(double q, double p) const {
  return p * p / (2.0 * mass) + potential(q);
}

const char* to_string(PhaseObservable o) {
  switch (o) {
    case PhaseObservable::energy: return "H";
    case PhaseObservable::momentum: return "M";
    case PhaseObservable::unity: return "I";
  }
  return "?";
}

PhaseObservable parse_phase_observable(const std::string& name) {
  if (name == "H" || name == "energy") return PhaseObservable::energy;
  if (name == "M" || name == "momentum") return PhaseObservable::momentum;
  if (name == "I" || name == "unity") return PhaseObservable::unity;
  throw InvalidArgument("unknown phase observable '" + name +
                        "' (expected H, M or I)");
}

namespace densities {

DensityRule uniform() {
  return [](double, double) { return 1.0; };
}

DensityRule canonical(const PhaseModel& model, double temperature, double k_b) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be > 0");
  return [model, beta = 1.0 / (k_b * temperature)](double q, double p) {
    return std::exp(-beta * model.hamiltonian(q, p));
  };
}

DensityRule gaussian(double q0, double p0, double sigma_q, double sigma_p) {
  if (!(sigma_q > 0.0) || !(sigma_p > 0.0)) {
    throw InvalidArgument("gaussian widths must be > 0");
  }
  return [=](double q, double p) {
    const double a = (q - q0) / sigma_q;
    const double b = (p - p0) / sigma_p;
    return std::exp(-0.5 * (a * a + b * b));
  };
}

DensityRule bimodal(double q0, double p0, double q1, double p1, double sigma_q,
                    double sigma_p, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw InvalidArgument("bimodal weight must lie in [0, 1]");
  }
  auto a = gaussian(q0, p0, sigma_q, sigma_p);
  auto b = gaussian(q1, p1, sigma_q, sigma_p);
  return [=](double q, double p) { return weight * a(q, p) + (1.0 - weight) * b(q, p); };
}

}  // namespace densities

DiscretizedPhase discretize(const PhaseModel& model, const PhaseGrid& grid,
                            const DensityRule& density,
                            const std::vector<PhaseObservable>& observables) {
  grid.validate();
  if (!(model.mass > 0.0)) throw InvalidArgument("particle mass must be > 0");
  if (!density) throw InvalidArgument("density rule is empty");
  const Rule1D rule_q = grid.momentum_only ? gauss_legendre(1) : gauss_legendre(grid.quadrature);
  const Rule1D rule_p = gauss_legendre(grid.quadrature);
  const std::size_t n = grid.cell_count();
  const double dq = grid.dq();
  const double dp = grid.dp();

  Vector mass(static_cast<Index>(n));
  DiscretizedPhase out;
  out.cell_centers.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto [qc, pc] = grid.center(j);
    out.cell_centers[j] = {qc, pc};
    double m = 0.0;
    for (std::size_t a = 0; a < rule_q.nodes.size(); ++a) {
      for (std::size_t b = 0; b < rule_p.nodes.size(); ++b) {
        const double q = grid.momentum_only ? 0.0 : qc + rule_q.nodes[a] * dq;
        const double p = pc + rule_p.nodes[b] * dp;
        const double f = density(q, p);
        if (!std::isfinite(f) || f < 0.0) {
          std::ostringstream os;
          os << "density is negative or non-finite (" << f << ") at q = " << q
             << ", p = " << p;
          throw InvalidArgument(os.str());
        }
        m += rule_q.weights[a] * rule_p.weights[b] * f;
      }
    }
    mass(static_cast<Index>(j)) = m * dq * dp;
  }
  const double total = mass.sum();
  if (!(total > 0.0)) throw InvalidArgument("density has zero total mass on the grid");
  out.state = SquareRootState::from_probabilities(Vector(mass / total));

  std::vector<Constraint> rows;
  for (PhaseObservable o : observables) {
    Vector values(static_cast<Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const auto [q, p] = out.cell_centers[j];
      switch (o) {
        case PhaseObservable::energy: values(static_cast<Index>(j)) = model.hamiltonian(q, p); break;
        case PhaseObservable::momentum: values(static_cast<Index>(j)) = p; break;
        case PhaseObservable::unity: values(static_cast<Index>(j)) = 1.0; break;
      }
    }
    rows.push_back({to_string(o), std::move(values)});
  }
  out.constraints = ConstraintSet(std::move(rows));
  return out;
}

TrajectoryRecord relax_phase(const PhaseModel& model, const PhaseGrid& grid,
                             const DensityRule& initial,
                             const std::vector<PhaseObservable>& observables,
                             const MetricField& metric, const TauPolicy& tau,
                             const IntegratorConfig& config,
                             const SeaOptions& options) {
  const DiscretizedPhase d = discretize(model, grid, initial, observables);
  return integrate(d.state, d.constraints, metric, tau, config, options);
}

}  // namespace sea
