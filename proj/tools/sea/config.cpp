#include "config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sea/errors.hpp"

namespace sea::cli {

namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& where, const std::string& field,
                         const std::string& what)
    : std::runtime_error(where + ": " + (field.empty() ? "" : "field '" + field + "': ") + what),
      field_(field) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  std::string where(const YAML::Node& node) const {
    const YAML::Mark m = node.Mark();
    if (m.is_null()) return source_;
    return source_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& what) const {
    throw ConfigError(where(node), field, what);
  }

  void expect_map(const YAML::Node& node, const std::string& field,
                  std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) {
        std::string list;
        for (const char* k : keys) list += (list.empty() ? "" : ", ") + std::string(k);
        fail(kv.first, join(field, key), "unknown key (allowed: " + list + ")");
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& field, const char* what) const {
    if (!node.IsScalar()) fail(node, field, std::string("expected ") + what);
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, std::string("expected ") + what + ", got '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& field) const {
    const double v = scalar<double>(node, field, "a number");
    if (!std::isfinite(v)) fail(node, field, "must be finite");
    return v;
  }

  double positive(const YAML::Node& node, const std::string& field) const {
    const double v = number(node, field);
    if (!(v > 0.0)) fail(node, field, "must be > 0");
    return v;
  }

  std::size_t count(const YAML::Node& node, const std::string& field) const {
    const auto v = scalar<long long>(node, field, "an integer");
    if (v < 0) fail(node, field, "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(number(node[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

 private:
  std::string source_;
};

template <class T, class F>
void optional_field(const YAML::Node& parent, const char* key, T& target, F&& read) {
  const YAML::Node n = parent[key];
  if (n) target = read(n);
}

IntegratorConfig read_integrator(const Reader& r, const YAML::Node& node) {
  const std::string f = "integrator";
  r.expect_map(node, f, {"rel_tol", "abs_tol", "initial_step", "max_step", "stop_dod",
                         "max_time", "record_every", "record_interval", "adaptive",
                         "projection_factor", "max_velocity_change"});
  IntegratorConfig c;
  auto pos = [&](const char* key) {
    return [&r, key, &f](const YAML::Node& n) { return r.positive(n, Reader::join(f, key)); };
  };
  optional_field(node, "rel_tol", c.rel_tol, pos("rel_tol"));
  optional_field(node, "abs_tol", c.abs_tol, pos("abs_tol"));
  optional_field(node, "initial_step", c.initial_step, pos("initial_step"));
  optional_field(node, "max_step", c.max_step, pos("max_step"));
  optional_field(node, "stop_dod", c.stop_dod, pos("stop_dod"));
  optional_field(node, "max_time", c.max_time, pos("max_time"));
  optional_field(node, "projection_factor", c.projection_factor, pos("projection_factor"));
  optional_field(node, "record_every", c.record_every, [&](const YAML::Node& n) {
    return r.count(n, f + ".record_every");
  });
  optional_field(node, "record_interval", c.record_interval, [&](const YAML::Node& n) {
    const double v = r.number(n, f + ".record_interval");
    if (v < 0.0) r.fail(n, f + ".record_interval", "must be >= 0");
    return v;
  });
  optional_field(node, "max_velocity_change", c.max_velocity_change, [&](const YAML::Node& n) {
    const double v = r.number(n, f + ".max_velocity_change");
    if (v < 0.0) r.fail(n, f + ".max_velocity_change", "must be >= 0");
    return v;
  });
  optional_field(node, "adaptive", c.adaptive, [&](const YAML::Node& n) {
    return r.scalar<bool>(n, f + ".adaptive", "true or false");
  });
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    r.fail(node, f, e.what());
  }
  return c;
}

MaxEntOptions read_maxent(const Reader& r, const YAML::Node& node) {
  const std::string f = "maxent";
  r.expect_map(node, f, {"tolerance", "max_iterations", "feasibility_margin"});
  MaxEntOptions o;
  optional_field(node, "tolerance", o.tolerance, [&](const YAML::Node& n) {
    return r.positive(n, f + ".tolerance");
  });
  optional_field(node, "feasibility_margin", o.feasibility_margin, [&](const YAML::Node& n) {
    const double v = r.number(n, f + ".feasibility_margin");
    if (v < 0.0) r.fail(n, f + ".feasibility_margin", "must be >= 0");
    return v;
  });
  optional_field(node, "max_iterations", o.max_iterations, [&](const YAML::Node& n) {
    const auto v = r.count(n, f + ".max_iterations");
    if (v == 0) r.fail(n, f + ".max_iterations", "must be >= 1");
    return static_cast<int>(v);
  });
  return o;
}

PhaseSpec read_phase(const Reader& r, const YAML::Node& node, const std::string& base_dir) {
  const std::string f = "problem.phase";
  r.expect_map(node, f, {"mass", "potential", "grid", "density", "observables"});
  PhaseSpec s;
  optional_field(node, "mass", s.mass, [&](const YAML::Node& n) { return r.positive(n, f + ".mass"); });

  if (const YAML::Node pot = node["potential"]) {
    const std::string pf = f + ".potential";
    r.expect_map(pot, pf, {"kind", "stiffness", "file"});
    optional_field(pot, "kind", s.potential.kind, [&](const YAML::Node& n) {
      return r.scalar<std::string>(n, pf + ".kind", "a string");
    });
    optional_field(pot, "stiffness", s.potential.stiffness, [&](const YAML::Node& n) {
      return r.positive(n, pf + ".stiffness");
    });
    const std::string& kind = s.potential.kind;
    if (kind != "free" && kind != "harmonic" && kind != "table") {
      r.fail(pot["kind"], pf + ".kind", "expected free, harmonic or table");
    }
    if (kind == "table") {
      if (!pot["file"]) r.fail(pot, pf + ".file", "required for a table potential");
      fs::path file = r.scalar<std::string>(pot["file"], pf + ".file", "a path");
      if (file.is_relative()) file = fs::path(base_dir) / file;
      s.potential.file = fs::absolute(file).lexically_normal().string();
      try {
        Potential::load_table(s.potential.file);
      } catch (const InvalidArgument& e) {
        r.fail(pot["file"], pf + ".file", e.what());
      }
    } else if (pot["file"]) {
      r.fail(pot["file"], pf + ".file", "only allowed for a table potential");
    }
  }

  if (const YAML::Node g = node["grid"]) {
    const std::string gf = f + ".grid";
    r.expect_map(g, gf, {"q_min", "q_max", "p_min", "p_max", "n_q", "n_p", "quadrature",
                         "momentum_only"});
    PhaseGrid& grid = s.grid;
    optional_field(g, "momentum_only", grid.momentum_only, [&](const YAML::Node& n) {
      return r.scalar<bool>(n, gf + ".momentum_only", "true or false");
    });
    if (grid.momentum_only) {
      grid.n_q = 1;
      grid.q_min = -0.5;
      grid.q_max = 0.5;
    }
    auto num = [&](const char* key) {
      return [&r, &gf, key](const YAML::Node& n) { return r.number(n, gf + "." + key); };
    };
    optional_field(g, "q_min", grid.q_min, num("q_min"));
    optional_field(g, "q_max", grid.q_max, num("q_max"));
    optional_field(g, "p_min", grid.p_min, num("p_min"));
    optional_field(g, "p_max", grid.p_max, num("p_max"));
    optional_field(g, "n_q", grid.n_q, [&](const YAML::Node& n) { return r.count(n, gf + ".n_q"); });
    optional_field(g, "n_p", grid.n_p, [&](const YAML::Node& n) { return r.count(n, gf + ".n_p"); });
    optional_field(g, "quadrature", grid.quadrature, [&](const YAML::Node& n) {
      return static_cast<int>(r.count(n, gf + ".quadrature"));
    });
    try {
      grid.validate();
    } catch (const InvalidArgument& e) {
      r.fail(g, gf, e.what());
    }
  }

  if (const YAML::Node d = node["density"]) {
    const std::string df = f + ".density";
    r.expect_map(d, df, {"kind", "temperature", "q0", "p0", "q1", "p1", "sigma_q", "sigma_p",
                         "weight"});
    DensitySpec& ds = s.density;
    optional_field(d, "kind", ds.kind, [&](const YAML::Node& n) {
      return r.scalar<std::string>(n, df + ".kind", "a string");
    });
    if (ds.kind != "uniform" && ds.kind != "canonical" && ds.kind != "gaussian" &&
        ds.kind != "bimodal") {
      r.fail(d["kind"], df + ".kind", "expected uniform, canonical, gaussian or bimodal");
    }
    auto num = [&](const char* key) {
      return [&r, &df, key](const YAML::Node& n) { return r.number(n, df + "." + key); };
    };
    auto pos = [&](const char* key) {
      return [&r, &df, key](const YAML::Node& n) { return r.positive(n, df + "." + key); };
    };
    optional_field(d, "temperature", ds.temperature, pos("temperature"));
    optional_field(d, "q0", ds.q0, num("q0"));
    optional_field(d, "p0", ds.p0, num("p0"));
    optional_field(d, "q1", ds.q1, num("q1"));
    optional_field(d, "p1", ds.p1, num("p1"));
    optional_field(d, "sigma_q", ds.sigma_q, pos("sigma_q"));
    optional_field(d, "sigma_p", ds.sigma_p, pos("sigma_p"));
    optional_field(d, "weight", ds.weight, [&](const YAML::Node& n) {
      const double w = r.number(n, df + ".weight");
      if (w < 0.0 || w > 1.0) r.fail(n, df + ".weight", "must lie in [0, 1]");
      return w;
    });
  }

  if (const YAML::Node obs = node["observables"]) {
    const std::string of = f + ".observables";
    if (!obs.IsSequence()) r.fail(obs, of, "expected a list of H, M, I");
    s.observables.clear();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string item = of + "[" + std::to_string(i) + "]";
      std::string name;
      try {
        name = to_string(parse_phase_observable(r.scalar<std::string>(obs[i], item, "a string")));
      } catch (const InvalidArgument& e) {
        r.fail(obs[i], item, e.what());
      }
      if (!seen.insert(name).second) r.fail(obs[i], item, "observable '" + name + "' listed twice");
      s.observables.push_back(name);
    }
  }
  if (std::find(s.observables.begin(), s.observables.end(), "I") == s.observables.end()) {
    s.observables.push_back("I");
  }
  return s;
}

MetricSpec read_metric(const Reader& r, const YAML::Node& node, std::size_t n) {
  const std::string f = "metric";
  r.expect_map(node, f, {"kind", "weights", "field", "delta", "matrix"});
  MetricSpec m;
  optional_field(node, "kind", m.kind, [&](const YAML::Node& k) {
    return r.scalar<std::string>(k, f + ".kind", "a string");
  });
  auto forbid = [&](const char* key) {
    if (node[key]) r.fail(node[key], f + "." + key, "not used by metric kind '" + m.kind + "'");
  };
  if (m.kind == "uniform") {
    forbid("weights"); forbid("field"); forbid("delta"); forbid("matrix");
  } else if (m.kind == "diagonal") {
    forbid("field"); forbid("delta"); forbid("matrix");
    if (!node["weights"]) r.fail(node, f + ".weights", "required for a diagonal metric");
    m.weights = r.numbers(node["weights"], f + ".weights");
    if (m.weights.size() != n) {
      r.fail(node["weights"], f + ".weights",
             "expected " + std::to_string(n) + " weights, got " + std::to_string(m.weights.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!(m.weights[j] > 0.0)) {
        r.fail(node["weights"][j], f + ".weights[" + std::to_string(j) + "]", "must be > 0");
      }
    }
  } else if (m.kind == "diagonal_field") {
    forbid("weights"); forbid("matrix");
    optional_field(node, "field", m.field, [&](const YAML::Node& k) {
      return r.scalar<std::string>(k, f + ".field", "a string");
    });
    if (m.field != "resistive") r.fail(node["field"], f + ".field", "expected resistive");
    optional_field(node, "delta", m.delta, [&](const YAML::Node& k) {
      return r.positive(k, f + ".delta");
    });
  } else if (m.kind == "dense") {
    forbid("weights"); forbid("field"); forbid("delta");
    const YAML::Node mat = node["matrix"];
    if (!mat) r.fail(node, f + ".matrix", "required for a dense metric");
    if (!mat.IsSequence() || mat.size() != n) {
      r.fail(mat, f + ".matrix", "expected " + std::to_string(n) + " rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::string row = f + ".matrix[" + std::to_string(i) + "]";
      m.matrix.push_back(r.numbers(mat[i], row));
      if (m.matrix.back().size() != n) r.fail(mat[i], row, "expected " + std::to_string(n) + " entries");
    }
    Matrix g(static_cast<Index>(n), static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(static_cast<Index>(i), static_cast<Index>(j)) = m.matrix[i][j];
    try {
      MetricField::dense(g);
    } catch (const Error& e) {
      r.fail(mat, f + ".matrix", e.what());
    }
  } else {
    r.fail(node["kind"], f + ".kind", "expected uniform, diagonal, diagonal_field or dense");
  }
  return m;
}

TauSpec read_tau(const Reader& r, const YAML::Node& node) {
  const std::string f = "tau";
  r.expect_map(node, f, {"mode", "value"});
  TauSpec t;
  optional_field(node, "mode", t.mode, [&](const YAML::Node& k) {
    return r.scalar<std::string>(k, f + ".mode", "a string");
  });
  if (t.mode != "constant" && t.mode != "entropy_production" && t.mode != "speed") {
    r.fail(node["mode"], f + ".mode", "expected constant, entropy_production or speed");
  }
  optional_field(node, "value", t.value, [&](const YAML::Node& k) {
    return r.positive(k, f + ".value");
  });
  return t;
}

std::vector<Constraint> to_rows(const std::vector<ConstraintSpec>& specs) {
  std::vector<Constraint> rows;
  for (const auto& s : specs) {
    rows.push_back({s.name, Eigen::Map<const Vector>(s.values.data(), static_cast<Index>(s.values.size()))});
  }
  return rows;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                          std::to_string(e.mark.column + 1),
                      "", e.msg);
  }
  const Reader r(source);
  if (!root || root.IsNull()) throw ConfigError(source, "", "empty configuration");
  r.expect_map(root, "", {"k_b", "problem", "metric", "tau", "integrator", "maxent", "output"});

  RunConfig c;
  optional_field(root, "k_b", c.k_b, [&](const YAML::Node& n) { return r.positive(n, "k_b"); });

  const YAML::Node problem = root["problem"];
  if (!problem) r.fail(root, "problem", "missing");
  r.expect_map(problem, "problem", {"probabilities", "constraints", "phase"});
  const bool has_p = static_cast<bool>(problem["probabilities"]);
  const bool has_phase = static_cast<bool>(problem["phase"]);
  if (has_p == has_phase) {
    r.fail(problem, "problem", "give exactly one of 'probabilities' or 'phase'");
  }

  std::size_t n = 0;
  if (has_p) {
    const YAML::Node pn = problem["probabilities"];
    c.probabilities = r.numbers(pn, "problem.probabilities");
    n = c.probabilities.size();
    if (n == 0) r.fail(pn, "problem.probabilities", "must not be empty");
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (c.probabilities[j] < 0.0) {
        r.fail(pn[j], "problem.probabilities[" + std::to_string(j) + "]", "must be >= 0");
      }
      total += c.probabilities[j];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "must sum to 1 (sum is " << total << ")";
      r.fail(pn, "problem.probabilities", os.str());
    }
    if (const YAML::Node cn = problem["constraints"]) {
      if (!cn.IsSequence()) r.fail(cn, "problem.constraints", "expected a list");
      std::set<std::string> names;
      for (std::size_t i = 0; i < cn.size(); ++i) {
        const std::string item = "problem.constraints[" + std::to_string(i) + "]";
        r.expect_map(cn[i], item, {"name", "values"});
        ConstraintSpec s;
        if (!cn[i]["name"]) r.fail(cn[i], item + ".name", "missing");
        if (!cn[i]["values"]) r.fail(cn[i], item + ".values", "missing");
        s.name = r.scalar<std::string>(cn[i]["name"], item + ".name", "a string");
        if (s.name.empty()) r.fail(cn[i]["name"], item + ".name", "must not be empty");
        if (!names.insert(s.name).second) r.fail(cn[i]["name"], item + ".name", "duplicate name '" + s.name + "'");
        s.values = r.numbers(cn[i]["values"], item + ".values");
        if (s.values.size() != n) {
          r.fail(cn[i]["values"], item + ".values",
                 "expected " + std::to_string(n) + " values, got " + std::to_string(s.values.size()));
        }
        c.constraints.push_back(std::move(s));
      }
    }
    if (c.constraints.empty()) c.constraints.push_back({"I", std::vector<double>(n, 1.0)});
    try {
      const ConstraintSet set(to_rows(c.constraints));
      c.constraints.clear();
      for (const auto& row : set.rows()) {
        c.constraints.push_back({row.name, std::vector<double>(row.values.data(), row.values.data() + row.values.size())});
      }
    } catch (const InvalidArgument& e) {
      r.fail(problem["constraints"] ? problem["constraints"] : problem, "problem.constraints", e.what());
    }
  } else {
    if (problem["constraints"]) {
      r.fail(problem["constraints"], "problem.constraints",
             "not allowed with 'phase' (use phase.observables)");
    }
    c.phase = read_phase(r, problem["phase"], base_dir);
    n = c.phase->grid.cell_count();
  }

  if (const YAML::Node m = root["metric"]) c.metric = read_metric(r, m, n);
  if (const YAML::Node t = root["tau"]) c.tau = read_tau(r, t);
  if (const YAML::Node i = root["integrator"]) c.integrator = read_integrator(r, i);
  if (const YAML::Node x = root["maxent"]) c.maxent = read_maxent(r, x);
  if (const YAML::Node o = root["output"]) {
    r.expect_map(o, "output", {"stem", "trajectory"});
    optional_field(o, "stem", c.output.stem, [&](const YAML::Node& k) {
      return r.scalar<std::string>(k, "output.stem", "a string");
    });
    if (c.output.stem.find('/') != std::string::npos) {
      r.fail(o["stem"], "output.stem", "must be a plain file name");
    }
    optional_field(o, "trajectory", c.output.trajectory, [&](const YAML::Node& k) {
      return r.scalar<bool>(k, "output.trajectory", "true or false");
    });
  }
  if (c.output.stem.empty()) {
    const std::string stem = fs::path(source).stem().string();
    c.output.stem = stem.empty() || stem.front() == '<' ? "run" : stem;
  }
  if (c.phase) {
    try {
      build_problem(c);
    } catch (const InvalidArgument& e) {
      r.fail(problem["phase"], "problem.phase", e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "", "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const fs::path dir = fs::path(path).parent_path();
  return parse_config(buffer.str(), path, dir.empty() ? "." : dir.string());
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json problem = json::object();
  if (c.phase) {
    const PhaseSpec& s = *c.phase;
    json pot = {{"kind", s.potential.kind}};
    if (s.potential.kind == "harmonic") pot["stiffness"] = s.potential.stiffness;
    if (s.potential.kind == "table") pot["file"] = s.potential.file;
    const PhaseGrid& g = s.grid;
    const DensitySpec& d = s.density;
    problem["phase"] = {
        {"mass", s.mass},
        {"potential", pot},
        {"grid",
         {{"q_min", g.q_min}, {"q_max", g.q_max}, {"p_min", g.p_min}, {"p_max", g.p_max},
          {"n_q", g.n_q}, {"n_p", g.n_p}, {"quadrature", g.quadrature},
          {"momentum_only", g.momentum_only}}},
        {"density",
         {{"kind", d.kind}, {"temperature", d.temperature}, {"q0", d.q0}, {"p0", d.p0},
          {"q1", d.q1}, {"p1", d.p1}, {"sigma_q", d.sigma_q}, {"sigma_p", d.sigma_p},
          {"weight", d.weight}}},
        {"observables", s.observables}};
  } else {
    problem["probabilities"] = c.probabilities;
    json rows = json::array();
    for (const auto& s : c.constraints) rows.push_back({{"name", s.name}, {"values", s.values}});
    problem["constraints"] = rows;
  }

  json metric = {{"kind", c.metric.kind}};
  if (c.metric.kind == "diagonal") metric["weights"] = c.metric.weights;
  if (c.metric.kind == "diagonal_field") {
    metric["field"] = c.metric.field;
    metric["delta"] = c.metric.delta;
  }
  if (c.metric.kind == "dense") metric["matrix"] = c.metric.matrix;

  const IntegratorConfig& i = c.integrator;
  return {
      {"k_b", c.k_b},
      {"problem", problem},
      {"metric", metric},
      {"tau", {{"mode", c.tau.mode}, {"value", c.tau.value}}},
      {"integrator",
       {{"rel_tol", i.rel_tol}, {"abs_tol", i.abs_tol}, {"initial_step", i.initial_step},
        {"max_step", i.max_step}, {"stop_dod", i.stop_dod}, {"max_time", i.max_time},
        {"record_every", i.record_every}, {"record_interval", i.record_interval},
        {"adaptive", i.adaptive}, {"projection_factor", i.projection_factor},
        {"max_velocity_change", i.max_velocity_change}}},
      {"maxent",
       {{"tolerance", c.maxent.tolerance}, {"max_iterations", c.maxent.max_iterations},
        {"feasibility_margin", c.maxent.feasibility_margin}}},
      {"output", {{"stem", c.output.stem}, {"trajectory", c.output.trajectory}}},
  };
}

namespace {

Potential make_potential(const PotentialSpec& s) {
  if (s.kind == "harmonic") return Potential::harmonic(s.stiffness);
  if (s.kind == "table") return Potential::load_table(s.file);
  return Potential::free();
}

DensityRule make_density(const DensitySpec& d, const PhaseModel& model, double k_b) {
  if (d.kind == "uniform") return densities::uniform();
  if (d.kind == "gaussian") return densities::gaussian(d.q0, d.p0, d.sigma_q, d.sigma_p);
  if (d.kind == "bimodal") {
    return densities::bimodal(d.q0, d.p0, d.q1, d.p1, d.sigma_q, d.sigma_p, d.weight);
  }
  return densities::canonical(model, d.temperature, k_b);
}

}  // namespace

Problem build_problem(const RunConfig& c) {
  Problem out;
  out.options.k_b = c.k_b;
  if (c.phase) {
    PhaseModel model;
    model.mass = c.phase->mass;
    model.potential = make_potential(c.phase->potential);
    std::vector<PhaseObservable> obs;
    for (const auto& name : c.phase->observables) obs.push_back(parse_phase_observable(name));
    DiscretizedPhase d =
        discretize(model, c.phase->grid, make_density(c.phase->density, model, c.k_b), obs);
    out.state = std::move(d.state);
    out.constraints = std::move(d.constraints);
    out.cell_centers = std::move(d.cell_centers);
  } else {
    out.state = SquareRootState::from_probabilities(
        std::span<const double>(c.probabilities.data(), c.probabilities.size()));
    out.constraints = ConstraintSet(to_rows(c.constraints));
  }

  const auto n = out.state.size();
  if (c.metric.kind == "diagonal") {
    out.metric = MetricField::diagonal(Eigen::Map<const Vector>(c.metric.weights.data(), n));
  } else if (c.metric.kind == "diagonal_field") {
    out.metric = MetricField::resistive(c.metric.delta);
  } else if (c.metric.kind == "dense") {
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) g(i, j) = c.metric.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    out.metric = MetricField::dense(g);
  } else {
    out.metric = MetricField::uniform();
  }

  if (c.tau.mode == "entropy_production") {
    out.tau = TauPolicy::prescribed_entropy_production(c.tau.value);
  } else if (c.tau.mode == "speed") {
    out.tau = TauPolicy::prescribed_speed(c.tau.value);
  } else {
    out.tau = TauPolicy::constant(c.tau.value);
  }
  return out;
}

}  // namespace sea::cli
