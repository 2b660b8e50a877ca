#include "commands.hpp"

#include <filesystem>

#include <spdlog/spdlog.h>

#include "config.hpp"
#include "output.hpp"
#include "sea/errors.hpp"

namespace sea::cli {

namespace fs = std::filesystem;
using nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::simulate;
  if (name == "maxent") return Command::maxent;
  if (name == "analyze") return Command::analyze;
  throw InvalidArgument("unknown command '" + name + "'");
}

namespace {

json labelled(const ConstraintSet& constraints, const Vector& values) {
  json out = json::object();
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    out[constraints.row(i).name] = values(static_cast<Index>(i));
  }
  return out;
}

int status_code(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::converged: return kOk;
    case TrajectoryStatus::max_time_reached: return kMaxTimeReached;
    case TrajectoryStatus::error: return kNumericalFailure;
  }
  return kNumericalFailure;
}

std::string output_path(const RunContext& ctx, const RunConfig& c, const char* suffix) {
  return (fs::path(ctx.out_dir) / (c.output.stem + suffix)).string();
}

int simulate(const RunConfig& c, const RunContext& ctx) {
  const Problem p = build_problem(c);
  const TrajectoryRecord record =
      integrate(p.state, p.constraints, p.metric, p.tau, c.integrator, p.options);
  const TrajectorySample& last = record.back();
  const SquareRootState final_state = record.final_state();
  const PathLength length = path_length(record);

  json summary = {
      {"status", to_string(record.status)},
      {"message", record.message},
      {"time", last.t},
      {"accepted_steps", record.accepted_steps},
      {"rejected_steps", record.rejected_steps},
      {"projections", record.projections},
      {"samples", record.samples.size()},
      {"entropy_initial", record.front().entropy},
      {"entropy_final", last.entropy},
      {"dod_final", last.dod},
      {"drift_max", last.drift_max},
      {"endpoint", to_json(final_state.probabilities())},
      {"d_sea", {{"value", length.value}, {"tail_bound", length.tail_bound}, {"partial", length.partial}}},
  };

  json targets = labelled(record.constraints, record.constraints.targets());
  summary["targets"] = targets;
  try {
    const SeaSolution end = sea_direction(final_state, record.constraints, p.metric,
                                          TauPolicy::constant(1.0), record.final_support,
                                          p.options);
    summary["beta"] = labelled(record.constraints, end.beta);
  } catch (const Error& e) {
    summary["beta"] = nullptr;
    summary["beta_error"] = e.what();
  }
  try {
    const MaxEntResult oracle = solve_maxent(record.constraints, record.initial_support, c.maxent);
    summary["maxent"] = to_json(oracle.distribution);
    summary["kl"] = kl_divergence(p.state, oracle);
    summary["kl_endpoint"] = kl_divergence(final_state, oracle);
  } catch (const Error& e) {
    summary["maxent"] = nullptr;
    summary["kl"] = nullptr;
    summary["kl_endpoint"] = nullptr;
    summary["maxent_error"] = e.what();
  }
  summary["config"] = to_json(c);

  if (c.output.trajectory) {
    write_atomic(output_path(ctx, c, "_trajectory.csv"), trajectory_csv(record));
  }
  if (c.phase) {
    write_atomic(output_path(ctx, c, "_cells.csv"),
                 cells_csv(p.cell_centers, p.state.probabilities(), final_state.probabilities()));
  }
  write_atomic(output_path(ctx, c, "_summary.json"), dump_json(summary));

  ctx.log->info("{}: {} at t = {:.6g} after {} steps, d_SEA = {:.10g}", c.output.stem,
                to_string(record.status), last.t, record.accepted_steps, length.value);
  if (record.status == TrajectoryStatus::error) ctx.log->error("{}: {}", c.output.stem, record.message);
  return status_code(record.status);
}

int maxent(const RunConfig& c, const RunContext& ctx) {
  const Problem p = build_problem(c);
  const ConstraintSet constraints = p.constraints.with_targets(p.state);
  const MaxEntResult r = solve_maxent(constraints, Support::of(p.state), c.maxent);
  std::vector<Index> support(r.support.indices().begin(), r.support.indices().end());
  const json report = {
      {"distribution", to_json(r.distribution)},
      {"dual_multipliers", labelled(constraints, r.dual_multipliers)},
      {"targets", labelled(constraints, constraints.targets())},
      {"achieved_means", labelled(constraints, r.achieved_means)},
      {"iterations", r.iterations},
      {"residual_norm", r.residual_norm},
      {"support", support},
      {"entropy", entropy(SquareRootState::from_probabilities(r.distribution), c.k_b)},
      {"config", to_json(c)},
  };
  write_atomic(output_path(ctx, c, "_maxent.json"), dump_json(report));
  ctx.log->info("{}: MaxEnt solved in {} iterations, residual {:.3g}", c.output.stem,
                r.iterations, r.residual_norm);
  return kOk;
}

int analyze(const RunConfig& c, const RunContext& ctx) {
  const Problem p = build_problem(c);
  const DisequilibriumReport r =
      disequilibrium_report(p.state, p.constraints, p.metric, p.tau, c.integrator, p.options);
  const json report = {
      {"dod", r.dod},
      {"affinity_norm_sq", r.affinity_norm_sq},
      {"d_sea", r.path_length},
      {"d_sea_tail_bound", r.path_tail_bound},
      {"kl", r.kl_divergence},
      {"status", to_string(r.status)},
      {"config", to_json(c)},
  };
  write_atomic(output_path(ctx, c, "_report.json"), dump_json(report));
  ctx.log->info("{}: DoD = {:.6g}, (L|L) = {:.6g}, d_SEA = {:.6g}, KL = {:.6g}", c.output.stem,
                r.dod, r.affinity_norm_sq, r.path_length, r.kl_divergence);
  return status_code(r.status);
}

}  // namespace

int run_command(Command command, const std::string& config_path, const RunContext& ctx) {
  try {
    const RunConfig config = load_config(config_path);
    ctx.log->debug("{}: loaded {}", config.output.stem, config_path);
    switch (command) {
      case Command::simulate: return simulate(config, ctx);
      case Command::maxent: return maxent(config, ctx);
      case Command::analyze: return analyze(config, ctx);
    }
  } catch (const ConfigError& e) {
    ctx.log->error("{}", e.what());
    return kConfigError;
  } catch (const InvalidArgument& e) {
    ctx.log->error("{}: {}", config_path, e.what());
    return kConfigError;
  } catch (const InfeasibleError& e) {
    ctx.log->error("{}: infeasible constraints: {}", config_path, e.what());
    return kInfeasible;
  } catch (const NumericalError& e) {
    ctx.log->error("{}: numerical failure: {}", config_path, e.what());
    return kNumericalFailure;
  } catch (const std::exception& e) {
    ctx.log->error("{}: {}", config_path, e.what());
    return 1;
  }
  return 1;
}

}  // namespace sea::cli
