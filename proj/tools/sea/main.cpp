#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

spdlog::level::level_enum level_from_env(bool quiet) {
  if (quiet) return spdlog::level::err;
  const char* env = std::getenv("SEA_LOG_LEVEL");
  const std::string v = env ? env : "info";
  if (v == "error") return spdlog::level::err;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::info;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steepest-entropy-ascent relaxation toward constrained MaxEnt distributions"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_dir = ".";
  unsigned jobs = 1;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("configs", configs, "Configuration files")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Directory for output files")->capture_default_str();
    sub->add_option("--jobs,-j", jobs, "Configs processed in parallel")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
    sub->add_flag("--quiet,-q", quiet, "Only log errors");
  };
  add_common(app.add_subcommand("simulate", "Integrate the trajectory to MaxEnt"));
  add_common(app.add_subcommand("maxent", "Solve for the constrained MaxEnt distribution"));
  add_common(app.add_subcommand("analyze", "Report disequilibrium measures of the initial state"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto log = spdlog::stderr_color_mt("sea");
  log->set_pattern("%^[%l]%$ %v");
  log->set_level(level_from_env(quiet));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    log->error("cannot create output directory '{}': {}", out_dir, ec.message());
    return 2;
  }

  const sea::cli::Command command = sea::cli::parse_command(app.get_subcommands().front()->get_name());
  const sea::cli::RunContext ctx{out_dir, log};

  std::vector<int> codes(configs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      codes[i] = sea::cli::run_command(command, configs[i], ctx);
    }
  };
  const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(configs.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}
