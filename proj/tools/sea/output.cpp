#include "output.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <unistd.h>

#include "sea/errors.hpp"

namespace sea::cli {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  const fs::path target(path);
  const fs::path tmp = target.parent_path() /
                       fmt::format(".{}.{}.{}.tmp", target.filename().string(),
                                   static_cast<long>(::getpid()), counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename onto '" + path + "': " + ec.message());
  }
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

std::string trajectory_csv(const TrajectoryRecord& record) {
  fmt::memory_buffer buf;
  const Index n = record.samples.empty() ? 0 : record.samples.front().gamma.size();
  fmt::format_to(std::back_inserter(buf), "t");
  for (Index j = 0; j < n; ++j) fmt::format_to(std::back_inserter(buf), ",p_{}", j + 1);
  fmt::format_to(std::back_inserter(buf), ",S,Pi_S,DoD,ell,drift_max\n");
  for (const auto& s : record.samples) {
    fmt::format_to(std::back_inserter(buf), "{:.17g}", s.t);
    for (Index j = 0; j < n; ++j) {
      fmt::format_to(std::back_inserter(buf), ",{:.17g}", s.gamma(j) * s.gamma(j));
    }
    fmt::format_to(std::back_inserter(buf), ",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                   s.entropy, s.entropy_production, s.dod, s.arc_length, s.drift_max);
  }
  return fmt::to_string(buf);
}

std::string cells_csv(const std::vector<std::array<double, 2>>& centers,
                      const Vector& initial, const Vector& final) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "cell,q,p,p_initial,p_final\n");
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const auto k = static_cast<Index>(j);
    fmt::format_to(std::back_inserter(buf), "{},{:.17g},{:.17g},{:.17g},{:.17g}\n", j + 1,
                   centers[j][0], centers[j][1], initial(k), final(k));
  }
  return fmt::to_string(buf);
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

nlohmann::json to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace sea::cli
