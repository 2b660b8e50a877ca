#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sea/integrator.hpp"

namespace sea::cli {

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);

/// %.17g
std::string format_number(double value);

/// Columns t, p_1..p_n, S, Pi_S, DoD, ell, drift_max.
std::string trajectory_csv(const TrajectoryRecord& record);

/// Columns cell, q, p, p_initial, p_final.
std::string cells_csv(const std::vector<std::array<double, 2>>& centers,
                      const Vector& initial, const Vector& final);

std::string dump_json(const nlohmann::json& doc);

nlohmann::json to_json(const Vector& v);

}  // namespace sea::cli
