#pragma once

#include <filesystem>

#include "critns/trajectory.hpp"
#include "json.hpp"

namespace critns {

// Directory layout: manifest.json plus snap_<i>.cfd per snapshot.
void save_trajectory(const Trajectory& tr, const std::filesystem::path& dir,
                     const nlohmann::json& config_echo = nlohmann::json::object());
Trajectory load_trajectory(const std::filesystem::path& dir);

// Doubles that may be infinite are written as the strings "inf" / "-inf".
nlohmann::json json_number(double v);
double json_to_double(const nlohmann::json& j);

}  // namespace critns
