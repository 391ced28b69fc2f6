#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "shoulder/jmm.hpp"

namespace shoulder {

/// Snapshot format: {format, version, layout_hash, config, groups:[{name, W1, b1, W2, b2, ...}]}.
nlohmann::json map_to_json(const JointMuscleMap& map);

/// Throws LayoutMismatch when the snapshot was made for a different model layout.
JointMuscleMap map_from_json(const nlohmann::json& doc, const RobotModel& model);

void save_map(const JointMuscleMap& map, const std::filesystem::path& path);
JointMuscleMap load_map(const std::filesystem::path& path, const RobotModel& model);

}  // namespace shoulder
