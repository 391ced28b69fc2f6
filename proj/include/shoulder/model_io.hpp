#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "shoulder/robot_model.hpp"

namespace shoulder {

/**
 * Robot model file (JSON, meters and degrees).
 *
 *   links:   [{name, parent|null, xyz[3], rpy_deg[3], joint|null}]  parents first
 *   joints:  [{name, axis[3], limits_deg[2]}]
 *   muscles: [{name, via_points:[{link, offset[3]}], reference_length}]
 *   groups:  [{name, joints[], muscles[]}]  exactly four
 *   hands:   {left: link, right: link}
 *   camera:  link
 *   arms:    {left|right: {scapula[], glenohumeral[], elbow[], wrist[], scapula_group, arm_group}}
 *
 * rpy_deg is fixed-axis roll/pitch/yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
 */
nlohmann::json model_to_json(const RobotModel& model);
RobotModel model_from_json(const nlohmann::json& doc);

RobotModel load_model(const std::filesystem::path& path);
void save_model(const RobotModel& model, const std::filesystem::path& path);

/// The humanlike default model shipped with the library.
RobotModel default_model();

/// Path of the default model file in the source tree.
std::filesystem::path default_model_path();

}  // namespace shoulder
