#include "shoulder/model_io.hpp"

#include <fstream>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"

namespace shoulder {

using nlohmann::json;

namespace {

json vec(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d to_vec(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ModelError(what + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Vector3d rpy_of(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d R = q.toRotationMatrix();
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  return {roll, pitch, yaw};
}

Eigen::Quaterniond quat_of_rpy(const Eigen::Vector3d& rpy) {
  return Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
         Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX());
}

json index_names(const std::vector<int>& idx, const auto& items) {
  json out = json::array();
  for (int i : idx) out.push_back(items[static_cast<std::size_t>(i)].name);
  return out;
}

std::vector<int> joint_list(const RobotModel& m, const json& arr) {
  std::vector<int> out;
  for (const auto& n : arr) out.push_back(m.joint_index(n.get<std::string>()));
  return out;
}

}  // namespace

json model_to_json(const RobotModel& model) {
  json doc;
  doc["name"] = model.name;
  doc["units"] = {{"length", "m"}, {"angle", "deg"}};

  json links = json::array();
  for (const Link& l : model.links) {
    json jl;
    jl["name"] = l.name;
    jl["parent"] = l.parent < 0 ? json(nullptr) : json(model.links[static_cast<std::size_t>(l.parent)].name);
    jl["xyz"] = vec(l.offset.position());
    jl["rpy_deg"] = vec(rpy_of(l.offset.orientation()) * kRadToDeg);
    jl["joint"] = l.joint < 0 ? json(nullptr) : json(model.joints[static_cast<std::size_t>(l.joint)].name);
    links.push_back(jl);
  }
  doc["links"] = links;

  json joints = json::array();
  for (const Joint& j : model.joints)
    joints.push_back({{"name", j.name}, {"axis", vec(j.axis)}, {"limits_deg", {rad2deg(j.min), rad2deg(j.max)}}});
  doc["joints"] = joints;

  json muscles = json::array();
  for (const MusclePath& m : model.muscles) {
    json vps = json::array();
    for (const ViaPoint& v : m.via_points)
      vps.push_back({{"link", model.links[static_cast<std::size_t>(v.link)].name}, {"offset", vec(v.offset)}});
    muscles.push_back({{"name", m.name}, {"via_points", vps}, {"reference_length", m.reference_length}});
  }
  doc["muscles"] = muscles;

  json groups = json::array();
  for (const Group& g : model.groups)
    groups.push_back(
        {{"name", g.name}, {"joints", index_names(g.joints, model.joints)}, {"muscles", index_names(g.muscles, model.muscles)}});
  doc["groups"] = groups;

  doc["hands"] = {{"left", model.links[static_cast<std::size_t>(model.arm(Side::Left).hand_link)].name},
                  {"right", model.links[static_cast<std::size_t>(model.arm(Side::Right).hand_link)].name}};
  doc["camera"] = model.links[static_cast<std::size_t>(model.camera_link)].name;

  json arms;
  for (Side side : kSides) {
    const ArmLayout& a = model.arm(side);
    arms[to_string(side)] = {{"scapula", index_names(a.scapula, model.joints)},
                             {"glenohumeral", index_names(a.glenohumeral, model.joints)},
                             {"elbow", index_names(a.elbow, model.joints)},
                             {"wrist", index_names(a.wrist, model.joints)},
                             {"scapula_group", model.groups[static_cast<std::size_t>(a.scapula_group)].name},
                             {"arm_group", model.groups[static_cast<std::size_t>(a.arm_group)].name}};
  }
  doc["arms"] = arms;
  return doc;
}

RobotModel model_from_json(const json& doc) {
  RobotModel m;
  try {
    m.name = doc.value("name", "");
    for (const auto& jj : doc.at("joints")) {
      Joint j;
      j.name = jj.at("name").get<std::string>();
      const Eigen::Vector3d axis = to_vec(jj.at("axis"), "joint axis");
      if (axis.norm() < 1e-12) throw ModelError("joint '" + j.name + "' has a zero axis");
      j.axis = axis.normalized();
      const auto& lim = jj.at("limits_deg");
      j.min = deg2rad(lim.at(0).get<double>());
      j.max = deg2rad(lim.at(1).get<double>());
      m.joints.push_back(j);
    }
    for (const auto& jl : doc.at("links")) {
      Link l;
      l.name = jl.at("name").get<std::string>();
      if (!jl.at("parent").is_null()) l.parent = m.link_index(jl.at("parent").get<std::string>());
      const Eigen::Vector3d rpy = to_vec(jl.value("rpy_deg", json::array({0.0, 0.0, 0.0})), "rpy_deg") * kDegToRad;
      l.offset = Pose(to_vec(jl.at("xyz"), "xyz"), quat_of_rpy(rpy));
      if (jl.contains("joint") && !jl.at("joint").is_null()) {
        l.joint = m.joint_index(jl.at("joint").get<std::string>());
        auto& joint = m.joints[static_cast<std::size_t>(l.joint)];
        if (joint.child_link >= 0) throw ModelError("joint '" + joint.name + "' drives more than one link");
        joint.child_link = static_cast<int>(m.links.size());
      }
      m.links.push_back(l);
    }
    for (const auto& jm : doc.at("muscles")) {
      MusclePath p;
      p.name = jm.at("name").get<std::string>();
      for (const auto& v : jm.at("via_points"))
        p.via_points.push_back({m.link_index(v.at("link").get<std::string>()), to_vec(v.at("offset"), "via point")});
      p.reference_length = jm.value("reference_length", 0.0);
      m.muscles.push_back(p);
    }
    for (const auto& jg : doc.at("groups")) {
      Group g;
      g.name = jg.at("name").get<std::string>();
      g.joints = joint_list(m, jg.at("joints"));
      for (const auto& n : jg.at("muscles")) g.muscles.push_back(m.muscle_index(n.get<std::string>()));
      m.groups.push_back(g);
    }
    const auto& hands = doc.at("hands");
    const auto& arms = doc.at("arms");
    for (Side side : kSides) {
      ArmLayout& a = m.arms[side_index(side)];
      const auto& ja = arms.at(to_string(side));
      a.scapula = joint_list(m, ja.at("scapula"));
      a.glenohumeral = joint_list(m, ja.at("glenohumeral"));
      a.elbow = joint_list(m, ja.at("elbow"));
      a.wrist = joint_list(m, ja.at("wrist"));
      a.scapula_group = m.group_index(ja.at("scapula_group").get<std::string>());
      a.arm_group = m.group_index(ja.at("arm_group").get<std::string>());
      a.hand_link = m.link_index(hands.at(to_string(side)).get<std::string>());
    }
    m.camera_link = m.link_index(doc.at("camera").get<std::string>());
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
  m.validate();
  return m;
}

RobotModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ModelError("cannot parse model file " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

void save_model(const RobotModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file: " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

std::filesystem::path default_model_path() { return std::filesystem::path(SHOULDER_DATA_DIR) / "default_model.json"; }

}  // namespace shoulder
