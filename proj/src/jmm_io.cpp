#include "shoulder/jmm_io.hpp"

#include <fstream>

#include "shoulder/errors.hpp"

namespace shoulder {

using nlohmann::json;

namespace {

constexpr int kSnapshotVersion = 1;

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd to_mat(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw LayoutMismatch(what + " has wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw LayoutMismatch(what + " has wrong column count");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd to_vec(const json& j, Eigen::Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) throw LayoutMismatch(what + " has wrong length");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

json map_to_json(const JointMuscleMap& map) {
  json doc;
  doc["format"] = "joint-muscle-map";
  doc["version"] = kSnapshotVersion;
  doc["layout_hash"] = map.layout_hash;
  const JmmConfig& c = map.config;
  doc["config"] = {{"hidden", c.hidden}, {"lr", c.lr}, {"lr_final", c.lr_final}, {"batch", c.batch},
                   {"epochs", c.epochs}, {"tension_scale", c.tension_scale}, {"length_jitter", c.length_jitter},
                   {"geometric_samples", c.geometric_samples}, {"validation_fraction", c.validation_fraction}};
  json groups = json::array();
  for (const GroupNetwork& n : map.groups) {
    groups.push_back({{"name", n.name},
                      {"muscles", n.muscles},
                      {"joints", n.joints},
                      {"hidden", n.hidden()},
                      {"W1", mat(n.W1)},
                      {"b1", vec(n.b1)},
                      {"W2", mat(n.W2)},
                      {"b2", vec(n.b2)},
                      {"input_mean", vec(n.input.mean)},
                      {"input_scale", vec(n.input.scale)},
                      {"output_mean", vec(n.output.mean)},
                      {"output_scale", vec(n.output.scale)}});
  }
  doc["groups"] = groups;
  return doc;
}

JointMuscleMap map_from_json(const json& doc, const RobotModel& model) {
  try {
    if (doc.at("format").get<std::string>() != "joint-muscle-map") throw LayoutMismatch("not a joint-muscle-map snapshot");
    if (doc.at("version").get<int>() != kSnapshotVersion) throw LayoutMismatch("unsupported snapshot version");
    if (doc.at("layout_hash").get<std::string>() != model.layout_hash())
      throw LayoutMismatch("snapshot layout hash does not match the model");
    JmmConfig cfg;
    const json& jc = doc.at("config");
    cfg.hidden = jc.at("hidden").get<int>();
    cfg.lr = jc.at("lr").get<double>();
    cfg.lr_final = jc.at("lr_final").get<double>();
    cfg.batch = jc.at("batch").get<int>();
    cfg.epochs = jc.at("epochs").get<int>();
    cfg.tension_scale = jc.at("tension_scale").get<double>();
    cfg.length_jitter = jc.value("length_jitter", cfg.length_jitter);
    cfg.geometric_samples = jc.at("geometric_samples").get<std::size_t>();
    cfg.validation_fraction = jc.at("validation_fraction").get<double>();

    JointMuscleMap map = JointMuscleMap::create(model, cfg, 0);
    const json& groups = doc.at("groups");
    if (groups.size() != map.groups.size()) throw LayoutMismatch("snapshot group count does not match the model");
    for (std::size_t g = 0; g < map.groups.size(); ++g) {
      GroupNetwork& n = map.groups[g];
      const json& jg = groups[g];
      if (jg.at("name").get<std::string>() != n.name || jg.at("muscles").get<int>() != n.muscles ||
          jg.at("joints").get<int>() != n.joints)
        throw LayoutMismatch("snapshot group '" + jg.at("name").get<std::string>() + "' does not match the model");
      const int H = jg.at("hidden").get<int>();
      n.W1 = to_mat(jg.at("W1"), H, 2 * n.muscles, "W1");
      n.b1 = to_vec(jg.at("b1"), H, "b1");
      n.W2 = to_mat(jg.at("W2"), n.joints, H, "W2");
      n.b2 = to_vec(jg.at("b2"), n.joints, "b2");
      n.input.mean = to_vec(jg.at("input_mean"), 2 * n.muscles, "input_mean");
      n.input.scale = to_vec(jg.at("input_scale"), 2 * n.muscles, "input_scale");
      n.output.mean = to_vec(jg.at("output_mean"), n.joints, "output_mean");
      n.output.scale = to_vec(jg.at("output_scale"), n.joints, "output_scale");
      if ((n.input.scale.array() <= 0.0).any() || (n.output.scale.array() <= 0.0).any())
        throw LayoutMismatch("snapshot normalization scales must be positive");
      if (!n.all_finite()) throw LayoutMismatch("snapshot contains non-finite weights");
      n.adam = AdamState{};
      n.adam.mW1 = n.adam.vW1 = Eigen::MatrixXd::Zero(n.W1.rows(), n.W1.cols());
      n.adam.mW2 = n.adam.vW2 = Eigen::MatrixXd::Zero(n.W2.rows(), n.W2.cols());
      n.adam.mb1 = n.adam.vb1 = Eigen::VectorXd::Zero(n.b1.size());
      n.adam.mb2 = n.adam.vb2 = Eigen::VectorXd::Zero(n.b2.size());
    }
    return map;
  } catch (const json::exception& e) {
    throw LayoutMismatch(std::string("malformed snapshot: ") + e.what());
  }
}

void save_map(const JointMuscleMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write snapshot: " + path.string());
  out << map_to_json(map).dump() << '\n';
}

JointMuscleMap load_map(const std::filesystem::path& path, const RobotModel& model) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open snapshot: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw LayoutMismatch(std::string("cannot parse snapshot: ") + e.what());
  }
  return map_from_json(doc, model);
}

}  // namespace shoulder
