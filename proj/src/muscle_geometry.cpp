#include "shoulder/muscle_geometry.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "shoulder/angles.hpp"
#include "shoulder/csv.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"

namespace shoulder {

namespace {

Eigen::Vector3d via_world(const std::vector<Pose>& poses, const ViaPoint& v) {
  return poses[static_cast<std::size_t>(v.link)].transform_point(v.offset);
}

double path_length(const std::vector<Pose>& poses, const MusclePath& m) {
  double len = 0.0;
  Eigen::Vector3d prev = via_world(poses, m.via_points.front());
  for (std::size_t k = 1; k < m.via_points.size(); ++k) {
    const Eigen::Vector3d cur = via_world(poses, m.via_points[k]);
    len += (cur - prev).norm();
    prev = cur;
  }
  return len;
}

const Group& group_at(const RobotModel& model, int group) {
  if (group < 0 || group >= static_cast<int>(model.groups.size())) throw UnknownGroup(std::to_string(group));
  return model.groups[static_cast<std::size_t>(group)];
}

}  // namespace

Eigen::VectorXd muscle_lengths(const RobotModel& model, const JointVector& q) {
  const auto poses = link_poses(model, q);
  Eigen::VectorXd out(static_cast<Eigen::Index>(model.muscles.size()));
  for (std::size_t i = 0; i < model.muscles.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = path_length(poses, model.muscles[i]);
  return out;
}

Eigen::VectorXd group_muscle_lengths(const RobotModel& model, const JointVector& q, int group) {
  const Group& g = group_at(model, group);
  const auto poses = link_poses(model, q);
  Eigen::VectorXd out(static_cast<Eigen::Index>(g.muscles.size()));
  for (std::size_t i = 0; i < g.muscles.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = path_length(poses, model.muscles[static_cast<std::size_t>(g.muscles[i])]);
  return out;
}

Eigen::MatrixXd muscle_jacobian_full(const RobotModel& model, const JointVector& q) {
  const auto poses = link_poses(model, q);
  const auto n_dof = static_cast<Eigen::Index>(model.dof());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.muscles.size()), n_dof);

  std::vector<JointFrame> frames;
  frames.reserve(model.dof());
  for (std::size_t j = 0; j < model.dof(); ++j) frames.push_back(joint_frame(model, poses, static_cast<int>(j)));

  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    const MusclePath& m = model.muscles[i];
    for (std::size_t k = 0; k + 1 < m.via_points.size(); ++k) {
      const ViaPoint& a = m.via_points[k];
      const ViaPoint& b = m.via_points[k + 1];
      const Eigen::Vector3d pa = via_world(poses, a);
      const Eigen::Vector3d pb = via_world(poses, b);
      const Eigen::Vector3d d = pb - pa;
      const double len = d.norm();
      if (len < 1e-12) continue;
      const Eigen::Vector3d u = d / len;
      for (std::size_t j = 0; j < model.dof(); ++j) {
        const int jj = static_cast<int>(j);
        const bool moves_a = model.joint_moves_link(jj, a.link);
        const bool moves_b = model.joint_moves_link(jj, b.link);
        if (moves_a == moves_b) continue;  // segment moves rigidly or not at all
        const JointFrame& f = frames[j];
        const Eigen::Vector3d vb = moves_b ? Eigen::Vector3d(f.axis.cross(pb - f.origin)) : Eigen::Vector3d::Zero();
        const Eigen::Vector3d va = moves_a ? Eigen::Vector3d(f.axis.cross(pa - f.origin)) : Eigen::Vector3d::Zero();
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += u.dot(vb - va);
      }
    }
  }
  return J;
}

Eigen::MatrixXd muscle_jacobian(const RobotModel& model, const JointVector& q, int group) {
  const Group& g = group_at(model, group);
  const Eigen::MatrixXd full = muscle_jacobian_full(model, q);
  Eigen::MatrixXd J(static_cast<Eigen::Index>(g.muscles.size()), static_cast<Eigen::Index>(g.joints.size()));
  for (std::size_t r = 0; r < g.muscles.size(); ++r)
    for (std::size_t c = 0; c < g.joints.size(); ++c)
      J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = full(g.muscles[r], g.joints[c]);
  return J;
}

Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[idx[i]];
  return out;
}

void scatter(const Eigen::VectorXd& part, const std::vector<int>& idx, Eigen::VectorXd& full) {
  for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = part[static_cast<Eigen::Index>(i)];
}

std::vector<JmmSample> geometric_jmm_dataset(const RobotModel& model, int group, std::size_t n, std::uint64_t seed) {
  const Group& g = group_at(model, group);
  if (n == 0) throw InvalidArgument("dataset size must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<JmmSample> out;
  out.reserve(n);
  JointVector q(model);
  for (std::size_t s = 0; s < n; ++s) {
    Eigen::VectorXd qg(static_cast<Eigen::Index>(g.joints.size()));
    for (std::size_t c = 0; c < g.joints.size(); ++c) {
      const Joint& j = model.joints[static_cast<std::size_t>(g.joints[c])];
      qg[static_cast<Eigen::Index>(c)] = j.min + (j.max - j.min) * unit(rng);
    }
    scatter(qg, g.joints, q.values());
    JmmSample sample;
    sample.lengths = group_muscle_lengths(model, q, group);
    sample.tensions = Eigen::VectorXd::Zero(sample.lengths.size());
    sample.q = qg;
    out.push_back(std::move(sample));
  }
  return out;
}

void save_dataset_csv(const std::vector<JmmSample>& samples, const std::filesystem::path& path) {
  if (samples.empty()) throw InvalidArgument("cannot write an empty dataset");
  const auto m = samples.front().lengths.size();
  const auto n = samples.front().q.size();
  CsvWriter csv(path);
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("muscle_" + std::to_string(i));
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("tension_" + std::to_string(i));
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("joint_" + std::to_string(i));
  csv.header(header);
  for (const JmmSample& s : samples) {
    std::vector<double> row;
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(s.lengths[i]);
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(s.tensions[i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(rad2deg(s.q[i]));
    csv.row(row);
  }
}

std::vector<JmmSample> load_dataset_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  Eigen::Index m = 0, t = 0, n = 0;
  for (const auto& h : table.header) {
    if (h.rfind("muscle_", 0) == 0) ++m;
    else if (h.rfind("tension_", 0) == 0) ++t;
    else if (h.rfind("joint_", 0) == 0) ++n;
    else throw InvalidArgument("unexpected dataset column: " + h);
  }
  if (m != t || m == 0 || n == 0) throw InvalidArgument("dataset header must contain matching muscle/tension columns");
  std::vector<JmmSample> out;
  for (const auto& row : table.rows) {
    JmmSample s;
    s.lengths.resize(m);
    s.tensions.resize(m);
    s.q.resize(n);
    for (Eigen::Index i = 0; i < m; ++i) s.lengths[i] = row[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < m; ++i) s.tensions[i] = row[static_cast<std::size_t>(m + i)];
    for (Eigen::Index i = 0; i < n; ++i) s.q[i] = deg2rad(row[static_cast<std::size_t>(2 * m + i)]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace shoulder
