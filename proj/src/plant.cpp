#include "shoulder/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"

namespace shoulder {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

bool in_band(const Eigen::VectorXd& t, double target, double frac) {
  return ((t.array() - target).abs() <= frac * target).all();
}


// Minimax balanced tensions: min max|t - target| subject to J^T t = 0, by
// Lawson's reweighted least squares. Returns the worst relative deviation.
double balanced_tensions(const Eigen::MatrixXd& J, double target, Eigen::VectorXd& t) {
  const Eigen::Index m = J.rows();
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(m, target);
  // Orthonormal basis of torque-free tension patterns.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J.transpose(), Eigen::ComputeFullV);
  const Eigen::Index rank = svd.rank();
  Eigen::MatrixXd N = svd.matrixV().rightCols(m - rank);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    Eigen::MatrixXd WN = w.asDiagonal() * N;
    Eigen::VectorXd y = (N.transpose() * WN).ldlt().solve(WN.transpose() * base);
    Eigen::VectorXd cand = N * y;
    Eigen::VectorXd dev = (cand - base).cwiseAbs();
    double worst = dev.maxCoeff() / target;
    if (worst < best) {
      best = worst;
      t = cand;
    }
    w = w.cwiseProduct(dev.cwiseMax(1e-6 * target));
    w /= w.maxCoeff();
  }
  return best;
}

// Compass search over one group's joints for a posture near `q` whose
// minimax balanced tensions fit well inside the band.
double search_group_posture(const RobotModel& model, const Group& g, double target, double goal, JointVector& q) {
  auto score = [&](const JointVector& x) {
    Eigen::MatrixXd J = muscle_jacobian_full(model, x);
    Eigen::MatrixXd Jg(g.muscles.size(), g.joints.size());
    for (std::size_t r = 0; r < g.muscles.size(); ++r)
      for (std::size_t c = 0; c < g.joints.size(); ++c)
        Jg(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = J(g.muscles[r], g.joints[c]);
    Eigen::VectorXd t;
    return balanced_tensions(Jg, target, t);
  };
  double best = score(q);
  for (double step = deg2rad(4.0); step > deg2rad(0.1) && best > goal; step *= 0.5) {
    bool improved = true;
    while (improved && best > goal) {
      improved = false;
      for (int j : g.joints) {
        for (double dir : {1.0, -1.0}) {
          JointVector x = q;
          auto ju = static_cast<std::size_t>(j);
          x[ju] = std::clamp(x[ju] + dir * step, model.joints[ju].min, model.joints[ju].max);
          if (x[ju] == q[ju]) continue;
          double s = score(x);
          if (s < best) {
            best = s;
            q = x;
            improved = true;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace

void PlantConfig::validate() const {
  auto non_negative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("plant config: ") + what + " must be >= 0");
  };
  non_negative(via_point_noise_sigma, "via_point_noise_sigma");
  non_negative(stretch_compliance, "stretch_compliance");
  non_negative(camera_drift_gain, "camera_drift_gain");
  non_negative(camera_drift_offset, "camera_drift_offset");
  if (!(muscle_stiffness > 0.0)) throw InvalidArgument("plant config: muscle_stiffness must be > 0");
  if (!(settle_tol > 0.0)) throw InvalidArgument("plant config: settle_tol must be > 0");
  if (!(max_joint_speed > 0.0)) throw InvalidArgument("plant config: max_joint_speed must be > 0");
  if (max_inner_iters < 1) throw InvalidArgument("plant config: max_inner_iters must be >= 1");
}

double scapula_deflection(const RobotModel& model, const JointVector& q) {
  double s = 0.0;
  for (Side side : kSides)
    for (int j : model.arm(side).scapula) s += std::abs(q[static_cast<std::size_t>(j)]);
  return s;
}

Plant plant_build(const RobotModel& nominal, const PlantConfig& cfg) {
  cfg.validate();
  nominal.validate_kinematics();
  Plant p;
  p.model_ = nominal;
  p.cfg_ = cfg;
  p.k_eff_ = 1.0 / (1.0 / cfg.muscle_stiffness + cfg.stretch_compliance);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& m : p.model_.muscles)
    for (auto& v : m.via_points)
      for (int a = 0; a < 3; ++a) v.offset[a] += cfg.via_point_noise_sigma * noise(rng);

  JointVector zero(p.model_);
  Eigen::VectorXd l0 = muscle_lengths(p.model_, zero);
  for (std::size_t i = 0; i < p.model_.muscles.size(); ++i)
    p.model_.muscles[i].reference_length = l0[static_cast<Eigen::Index>(i)];

  p.reset(zero, l0);
  return p;
}

void Plant::reset(const JointVector& q, const Eigen::VectorXd& l_cmd) {
  if (q.size() != model_.dof()) throw DimensionMismatch("plant reset: joint vector size");
  if (static_cast<std::size_t>(l_cmd.size()) != model_.muscle_count())
    throw DimensionMismatch("plant reset: command size");
  if (!finite(q.values()) || !finite(l_cmd)) throw NonFinite("plant reset: non-finite input");
  state_.q_true = q;
  state_.q_true.clamp(model_);
  state_.l_cmd = l_cmd;
  refresh_state();
}

void Plant::refresh_state() {
  state_.measured.lengths = state_.l_cmd;
  state_.measured.tensions = tensions(state_.q_true, state_.l_cmd);
  state_.camera_pose_true = plant_camera_pose(*this);
  state_.residual = projected_gradient(state_.q_true, state_.l_cmd).norm();
}

Eigen::VectorXd Plant::tensions(const JointVector& q, const Eigen::VectorXd& l_cmd) const {
  return k_eff_ * (muscle_lengths(model_, q) - l_cmd).cwiseMax(0.0);
}

double Plant::energy(const JointVector& q, const Eigen::VectorXd& l_cmd) const {
  Eigen::VectorXd s = (muscle_lengths(model_, q) - l_cmd).cwiseMax(0.0);
  return 0.5 * k_eff_ * s.squaredNorm();
}

Eigen::VectorXd Plant::projected_gradient(const JointVector& q, const Eigen::VectorXd& l_cmd) const {
  Eigen::MatrixXd J = muscle_jacobian_full(model_, q);
  Eigen::VectorXd g = J.transpose() * tensions(q, l_cmd);
  for (std::size_t j = 0; j < model_.dof(); ++j) {
    const auto& jt = model_.joints[j];
    auto i = static_cast<Eigen::Index>(j);
    if ((q[j] <= jt.min && g[i] > 0.0) || (q[j] >= jt.max && g[i] < 0.0)) g[i] = 0.0;
  }
  return g;
}

PlantState plant_step(Plant& plant, const Eigen::VectorXd& l_cmd, double dt) {
  const RobotModel& model = plant.model_;
  const auto n = static_cast<Eigen::Index>(model.dof());
  if (static_cast<std::size_t>(l_cmd.size()) != model.muscle_count())
    throw DimensionMismatch("plant_step: command has " + std::to_string(l_cmd.size()) + " entries, expected " +
                            std::to_string(model.muscle_count()));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("plant_step: dt must be > 0");
  if (!finite(l_cmd)) throw NonFinite("plant_step: non-finite command");

  const double k = plant.k_eff_;
  const JointVector q0 = plant.state_.q_true;
  const double budget = plant.cfg_.max_joint_speed * dt;
  Eigen::VectorXd lo = model.lower_limits().cwiseMax((q0.values().array() - budget).matrix());
  Eigen::VectorXd hi = model.upper_limits().cwiseMin((q0.values().array() + budget).matrix());

  JointVector q = q0;
  double e = plant.energy(q, l_cmd);
  double mu = 1e-6;
  for (int it = 0; it < plant.cfg_.max_inner_iters; ++it) {
    Eigen::VectorXd s = muscle_lengths(model, q) - l_cmd;
    Eigen::MatrixXd J = muscle_jacobian_full(model, q);
    Eigen::VectorXd t = k * s.cwiseMax(0.0);
    Eigen::VectorXd g = J.transpose() * t;

    // Joints pinned at the reachable box this tick cannot follow the gradient.
    std::vector<bool> free(static_cast<std::size_t>(n), true);
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((q.values()[j] <= lo[j] && g[j] > 0.0) || (q.values()[j] >= hi[j] && g[j] < 0.0)) {
        free[static_cast<std::size_t>(j)] = false;
        g[j] = 0.0;
      }
    }
    if (g.norm() < plant.cfg_.settle_tol) break;

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] > 0.0) H.noalias() += k * J.row(i).transpose() * J.row(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!free[static_cast<std::size_t>(j)]) {
        H.row(j).setZero();
        H.col(j).setZero();
        H(j, j) = 1.0;
      }
    }
    const double scale = H.diagonal().cwiseAbs().maxCoeff() + 1.0;

    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd A = H;
      A.diagonal().array() += mu * scale;
      Eigen::VectorXd dq = -A.ldlt().solve(g);
      JointVector trial(q.values() + dq);
      trial.values() = trial.values().cwiseMax(lo).cwiseMin(hi);
      if (!finite(trial.values())) throw NonFinite("plant_step: non-finite posture");
      double et = plant.energy(trial, l_cmd);
      if (et < e) {
        q = trial;
        e = et;
        mu = std::max(mu * 0.3, 1e-9);
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) break;
  }

  if (!finite(q.values())) throw NonFinite("plant_step: non-finite posture");
  plant.state_.q_true = q;
  plant.state_.l_cmd = l_cmd;
  plant.state_.time += dt;
  plant.refresh_state();
  if (!finite(plant.state_.measured.tensions)) {
    plant.state_.q_true = q0;
    plant.refresh_state();
    throw NonFinite("plant_step: non-finite tensions");
  }
  return plant.state_;
}

PlantState initialize_posture(Plant& plant, double tension_target, const std::optional<JointVector>& hold,
                              int max_iterations) {
  if (!(tension_target > 0.0) || !std::isfinite(tension_target))
    throw InvalidArgument("initialize_posture: tension target must be > 0");
  if (max_iterations < 1) throw InvalidArgument("initialize_posture: max_iterations must be >= 1");
  constexpr double kBand = 0.10;
  constexpr double kDt = 0.02;
  const double still = deg2rad(0.01);

  auto settle_once = [&](Plant& p) {
    JointVector before = p.state_.q_true;
    plant_step(p, p.state_.l_cmd, kDt);
    return (p.state_.q_true.values() - before.values()).cwiseAbs().maxCoeff() < still;
  };

  {
    Plant probe = plant;
    if (settle_once(probe) && in_band(plant.state_.measured.tensions, tension_target, kBand)) {
      plant.reference_lengths_ = plant.state_.l_cmd;
      return plant.state_;
    }
  }

  JointVector posture = hold ? *hold : plant.state_.q_true;
  if (posture.size() != plant.model_.dof()) throw DimensionMismatch("initialize_posture: hold posture size");
  posture.clamp(plant.model_);
  const auto m = static_cast<Eigen::Index>(plant.model_.muscle_count());
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(m, tension_target);

  for (int it = 1; it <= max_iterations; ++it) {
    for (const auto& g : plant.model_.groups)
      search_group_posture(plant.model_, g, tension_target, 0.5 * kBand, posture);
    Eigen::MatrixXd J = muscle_jacobian_full(plant.model_, posture);
    Eigen::VectorXd t = uniform;
    for (const auto& g : plant.model_.groups) {
      Eigen::MatrixXd Jg(g.muscles.size(), g.joints.size());
      for (std::size_t r = 0; r < g.muscles.size(); ++r)
        for (std::size_t c = 0; c < g.joints.size(); ++c)
          Jg(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = J(g.muscles[r], g.joints[c]);
      Eigen::VectorXd tg;
      balanced_tensions(Jg, tension_target, tg);
      for (std::size_t r = 0; r < g.muscles.size(); ++r) t[g.muscles[r]] = tg[static_cast<Eigen::Index>(r)];
    }
    t = t.cwiseMax(0.0);
    plant.reset(posture, muscle_lengths(plant.model_, posture) - t / plant.k_eff_);

    bool settled = false;
    for (int ns = 0; ns < 200 && !settled; ++ns) settled = settle_once(plant);
    if (settled && in_band(plant.state_.measured.tensions, tension_target, kBand)) {
      plant.reference_lengths_ = plant.state_.l_cmd;
      return plant.state_;
    }
    posture = plant.state_.q_true;
  }
  throw NoSettle("initialize_posture: tensions did not settle within the band", max_iterations);
}

Pose plant_camera_pose(const Plant& plant) {
  const RobotModel& m = plant.model();
  const JointVector& q = plant.state().q_true;
  if (m.camera_link < 0) return Pose::identity();
  Pose cam = forward_kinematics(m, q, m.camera_link);
  double d = scapula_deflection(m, q);
  Pose drift(Eigen::Vector3d(0.0, plant.config().camera_drift_offset * d, 0.0),
             Eigen::Quaterniond(Eigen::AngleAxisd(plant.config().camera_drift_gain * d, Eigen::Vector3d::UnitX())));
  return compose(cam, drift);
}

}  // namespace shoulder
