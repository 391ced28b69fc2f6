#include "shoulder/rhythm_ik.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"

namespace shoulder {

namespace {

constexpr double kLambdaMin = 1e-6;
constexpr double kLambdaMax = 1e2;

struct PoseError {
  Eigen::Matrix<double, 6, 1> weighted;
  double pos = 0.0;
  double rot = 0.0;
};

PoseError pose_error(const RobotModel& model, const IkRequest& req, const JointVector& q) {
  const Pose p = hand_pose(model, q, req.hand);
  PoseError e;
  const Eigen::Vector3d dp = req.target.position() - p.position();
  const Eigen::Vector3d dr = orientation_error(req.target.orientation(), p.orientation());
  e.weighted << req.position_weight * dp, req.orientation_weight * dr;
  e.pos = dp.norm();
  e.rot = dr.norm();
  return e;
}

bool converged(const IkRequest& req, const PoseError& e) { return e.pos <= req.tol_pos && e.rot <= req.tol_rot; }

}  // namespace

void IkRequest::validate(const RobotModel& model) const {
  if (!(tol_pos > 0.0) || !(tol_rot > 0.0)) throw InvalidArgument("IK tolerances must be positive");
  if (max_iters < 1) throw InvalidArgument("IK max_iters must be at least 1");
  if (!(position_weight > 0.0) || !(orientation_weight >= 0.0)) throw InvalidArgument("IK weights must be positive");
  if (!target.is_finite()) throw InvalidArgument("IK target is not finite");
  if (q_init.size() != model.dof()) throw DimensionMismatch("IK seed does not match the model");
  if (!q_init.values().allFinite()) throw InvalidArgument("IK seed is not finite");
}

void RhythmParams::validate() const {
  if (!(A >= 0.0 && A < 1.0)) throw InvalidArgument("rhythm ratio A must lie in [0, 1)");
}

IkResult ik_fixed_scapula(const RobotModel& model, const IkRequest& req) {
  req.validate(model);
  const std::vector<int> active = model.arm(req.hand).distal_joints();
  const auto n = static_cast<Eigen::Index>(active.size());

  IkResult res;
  res.q = req.q_init;
  res.q.clamp(model);
  PoseError err = pose_error(model, req, res.q);
  res.error_history.push_back(err.weighted.norm());

  Eigen::Matrix<double, 6, 6> W = Eigen::Matrix<double, 6, 6>::Zero();
  W.diagonal() << Eigen::Vector3d::Constant(req.position_weight), Eigen::Vector3d::Constant(req.orientation_weight);

  double lambda = 1e-3;
  while (!converged(req, err)) {
    if (res.iterations >= req.max_iters)
      throw NoConvergence("fixed-scapula IK did not converge within " + std::to_string(req.max_iters) + " iterations",
                          err.weighted.norm());
    const Matrix6X J = W * hand_jacobian(model, res.q, req.hand, active);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd Jte = J.transpose() * err.weighted;
    bool accepted = false;
    while (lambda <= kLambdaMax) {
      Eigen::MatrixXd H = JtJ;
      H.diagonal().array() += lambda;
      const Eigen::VectorXd step = H.ldlt().solve(Jte);
      JointVector trial = res.q;
      for (Eigen::Index c = 0; c < n; ++c) trial[static_cast<std::size_t>(active[static_cast<std::size_t>(c)])] += step[c];
      trial.clamp(model);
      const PoseError trial_err = pose_error(model, req, trial);
      if (trial_err.weighted.norm() < err.weighted.norm()) {
        res.q = trial;
        err = trial_err;
        lambda = std::max(lambda * 0.1, kLambdaMin);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted)
      throw NoConvergence("fixed-scapula IK stalled (damping saturated)", err.weighted.norm());
    ++res.iterations;
    res.error_history.push_back(err.weighted.norm());
  }
  res.position_error = err.pos;
  res.orientation_error = err.rot;
  return res;
}

JointVector apply_rhythm(const RobotModel& model, Side side, const JointVector& q, const RhythmParams& params,
                         std::vector<double>* unclamped, std::vector<bool>* clamped) {
  params.validate();
  const ArmLayout& arm = model.arm(side);
  JointVector out = q;
  if (unclamped) unclamped->clear();
  if (clamped) clamped->clear();
  for (std::size_t k = 0; k < 2; ++k) {
    const auto sj = static_cast<std::size_t>(arm.scapula[k]);
    const double raw = params.A * q[static_cast<std::size_t>(arm.glenohumeral[k])];
    const double lim = std::clamp(raw, model.joints[sj].min, model.joints[sj].max);
    out[sj] = lim;
    if (unclamped) unclamped->push_back(raw);
    if (clamped) clamped->push_back(lim != raw);
  }
  return out;
}

RhythmIkResult scapulohumeral_ik(const RobotModel& model, const IkRequest& req, const RhythmParams& params) {
  params.validate();
  RhythmIkResult out;
  try {
    out.pass1 = ik_fixed_scapula(model, req);
  } catch (const NoConvergence& e) {
    throw NoConvergence(std::string("rhythm IK pass 1: ") + e.what(), e.final_error(), 1);
  }
  out.first_pass = out.pass1.q;

  IkRequest second = req;
  second.q_init = apply_rhythm(model, req.hand, out.first_pass, params, &out.scapula_unclamped, &out.scapula_clamped);
  try {
    out.pass2 = ik_fixed_scapula(model, second);
  } catch (const NoConvergence& e) {
    throw NoConvergence(std::string("rhythm IK pass 2: ") + e.what(), e.final_error(), 2);
  }
  out.q = out.pass2.q;
  return out;
}

}  // namespace shoulder
