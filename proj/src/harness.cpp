#include "shoulder/harness.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "shoulder/angles.hpp"
#include "shoulder/csv.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"

namespace shoulder {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

JmmSample group_sample(const Group& g, const MuscleState& measured, const JointVector& q) {
  JmmSample s;
  s.lengths = gather(measured.lengths, g.muscles);
  s.tensions = gather(measured.tensions, g.muscles);
  s.q = gather(q.values(), g.joints);
  return s;
}

/// Command-side seed: the previous arm solution with the scapula returned to neutral.
JointVector ik_seed(const RobotModel& model, Side side, const JointVector& previous) {
  JointVector seed = previous;
  for (int j : model.arm(side).scapula) seed[static_cast<std::size_t>(j)] = 0.0;
  return seed;
}

constexpr double kSlackFloor = 0.5;  // fraction of the tension target
constexpr double kSlackWeight = 4.0;

/// Length change that pulls tensions toward `target` without moving the mapped posture:
/// the tension error scaled by `gain`, projected onto the null space of dq/dl.
/// Tensions below the floor are weighted up.
Eigen::VectorXd cocontraction_step(const GroupNetwork& net, const Eigen::VectorXd& lengths,
                                   const Eigen::VectorXd& tensions, double target, double gain) {
  if (gain == 0.0) return Eigen::VectorXd::Zero(lengths.size());
  const Eigen::MatrixXd J = net.length_jacobian(lengths, tensions);
  const Eigen::ArrayXd deficit = (kSlackFloor * target - tensions.array()).max(0.0);
  const Eigen::VectorXd raw = gain * (tensions.array() - target - kSlackWeight * deficit).matrix();
  const Eigen::MatrixXd JJt = J * J.transpose();
  return raw - J.transpose() * JJt.ldlt().solve(J * raw);
}

}  // namespace

std::vector<double> RunReport::learning_window_errors(double window) const {
  if (!(window > 0.0)) throw InvalidArgument("window must be positive");
  std::vector<double> sums, counts;
  for (const auto& s : steps) {
    if (s.phase != Phase::Learning) continue;
    // Window k covers (k * window, (k + 1) * window].
    const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(s.time / window - 1e-9) - 1.0));
    if (k >= sums.size()) sums.resize(k + 1, 0.0), counts.resize(k + 1, 0.0);
    sums[k] += 0.5 * (s.target_error[0] + s.target_error[1]);
    counts[k] += 1.0;
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < sums.size(); ++k)
    if (counts[k] > 0.0) out.push_back(sums[k] / counts[k]);
  return out;
}

std::vector<std::vector<JmmSample>> geometric_datasets(const RobotModel& model, const JmmConfig& cfg, std::uint64_t seed) {
  std::vector<std::vector<JmmSample>> out;
  for (std::size_t g = 0; g < model.groups.size(); ++g)
    out.push_back(geometric_jmm_dataset(model, static_cast<int>(g), cfg.geometric_samples, seed + 101 * (g + 1)));
  return out;
}

PretrainedMap pretrain_map(const RobotModel& model, const JmmConfig& cfg, std::uint64_t seed) {
  PretrainedMap out{JointMuscleMap::create(model, cfg, seed), geometric_datasets(model, cfg, seed), {}};
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    TrainingReport rep = jmm_pretrain(out.map, static_cast<int>(g), out.datasets[g], cfg.epochs, cfg.lr, seed + g);
    out.validation_rms_deg.push_back(rep.validation_rms_deg);
  }
  return out;
}

RunReport run_steering_experiment(const ExperimentConfig& cfg, bool learning,
                                  const std::optional<std::filesystem::path>& out_dir) {
  const RobotModel model = config_model(cfg);
  return run_steering_experiment(cfg, learning, pretrain_map(model, cfg.jmm, cfg.seed), out_dir);
}

RunReport run_steering_experiment(const ExperimentConfig& cfg, bool learning, const PretrainedMap& pretrained,
                                  const std::optional<std::filesystem::path>& out_dir) {
  cfg.validate();
  const RobotModel model = config_model(cfg);
  if (pretrained.map.layout_hash != model.layout_hash())
    throw LayoutMismatch("pre-trained map does not match the experiment model");
  const WheelSpec& wheel = cfg.wheel;
  const auto n_groups = model.groups.size();

  JointMuscleMap map = pretrained.map;
  std::vector<ReplayBuffer> buffers;
  for (std::size_t g = 0; g < n_groups; ++g)
    buffers.emplace_back(cfg.learning.buffer_capacity, cfg.learning.mix_ratio, pretrained.datasets.at(g));
  std::vector<std::vector<TeacherSample>> pending(n_groups);
  std::mt19937_64 update_rng(splitmix(cfg.seed ^ 0x5eedULL));

  Plant plant = plant_build(model, cfg.plant);
  const JointVector hold = hold_posture(model, cfg);
  initialize_posture(plant, cfg.tension_target, hold);

  std::optional<CsvWriter> run_log, state_log, update_log;
  std::optional<TeacherLog> teacher_log;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    run_log.emplace(*out_dir / "run.csv");
    run_log->header({"time", "phase", "target_deg", "wheel_deg", "grip_error_left", "grip_error_right",
                     "target_error_left", "target_error_right", "grip_left", "grip_right", "loss_events"});
    state_log.emplace(*out_dir / "state.csv");
    std::vector<std::string> cols{"time"};
    for (const auto& j : model.joints) cols.push_back("q_" + j.name);
    for (const auto& m : model.muscles) cols.push_back("lcmd_" + m.name);
    for (const auto& m : model.muscles) cols.push_back("tension_" + m.name);
    cols.push_back("wheel_angle");
    state_log->header(cols);
    update_log.emplace(*out_dir / "updates.csv");
    update_log->header({"time", "group", "new_samples", "loss_new_before", "loss_new_after", "loss_mix_before",
                        "loss_mix_after", "rolled_back"});
    teacher_log.emplace(*out_dir / "teacher.csv", model);
  }

  const double learn_end = learning ? cfg.learning.phase_duration : 0.0;
  const double eval_start = learn_end + cfg.approach_duration;
  const double eval_end = eval_start + wheel.sequence_duration();
  const double seq_period = std::max(wheel.sequence_duration(), cfg.dt);
  const auto n_ticks = static_cast<long>(std::llround(eval_end / cfg.dt));

  RunReport rep;
  rep.evaluation_start = eval_start;
  rep.evaluation_end = eval_end;

  JointVector q_cmd = hold;
  Eigen::VectorXd l_cmd = plant.state().l_cmd;
  Eigen::VectorXd t_last = plant.state().measured.tensions;

  WheelState wheel_state;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  const double max_change = cfg.max_command_rate * cfg.dt;
  for (long tick = 1; tick <= n_ticks; ++tick) {
    const double time = static_cast<double>(tick) * cfg.dt;
    StepRecord rec;
    rec.time = time;
    rec.phase = time <= learn_end + 1e-12 && learning ? Phase::Learning
                : time <= eval_start + 1e-12        ? Phase::Approach
                                                    : Phase::Evaluation;
    double target = 0.0;
    if (rec.phase == Phase::Learning) target = schedule_angle(wheel, std::fmod(time, seq_period));
    if (rec.phase == Phase::Evaluation) target = schedule_angle(wheel, time - eval_start);
    rec.target_deg = rad2deg(target);
    const auto [target_left, target_right] = grip_targets(wheel, target);

    // Posture generation with rhythm IK on the nominal model.
    std::array<JointVector, 2> seeds{ik_seed(model, Side::Left, q_cmd), ik_seed(model, Side::Right, q_cmd)};
    JointVector q_next = q_cmd;
    for (Side side : kSides) {
      IkRequest req;
      req.target = side == Side::Left ? target_left : target_right;
      req.hand = side;
      req.q_init = seeds[side_index(side)];
      try {
        const JointVector sol = scapulohumeral_ik(model, req, cfg.rhythm).q;
        for (int j : model.arm(side).all_joints()) q_next[static_cast<std::size_t>(j)] = sol[static_cast<std::size_t>(j)];
      } catch (const NoConvergence&) {
        ++rep.ik_failures;
      }
    }
    q_cmd = q_next;

    // Joint targets to muscle lengths through the learned map.
    Eigen::VectorXd l_next = l_cmd;
    for (std::size_t g = 0; g < n_groups; ++g) {
      const Group& grp = model.groups[g];
      const Eigen::VectorXd t_g = gather(t_last, grp.muscles);
      const Eigen::VectorXd l_g = gather(l_cmd, grp.muscles);
      const Eigen::VectorXd l_start =
          l_g + cocontraction_step(map.group(static_cast<int>(g)), l_g, t_g, cfg.tension_target, cfg.cocontraction_gain);
      try {
        InversionResult inv = jmm_invert(map, static_cast<int>(g), gather(q_cmd.values(), grp.joints), t_g, l_start);
        Eigen::VectorXd change = inv.lengths - l_g;
        const double largest = change.cwiseAbs().maxCoeff();
        if (largest > max_change) change *= max_change / largest;
        scatter(l_g + change, grp.muscles, l_next);
      } catch (const NoConvergence&) {
        ++rep.inversion_failures;
      }
    }
    l_cmd = l_next;

    PlantState st;
    try {
      st = plant_step(plant, l_cmd, cfg.dt);
    } catch (const NonFinite& e) {
      rep.aborted = true;
      rep.abort_reason = e.what();
      break;
    }
    t_last = st.measured.tensions;

    // Teacher data from object-relative hand estimates.
    const auto obs = observe_markers(plant, wheel.center_pose_body, cfg.noise, splitmix(cfg.seed ^ static_cast<std::uint64_t>(tick)));
    JointVector q_est = q_cmd;
    bool all_ok = true;
    for (Side side : kSides) {
      try {
        const Pose hand = hand_pose_from_object(find_marker(obs, kMarkerWheelCenter), find_marker(obs, hand_marker(side)),
                                                wheel.center_pose_body);
        const JointVector est = estimate_joint_angles(model, hand, side, seeds[side_index(side)], cfg.rhythm);
        const ArmLayout& arm = model.arm(side);
        for (int j : arm.all_joints()) q_est[static_cast<std::size_t>(j)] = est[static_cast<std::size_t>(j)];
        for (int g : {arm.scapula_group, arm.arm_group})
          pending[static_cast<std::size_t>(g)].push_back({group_sample(model.groups[static_cast<std::size_t>(g)], st.measured, est), time});
      } catch (const MarkerNotVisible&) {
        all_ok = false;
        ++rep.estimation_failures;
      } catch (const NoConvergence&) {
        all_ok = false;
        ++rep.estimation_failures;
      }
    }
    if (teacher_log) teacher_log->append(time, all_ok, st.measured, q_est);

    const bool updating = learning && (rec.phase != Phase::Evaluation || cfg.learning.update_during_evaluation);
    if (tick % cfg.learning.update_every == 0) {
      for (std::size_t g = 0; g < n_groups; ++g) {
        if (updating && !pending[g].empty()) {
          UpdateReport u = jmm_update_online(map, static_cast<int>(g), buffers[g], pending[g], cfg.learning.online_steps,
                                             update_rng);
          ++rep.learning_rounds;
          rep.teacher_samples_used += u.new_samples;
          if (u.rolled_back) ++rep.rollbacks;
          if (update_log)
            update_log->row({time, static_cast<double>(g), static_cast<double>(u.new_samples), u.loss_new_before,
                             u.loss_new_after, u.loss_mix_before, u.loss_mix_after, u.rolled_back ? 1.0 : 0.0});
        }
        pending[g].clear();
      }
    }

    // Hands on the wheel.
    const Pose hand_l = hand_pose(plant.model(), st.q_true, Side::Left);
    const Pose hand_r = hand_pose(plant.model(), st.q_true, Side::Right);
    rec.target_error = {(hand_l.position() - target_left.position()).norm(),
                        (hand_r.position() - target_right.position()).norm()};
    rec.wheel_deg = nan;
    if (rec.phase == Phase::Evaluation) {
      const GripUpdate gu = wheel_update(wheel, wheel_state, hand_l, hand_r);
      rec.gripping = gu.gripping;
      rec.grip_error = gu.grip_error;
      rec.loss_events = gu.loss_events;
      ++rep.evaluation_ticks;
      if (gu.gripping[0] && gu.gripping[1]) {
        rec.wheel_deg = rad2deg(gu.angle);
        ++rep.gripping_ticks;
        rep.max_tracking_error_deg = std::max(rep.max_tracking_error_deg, std::abs(rec.wheel_deg - rec.target_deg));
      }
      const double rel = time - eval_start;
      rep.grip_loss_events += gu.loss_events;
      if (rel <= 0.2 * (eval_end - eval_start) + 1e-12) rep.grip_loss_first_fraction += gu.loss_events;
      if (rel > eval_end - eval_start - cfg.final_segment_duration + 1e-12) rep.grip_loss_final_segment += gu.loss_events;
    } else {
      rec.grip_error = {nan, nan};
    }
    rep.steps.push_back(rec);

    if (run_log)
      run_log->row({time, static_cast<double>(static_cast<int>(rec.phase)), rec.target_deg, rec.wheel_deg,
                    rec.grip_error[0], rec.grip_error[1], rec.target_error[0], rec.target_error[1],
                    rec.gripping[0] ? 1.0 : 0.0, rec.gripping[1] ? 1.0 : 0.0, static_cast<double>(rec.loss_events)});
    if (state_log) {
      std::vector<double> row{time};
      for (std::size_t j = 0; j < model.dof(); ++j) row.push_back(rad2deg(st.q_true[j]));
      for (Eigen::Index i = 0; i < st.l_cmd.size(); ++i) row.push_back(st.l_cmd[i]);
      for (Eigen::Index i = 0; i < st.measured.tensions.size(); ++i) row.push_back(st.measured.tensions[i]);
      row.push_back(rec.phase == Phase::Evaluation ? rad2deg(wheel_state.angle) : nan);
      state_log->row(row);
    }
  }

  if (out_dir) {
    nlohmann::json s;
    s["learning"] = learning;
    s["evaluation_start"] = rep.evaluation_start;
    s["evaluation_end"] = rep.evaluation_end;
    s["max_tracking_error_deg"] = rep.max_tracking_error_deg;
    s["grip_loss_events"] = rep.grip_loss_events;
    s["grip_loss_first_20_percent"] = rep.grip_loss_first_fraction;
    s["grip_loss_final_segment"] = rep.grip_loss_final_segment;
    s["gripping_ticks"] = rep.gripping_ticks;
    s["evaluation_ticks"] = rep.evaluation_ticks;
    s["teacher_samples_used"] = rep.teacher_samples_used;
    s["learning_rounds"] = rep.learning_rounds;
    s["rollbacks"] = rep.rollbacks;
    s["ik_failures"] = rep.ik_failures;
    s["inversion_failures"] = rep.inversion_failures;
    s["estimation_failures"] = rep.estimation_failures;
    s["aborted"] = rep.aborted;
    s["abort_reason"] = rep.abort_reason;
    std::ofstream(*out_dir / "summary.json") << s.dump(2) << "\n";
  }
  return rep;
}

void write_report(const std::filesystem::path& in_dir, const std::optional<std::filesystem::path>& out_dir) {
  const CsvTable run = read_csv(in_dir / "run.csv");
  const std::filesystem::path dst = out_dir.value_or(in_dir);
  std::filesystem::create_directories(dst);
  const std::size_t c_time = run.column("time"), c_phase = run.column("phase"), c_target = run.column("target_deg"),
                    c_wheel = run.column("wheel_deg"), c_el = run.column("grip_error_left"),
                    c_er = run.column("grip_error_right"), c_tl = run.column("target_error_left"),
                    c_tr = run.column("target_error_right"), c_gl = run.column("grip_left"),
                    c_gr = run.column("grip_right");
  CsvWriter wheel(dst / "wheel_angle.csv");
  wheel.header({"time", "phase", "target_deg", "wheel_deg", "error_deg"});
  CsvWriter grip(dst / "grip_error.csv");
  grip.header({"time", "phase", "left_mm", "right_mm", "grip_left", "grip_right"});
  for (const auto& r : run.rows) {
    const bool eval = static_cast<int>(r[c_phase]) == static_cast<int>(Phase::Evaluation);
    wheel.row({r[c_time], r[c_phase], r[c_target], r[c_wheel], r[c_wheel] - r[c_target]});
    grip.row({r[c_time], r[c_phase], 1e3 * (eval ? r[c_el] : r[c_tl]), 1e3 * (eval ? r[c_er] : r[c_tr]), r[c_gl], r[c_gr]});
  }
}

}  // namespace shoulder
