#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shoulder/muscle_geometry.hpp"
#include "shoulder/robot_model.hpp"

namespace shoulder {

struct JmmConfig {
  int hidden = 100;
  double lr = 1e-3;        ///< Adam step size (peak)
  double lr_final = 0.05;  ///< pre-training decays the step size to lr * lr_final (cosine)
  int batch = 64;
  int epochs = 200;
  double tension_scale = 50.0;  ///< N; tension inputs are divided by this
  double length_jitter = 1e-3;  ///< m; Gaussian noise added to pre-training length inputs
  std::size_t geometric_samples = 10000;
  double validation_fraction = 0.1;
};

/// Per-feature affine normalization: (x - mean) / scale.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

/// Adam moment estimates for one parameter block set.
struct AdamState {
  Eigen::MatrixXd mW1, vW1, mW2, vW2;
  Eigen::VectorXd mb1, vb1, mb2, vb2;
  long step = 0;
};

/**
 * One-hidden-layer tanh network for a single group:
 *   q = out_mean + out_scale * (W2 tanh(W1 x + b1) + b2),  x = normalized [l; t].
 */
class GroupNetwork {
public:
  std::string name;
  int muscles = 0;
  int joints = 0;
  Eigen::MatrixXd W1;  ///< H x 2M
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;  ///< N x H
  Eigen::VectorXd b2;
  Normalization input;
  Normalization output;
  Eigen::VectorXd lower;  ///< joint limits, rad
  Eigen::VectorXd upper;
  AdamState adam;

  int hidden() const { return static_cast<int>(W1.rows()); }

  /// Unclamped network output (rad).
  Eigen::VectorXd forward(const Eigen::VectorXd& lengths, const Eigen::VectorXd& tensions) const;
  /// Column-wise forward for a 2M x B batch of raw inputs.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& raw_inputs) const;
  /// dq/dl (N x M, rad/m) at the given input.
  Eigen::MatrixXd length_jacobian(const Eigen::VectorXd& lengths, const Eigen::VectorXd& tensions) const;

  bool all_finite() const;
  bool same_weights(const GroupNetwork& other) const;
};

/// Joint-muscle mapping for every group of a model.
class JointMuscleMap {
public:
  /// Seeded initialization; length-input weights random, tension-input weights zero.
  static JointMuscleMap create(const RobotModel& model, const JmmConfig& cfg, std::uint64_t seed);

  std::string layout_hash;
  JmmConfig config;
  std::vector<GroupNetwork> groups;

  GroupNetwork& group(int g);
  const GroupNetwork& group(int g) const;
};

struct Prediction {
  Eigen::VectorXd q;  ///< clamped to joint limits, rad
  bool clamped = false;
};

/// Group-local prediction. Throws DimensionMismatch or UnknownGroup.
Prediction jmm_predict(const JointMuscleMap& map, int group, const Eigen::VectorXd& lengths,
                       const Eigen::VectorXd& tensions);

struct TrainingReport {
  std::vector<double> epoch_rms_deg;  ///< training RMS after each epoch
  double validation_rms_deg = 0.0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

/**
 * Fits one group's network to a dataset, holding out the trailing
 * validation_fraction of samples (none when the dataset has a single sample).
 * Sets the input/output normalization from the training split and resets the
 * optimizer state. Throws NonFinite{epoch} on divergence.
 */
TrainingReport jmm_pretrain(JointMuscleMap& map, int group, const std::vector<JmmSample>& dataset, int epochs,
                            double lr, std::uint64_t seed);

/// RMS (deg) of unclamped predictions over a sample set.
double jmm_rms_deg(const JointMuscleMap& map, int group, const std::vector<JmmSample>& samples);

/// Teacher sample for one group, stamped with its acquisition time.
struct TeacherSample {
  JmmSample data;
  double timestamp = 0.0;  ///< s
};

/// FIFO teacher store for one group plus the retained geometric samples mixed into updates.
class ReplayBuffer {
public:
  ReplayBuffer(std::size_t capacity, double mix_ratio, std::vector<JmmSample> geometric);

  void push(const TeacherSample& s);
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  double mix_ratio() const { return mix_ratio_; }
  const std::deque<TeacherSample>& samples() const { return samples_; }
  const std::vector<JmmSample>& geometric() const { return geometric_; }

private:
  std::size_t capacity_;
  double mix_ratio_;
  std::deque<TeacherSample> samples_;
  std::vector<JmmSample> geometric_;
};

struct UpdateReport {
  std::size_t new_samples = 0;
  int steps = 0;
  double loss_new_before = 0.0;  ///< mean squared error on the new samples, rad^2
  double loss_new_after = 0.0;
  double loss_mix_before = 0.0;  ///< buffer/geometric mixed validation loss
  double loss_mix_after = 0.0;
  bool rolled_back = false;
  std::string reason;
};

/**
 * Appends validated teacher samples to the buffer (oldest evicted), then runs
 * `steps` Adam mini-batch steps on a mix of buffer and geometric samples.
 * The update is rolled back when the loss on the new samples rises, or when
 * the mixed validation loss grows by more than 20%. Non-finite weights roll
 * back and throw NonFinite.
 */
UpdateReport jmm_update_online(JointMuscleMap& map, int group, ReplayBuffer& buffer,
                               const std::vector<TeacherSample>& new_samples, int steps, std::mt19937_64& rng);

struct InvertOptions {
  double regularization = 1e-3;  ///< weight pulling the solution toward l_init
  double tolerance_deg = 0.5;    ///< per-joint acceptance bound
  double target_deg = 1e-3;      ///< early exit once every joint is this close
  int max_iters = 50;
};

struct InversionResult {
  Eigen::VectorXd lengths;
  double residual_deg = 0.0;  ///< max per-joint |predict - target|
  int iterations = 0;
};

/**
 * Muscle-length command realizing `q_target` under the mapping, by
 * regularized Gauss-Newton on the network's length Jacobian from `l_init`.
 * Targets outside the joint limits are rejected with InvalidArgument;
 * NoConvergence carries the residual in degrees.
 */
InversionResult jmm_invert(const JointMuscleMap& map, int group, const Eigen::VectorXd& q_target,
                           const Eigen::VectorXd& tensions, const Eigen::VectorXd& l_init,
                           const InvertOptions& opts = {});

}  // namespace shoulder
