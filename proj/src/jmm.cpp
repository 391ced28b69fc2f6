#include "shoulder/jmm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"

namespace shoulder {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void reset_adam(GroupNetwork& net) {
  AdamState& a = net.adam;
  a.mW1 = a.vW1 = Eigen::MatrixXd::Zero(net.W1.rows(), net.W1.cols());
  a.mW2 = a.vW2 = Eigen::MatrixXd::Zero(net.W2.rows(), net.W2.cols());
  a.mb1 = a.vb1 = Eigen::VectorXd::Zero(net.b1.size());
  a.mb2 = a.vb2 = Eigen::VectorXd::Zero(net.b2.size());
  a.step = 0;
}

void init_weights(GroupNetwork& net, int hidden, std::uint64_t seed) {
  const int in = 2 * net.muscles;
  std::mt19937_64 rng(seed);
  const double a1 = std::sqrt(6.0 / (net.muscles + hidden));
  const double a2 = std::sqrt(6.0 / (hidden + net.joints));
  std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);
  net.W1 = Eigen::MatrixXd::Zero(hidden, in);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < net.muscles; ++c) net.W1(r, c) = u1(rng);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.W2.resize(net.joints, hidden);
  for (int r = 0; r < net.joints; ++r)
    for (int c = 0; c < hidden; ++c) net.W2(r, c) = u2(rng);
  net.b2 = Eigen::VectorXd::Zero(net.joints);
  reset_adam(net);
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x(a.size() + b.size());
  x << a, b;
  return x;
}

void check_dims(const GroupNetwork& net, const Eigen::VectorXd& lengths, const Eigen::VectorXd& tensions) {
  if (lengths.size() != net.muscles || tensions.size() != net.muscles)
    throw DimensionMismatch("group '" + net.name + "' expects " + std::to_string(net.muscles) + " lengths and tensions");
}

void check_sample(const GroupNetwork& net, const JmmSample& s) {
  check_dims(net, s.lengths, s.tensions);
  if (s.q.size() != net.joints) throw DimensionMismatch("group '" + net.name + "' sample has wrong joint count");
  if (!s.lengths.allFinite() || !s.tensions.allFinite() || !s.q.allFinite())
    throw InvalidArgument("group '" + net.name + "' sample is not finite");
}

template <typename Samples, typename Get>
void pack(const GroupNetwork& net, const Samples& samples, const std::vector<std::size_t>& idx, Get get,
          Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
  const auto B = static_cast<Eigen::Index>(idx.size());
  X.resize(2 * net.muscles, B);
  Y.resize(net.joints, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const JmmSample& s = get(samples[idx[static_cast<std::size_t>(b)]]);
    X.col(b) << s.lengths, s.tensions;
    Y.col(b) = s.q;
  }
}

const JmmSample& as_sample(const JmmSample& s) { return s; }
const JmmSample& as_sample(const TeacherSample& s) { return s.data; }

/// One Adam step on a raw batch; returns the batch loss (normalized units).
double train_step(GroupNetwork& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lr) {
  const auto B = static_cast<double>(X.cols());
  const Eigen::MatrixXd Xn =
      ((X.colwise() - net.input.mean).array().colwise() / net.input.scale.array()).matrix();
  const Eigen::MatrixXd Yn =
      ((Y.colwise() - net.output.mean).array().colwise() / net.output.scale.array()).matrix();
  const Eigen::MatrixXd H = ((net.W1 * Xn).colwise() + net.b1).array().tanh().matrix();
  const Eigen::MatrixXd O = (net.W2 * H).colwise() + net.b2;
  const Eigen::MatrixXd dO = (O - Yn) / B;
  const double loss = 0.5 * (O - Yn).squaredNorm() / B;

  const Eigen::MatrixXd gW2 = dO * H.transpose();
  const Eigen::VectorXd gb2 = dO.rowwise().sum();
  const Eigen::MatrixXd dH = ((net.W2.transpose() * dO).array() * (1.0 - H.array().square())).matrix();
  const Eigen::MatrixXd gW1 = dH * Xn.transpose();
  const Eigen::VectorXd gb1 = dH.rowwise().sum();

  AdamState& a = net.adam;
  ++a.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(a.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(a.step));
  auto adam = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
  };
  adam(net.W1, a.mW1, a.vW1, gW1);
  adam(net.b1, a.mb1, a.vb1, gb1);
  adam(net.W2, a.mW2, a.vW2, gW2);
  adam(net.b2, a.mb2, a.vb2, gb2);
  return loss;
}

template <typename Samples>
double mse_rad2(const GroupNetwork& net, const Samples& samples) {
  if (samples.empty()) return 0.0;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::MatrixXd X, Y;
  pack(net, samples, idx, [](const auto& s) -> const JmmSample& { return as_sample(s); }, X, Y);
  return (net.forward_batch(X) - Y).squaredNorm() / static_cast<double>(Y.size());
}

int checked_group(const JointMuscleMap& map, int group) {
  if (group < 0 || group >= static_cast<int>(map.groups.size())) throw UnknownGroup(std::to_string(group));
  return group;
}

}  // namespace

Eigen::VectorXd GroupNetwork::forward(const Eigen::VectorXd& lengths, const Eigen::VectorXd& tensions) const {
  check_dims(*this, lengths, tensions);
  const Eigen::VectorXd x = (concat(lengths, tensions) - input.mean).cwiseQuotient(input.scale);
  const Eigen::VectorXd h = (W1 * x + b1).array().tanh().matrix();
  return output.mean + output.scale.cwiseProduct(W2 * h + b2);
}

Eigen::MatrixXd GroupNetwork::forward_batch(const Eigen::MatrixXd& raw) const {
  const Eigen::MatrixXd Xn = ((raw.colwise() - input.mean).array().colwise() / input.scale.array()).matrix();
  const Eigen::MatrixXd H = ((W1 * Xn).colwise() + b1).array().tanh().matrix();
  const Eigen::MatrixXd O = (W2 * H).colwise() + b2;
  return ((O.array().colwise() * output.scale.array()).colwise() + output.mean.array()).matrix();
}

Eigen::MatrixXd GroupNetwork::length_jacobian(const Eigen::VectorXd& lengths, const Eigen::VectorXd& tensions) const {
  check_dims(*this, lengths, tensions);
  const Eigen::VectorXd x = (concat(lengths, tensions) - input.mean).cwiseQuotient(input.scale);
  const Eigen::VectorXd h = (W1 * x + b1).array().tanh().matrix();
  const Eigen::VectorXd dh = (1.0 - h.array().square()).matrix();
  const Eigen::MatrixXd W1l = W1.leftCols(muscles) * input.scale.head(muscles).cwiseInverse().asDiagonal();
  return output.scale.asDiagonal() * W2 * dh.asDiagonal() * W1l;
}

bool GroupNetwork::all_finite() const {
  return W1.allFinite() && b1.allFinite() && W2.allFinite() && b2.allFinite();
}

bool GroupNetwork::same_weights(const GroupNetwork& o) const {
  return W1 == o.W1 && b1 == o.b1 && W2 == o.W2 && b2 == o.b2 && input.mean == o.input.mean &&
         input.scale == o.input.scale && output.mean == o.output.mean && output.scale == o.output.scale;
}

JointMuscleMap JointMuscleMap::create(const RobotModel& model, const JmmConfig& cfg, std::uint64_t seed) {
  if (cfg.hidden < 1 || cfg.batch < 1 || !(cfg.lr > 0.0) || !(cfg.tension_scale > 0.0) || !(cfg.length_jitter >= 0.0))
    throw InvalidArgument("invalid joint-muscle mapping configuration");
  JointMuscleMap map;
  map.layout_hash = model.layout_hash();
  map.config = cfg;
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    const Group& grp = model.groups[g];
    GroupNetwork net;
    net.name = grp.name;
    net.muscles = static_cast<int>(grp.muscles.size());
    net.joints = static_cast<int>(grp.joints.size());
    init_weights(net, cfg.hidden, seed + 7919 * g);
    net.input.mean = Eigen::VectorXd::Zero(2 * net.muscles);
    net.input.scale = Eigen::VectorXd::Ones(2 * net.muscles);
    net.input.scale.tail(net.muscles).setConstant(cfg.tension_scale);
    net.output.mean = Eigen::VectorXd::Zero(net.joints);
    net.output.scale = Eigen::VectorXd::Ones(net.joints);
    net.lower.resize(net.joints);
    net.upper.resize(net.joints);
    for (int j = 0; j < net.joints; ++j) {
      net.lower[j] = model.joints[static_cast<std::size_t>(grp.joints[static_cast<std::size_t>(j)])].min;
      net.upper[j] = model.joints[static_cast<std::size_t>(grp.joints[static_cast<std::size_t>(j)])].max;
    }
    map.groups.push_back(std::move(net));
  }
  return map;
}

GroupNetwork& JointMuscleMap::group(int g) { return groups[static_cast<std::size_t>(checked_group(*this, g))]; }
const GroupNetwork& JointMuscleMap::group(int g) const {
  return groups[static_cast<std::size_t>(checked_group(*this, g))];
}

Prediction jmm_predict(const JointMuscleMap& map, int group, const Eigen::VectorXd& lengths,
                       const Eigen::VectorXd& tensions) {
  const GroupNetwork& net = map.group(group);
  Prediction p;
  const Eigen::VectorXd raw = net.forward(lengths, tensions);
  p.q = raw.cwiseMax(net.lower).cwiseMin(net.upper);
  p.clamped = p.q != raw;
  return p;
}

double jmm_rms_deg(const JointMuscleMap& map, int group, const std::vector<JmmSample>& samples) {
  return rad2deg(std::sqrt(mse_rad2(map.group(group), samples)));
}

TrainingReport jmm_pretrain(JointMuscleMap& map, int group, const std::vector<JmmSample>& dataset, int epochs,
                            double lr, std::uint64_t seed) {
  GroupNetwork& net = map.group(group);
  if (dataset.empty()) throw InvalidArgument("pre-training dataset is empty");
  if (epochs < 1 || !(lr > 0.0)) throw InvalidArgument("epochs and learning rate must be positive");
  for (const JmmSample& s : dataset) check_sample(net, s);

  std::size_t n_val = 0;
  if (dataset.size() > 1)
    n_val = std::max<std::size_t>(1, static_cast<std::size_t>(map.config.validation_fraction * dataset.size()));
  const std::vector<JmmSample> train(dataset.begin(), dataset.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<JmmSample> val(dataset.end() - static_cast<std::ptrdiff_t>(n_val), dataset.end());

  // Normalization from the training split; tension inputs keep a fixed scale.
  const auto M = net.muscles;
  Eigen::MatrixXd L(M, static_cast<Eigen::Index>(train.size()));
  Eigen::MatrixXd Q(net.joints, static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    L.col(static_cast<Eigen::Index>(i)) = train[i].lengths;
    Q.col(static_cast<Eigen::Index>(i)) = train[i].q;
  }
  auto stats = [](const Eigen::MatrixXd& A, Eigen::VectorXd& mean, Eigen::VectorXd& scale) {
    mean = A.rowwise().mean();
    scale = ((A.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
    for (Eigen::Index i = 0; i < scale.size(); ++i)
      if (!(scale[i] > 1e-6)) scale[i] = 1.0;
  };
  Eigen::VectorXd lm, ls;
  stats(L, lm, ls);
  net.input.mean = Eigen::VectorXd::Zero(2 * M);
  net.input.scale = Eigen::VectorXd::Constant(2 * M, map.config.tension_scale);
  net.input.mean.head(M) = lm;
  net.input.scale.head(M) = ls;
  stats(Q, net.output.mean, net.output.scale);

  init_weights(net, map.config.hidden, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainingReport report;
  report.train_size = train.size();
  report.validation_size = val.size();
  const auto batch = static_cast<std::size_t>(map.config.batch);
  const double jitter = map.config.length_jitter;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X, Y;
  for (int e = 0; e < epochs; ++e) {
    const double progress = static_cast<double>(e) / epochs;
    const double f = map.config.lr_final;
    const double lr_e = lr * (f + (1.0 - f) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(start + batch, order.size())));
      pack(net, train, idx, [](const JmmSample& s) -> const JmmSample& { return s; }, X, Y);
      // Jittered lengths make the off-manifold response a least-squares projection.
      if (jitter > 0.0)
        X.topRows(M) += Eigen::MatrixXd::NullaryExpr(M, X.cols(), [&] { return jitter * gauss(rng); });
      train_step(net, X, Y, lr_e);
    }
    if (!net.all_finite()) throw NonFinite("pre-training diverged", e);
    report.epoch_rms_deg.push_back(rad2deg(std::sqrt(mse_rad2(net, train))));
  }
  report.validation_rms_deg = val.empty() ? report.epoch_rms_deg.back() : rad2deg(std::sqrt(mse_rad2(net, val)));
  reset_adam(net);
  return report;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, double mix_ratio, std::vector<JmmSample> geometric)
    : capacity_(capacity), mix_ratio_(mix_ratio), geometric_(std::move(geometric)) {
  if (capacity_ == 0) throw InvalidArgument("replay capacity must be positive");
  if (!(mix_ratio_ >= 0.0 && mix_ratio_ <= 1.0)) throw InvalidArgument("mix ratio must lie in [0, 1]");
  if (mix_ratio_ > 0.0 && geometric_.empty()) throw InvalidArgument("mix ratio > 0 needs geometric samples");
}

void ReplayBuffer::push(const TeacherSample& s) {
  if (samples_.size() == capacity_) samples_.pop_front();
  samples_.push_back(s);
}

UpdateReport jmm_update_online(JointMuscleMap& map, int group, ReplayBuffer& buffer,
                               const std::vector<TeacherSample>& new_samples, int steps, std::mt19937_64& rng) {
  GroupNetwork& net = map.group(group);
  UpdateReport rep;
  rep.new_samples = new_samples.size();
  if (new_samples.empty()) return rep;
  if (steps < 0) throw InvalidArgument("update steps must be non-negative");
  for (const TeacherSample& s : new_samples) {
    check_sample(net, s.data);
    if ((s.data.q.array() < net.lower.array() - 1e-9).any() || (s.data.q.array() > net.upper.array() + 1e-9).any())
      throw InvalidArgument("teacher sample outside joint limits for group '" + net.name + "'");
  }
  for (const TeacherSample& s : new_samples) buffer.push(s);

  const std::size_t n_geo_val = std::min<std::size_t>(buffer.geometric().size(), 256);
  const std::vector<JmmSample> geo_val(buffer.geometric().begin(),
                                       buffer.geometric().begin() + static_cast<std::ptrdiff_t>(n_geo_val));
  const double mix = buffer.mix_ratio();
  auto mix_loss = [&]() {
    return (1.0 - mix) * mse_rad2(net, buffer.samples()) + (geo_val.empty() ? 0.0 : mix * mse_rad2(net, geo_val));
  };
  rep.loss_new_before = mse_rad2(net, new_samples);
  rep.loss_mix_before = mix_loss();

  const GroupNetwork saved = net;
  const auto batch = map.config.batch;
  const int n_geo = buffer.geometric().empty() ? 0 : static_cast<int>(std::lround(batch * mix));
  const int n_buf = batch - n_geo;
  std::uniform_int_distribution<std::size_t> pick_buf(0, buffer.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_geo(0, buffer.geometric().empty() ? 0 : buffer.geometric().size() - 1);
  Eigen::MatrixXd X(2 * net.muscles, batch), Y(net.joints, batch);
  for (int s = 0; s < steps; ++s) {
    for (int b = 0; b < batch; ++b) {
      const JmmSample& smp = b < n_buf ? buffer.samples()[pick_buf(rng)].data : buffer.geometric()[pick_geo(rng)];
      X.col(b) << smp.lengths, smp.tensions;
      Y.col(b) = smp.q;
    }
    train_step(net, X, Y, map.config.lr);
  }
  rep.steps = steps;

  if (!net.all_finite()) {
    net = saved;
    throw NonFinite("online update produced non-finite weights for group '" + saved.name + "'");
  }
  rep.loss_new_after = mse_rad2(net, new_samples);
  rep.loss_mix_after = mix_loss();
  if (rep.loss_new_after > rep.loss_new_before) {
    net = saved;
    rep.rolled_back = true;
    rep.reason = "loss on new samples increased";
  } else if (rep.loss_mix_after > 1.2 * rep.loss_mix_before) {
    net = saved;
    rep.rolled_back = true;
    rep.reason = "mixed validation loss grew by more than 20%";
  }
  return rep;
}

InversionResult jmm_invert(const JointMuscleMap& map, int group, const Eigen::VectorXd& q_target,
                           const Eigen::VectorXd& tensions, const Eigen::VectorXd& l_init, const InvertOptions& opts) {
  const GroupNetwork& net = map.group(group);
  check_dims(net, l_init, tensions);
  if (q_target.size() != net.joints) throw DimensionMismatch("inversion target has wrong joint count");
  if (!q_target.allFinite() || (q_target.array() < net.lower.array() - 1e-9).any() ||
      (q_target.array() > net.upper.array() + 1e-9).any())
    throw InvalidArgument("inversion target outside joint limits for group '" + net.name + "'");

  InversionResult res;
  res.lengths = l_init;
  const double rho = opts.regularization;
  auto objective = [&](const Eigen::VectorXd& l, Eigen::VectorXd& r) {
    r = q_target - net.forward(l, tensions);
    return r.squaredNorm() + rho * (l - l_init).squaredNorm();
  };
  Eigen::VectorXd r;
  double f = objective(res.lengths, r);
  double mu = 0.0;
  const double target = deg2rad(opts.target_deg);
  while (r.cwiseAbs().maxCoeff() > target && res.iterations < opts.max_iters) {
    const Eigen::MatrixXd J = net.length_jacobian(res.lengths, tensions);
    Eigen::MatrixXd H = J.transpose() * J;
    H.diagonal().array() += rho;
    const Eigen::VectorXd g = J.transpose() * r - rho * (res.lengths - l_init);
    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd Hd = H;
      Hd.diagonal().array() += mu;
      const Eigen::VectorXd trial = res.lengths + Hd.ldlt().solve(g);
      Eigen::VectorXd rt;
      const double ft = objective(trial, rt);
      if (ft < f) {
        res.lengths = trial;
        r = rt;
        f = ft;
        mu *= 0.1;
        accepted = true;
        break;
      }
      mu = mu == 0.0 ? 1e-2 : mu * 10.0;
    }
    ++res.iterations;
    if (!accepted) break;
  }
  res.residual_deg = rad2deg(r.cwiseAbs().maxCoeff());
  if (!(res.residual_deg <= opts.tolerance_deg))
    throw NoConvergence("joint-muscle inversion residual " + std::to_string(res.residual_deg) + " deg",
                        res.residual_deg);
  return res;
}

}  // namespace shoulder
