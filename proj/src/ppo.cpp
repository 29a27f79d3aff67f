#include "hpl/ppo.hpp"

#include "hpl/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hpl {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform double in (0, 1], platform-independent (53 mantissa bits).
double unit_draw(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}

// Standard normal via Box-Muller, avoiding stdlib distribution variance.
double normal_draw(std::mt19937_64& rng) {
  const double u1 = unit_draw(rng);
  const double u2 = unit_draw(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Orthogonal(-ish, semi-orthogonal for non-square shapes) matrix scaled
// by gain: QR of a Gaussian draw with the R-diagonal sign fix.
Mat orthogonal_init(int rows, int cols, double gain, std::mt19937_64& rng) {
  const bool wide = rows < cols;
  const int r = wide ? cols : rows;
  const int c = wide ? rows : cols;
  Mat a(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      a(i, j) = normal_draw(rng);
    }
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(r, c);
  const Mat rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j) {
    if (rmat(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Mat out = wide ? Mat(q.transpose()) : q;
  return gain * out;
}

Vec softmax(const Vec& z) {
  const double zmax = z.maxCoeff();
  const Vec p = (z.array() - zmax).exp().matrix();
  return p / p.sum();
}

struct ForwardCache {
  Vec h1, h2, probs;
  double value = 0.0;
};

ForwardCache forward_cached(const PolicyValueNet& net, const Vec& x) {
  ForwardCache f;
  f.h1 = (net.w1 * x + net.b1).array().tanh().matrix();
  f.h2 = (net.w2 * f.h1 + net.b2).array().tanh().matrix();
  f.probs = softmax(net.wp * f.h2 + net.bp);
  f.value = (net.wv * f.h2)(0) + net.bv;
  return f;
}

template <typename Block>
void adam_step_block(Block& theta, const Block& grad, Block& m, Block& v, double lr, double bc1,
                     double bc2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = (kBeta2 * v.array() + (1.0 - kBeta2) * grad.array().square()).matrix();
  theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

void adam_step_scalar(double& theta, double grad, double& m, double& v, double lr, double bc1,
                      double bc2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
  theta -= lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
}

}  // namespace

PolicyValueNet PolicyValueNet::init(int input_dim, int h1, int h2, int n_actions,
                                    std::uint64_t seed) {
  if (input_dim < 1 || h1 < 1 || h2 < 1 || n_actions < 1) {
    throw std::invalid_argument("PolicyValueNet::init: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  PolicyValueNet net;
  net.input_dim = input_dim;
  net.n_actions = n_actions;
  const double root2 = std::sqrt(2.0);
  net.w1 = orthogonal_init(h1, input_dim, root2, rng);
  net.w2 = orthogonal_init(h2, h1, root2, rng);
  net.wp = orthogonal_init(n_actions, h2, 0.01, rng);  // near-uniform policy at start
  net.wv = orthogonal_init(1, h2, 1.0, rng);
  net.b1 = Vec::Zero(h1);
  net.b2 = Vec::Zero(h2);
  net.bp = Vec::Zero(n_actions);
  net.bv = 0.0;
  return net;
}

Forward forward(const PolicyValueNet& net, const Vec& observation) {
  if (observation.size() != net.input_dim) {
    throw std::invalid_argument("forward: observation width mismatch");
  }
  const ForwardCache f = forward_cached(net, observation);
  return Forward{f.probs, f.value};
}

Trajectory::Trajectory(int capacity) : capacity_(capacity) {
  if (capacity < 1) {
    throw std::invalid_argument("Trajectory: capacity must be at least 1");
  }
  ring_.resize(static_cast<std::size_t>(capacity));
}

void Trajectory::push(Transition t) {
  ring_[next_] = std::move(t);
  next_ = (next_ + 1) % static_cast<std::size_t>(capacity_);
  filled_ = std::min(filled_ + 1, static_cast<std::size_t>(capacity_));
}

std::vector<Transition> Trajectory::recent(int n) const {
  n = std::min(n, static_cast<int>(filled_));
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = n; i >= 1; --i) {
    const std::size_t at =
        (next_ + static_cast<std::size_t>(capacity_) - static_cast<std::size_t>(i)) %
        static_cast<std::size_t>(capacity_);
    out.push_back(ring_[at]);
  }
  return out;
}

AdamState AdamState::zeros_like(const PolicyValueNet& net) {
  AdamState a;
  a.mw1 = Mat::Zero(net.w1.rows(), net.w1.cols());
  a.vw1 = a.mw1;
  a.mw2 = Mat::Zero(net.w2.rows(), net.w2.cols());
  a.vw2 = a.mw2;
  a.mwp = Mat::Zero(net.wp.rows(), net.wp.cols());
  a.vwp = a.mwp;
  a.mwv = Mat::Zero(net.wv.rows(), net.wv.cols());
  a.vwv = a.mwv;
  a.mb1 = Vec::Zero(net.b1.size());
  a.vb1 = a.mb1;
  a.mb2 = Vec::Zero(net.b2.size());
  a.vb2 = a.mb2;
  a.mbp = Vec::Zero(net.bp.size());
  a.vbp = a.mbp;
  a.mbv = 0.0;
  a.vbv = 0.0;
  a.step = 0;
  return a;
}

UpdateDiagnostics ppo_update(PolicyValueNet& net, const std::vector<Transition>& batch,
                             double last_value, const PpoConfig& config, AdamState& adam) {
  const int n = static_cast<int>(batch.size());
  if (n == 0) {
    throw std::invalid_argument("ppo_update: empty batch");
  }

  // Generalized advantage estimation on the stored value estimates,
  // bootstrapped with last_value past the end of the batch.
  Vec advantages(n), returns(n);
  double carry = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const Transition& tr = batch[static_cast<std::size_t>(t)];
    const double not_done = tr.done ? 0.0 : 1.0;
    const double next_value =
        (t + 1 < n) ? batch[static_cast<std::size_t>(t) + 1].value : last_value;
    const double delta = tr.reward + config.discount * next_value * not_done - tr.value;
    carry = delta + config.discount * config.gae_lambda * not_done * carry;
    advantages(t) = carry;
    returns(t) = carry + tr.value;
  }

  // Batch standardization; a flat batch contributes no policy gradient.
  Vec norm_adv = advantages;
  const double mean = norm_adv.mean();
  norm_adv.array() -= mean;
  const double stddev = std::sqrt(norm_adv.squaredNorm() / n);
  if (stddev < 1e-12) {
    norm_adv.setZero();
  } else {
    norm_adv /= stddev;
  }

  UpdateDiagnostics diag;
  for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    const PpoGradients g = ppo_loss_gradients(net, batch, norm_adv, returns, config);

    adam.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
    const double lr = config.learning_rate;
    adam_step_block(net.w1, g.w1, adam.mw1, adam.vw1, lr, bc1, bc2);
    adam_step_block(net.w2, g.w2, adam.mw2, adam.vw2, lr, bc1, bc2);
    adam_step_block(net.wp, g.wp, adam.mwp, adam.vwp, lr, bc1, bc2);
    adam_step_block(net.wv, g.wv, adam.mwv, adam.vwv, lr, bc1, bc2);
    adam_step_block(net.b1, g.b1, adam.mb1, adam.vb1, lr, bc1, bc2);
    adam_step_block(net.b2, g.b2, adam.mb2, adam.vb2, lr, bc1, bc2);
    adam_step_block(net.bp, g.bp, adam.mbp, adam.vbp, lr, bc1, bc2);
    adam_step_scalar(net.bv, g.bv, adam.mbv, adam.vbv, lr, bc1, bc2);

    diag.clip_objective = g.clip_objective;
    diag.value_loss = g.value_loss;
    diag.entropy = g.entropy;
  }
  return diag;
}

PpoGradients ppo_loss_gradients(const PolicyValueNet& net, const std::vector<Transition>& batch,
                                const Vec& advantages, const Vec& returns,
                                const PpoConfig& config) {
  const int n = static_cast<int>(batch.size());
  if (n == 0 || advantages.size() != n || returns.size() != n) {
    throw std::invalid_argument("ppo_loss_gradients: batch/advantages/returns size mismatch");
  }

  PpoGradients g;
  g.w1 = Mat::Zero(net.w1.rows(), net.w1.cols());
  g.w2 = Mat::Zero(net.w2.rows(), net.w2.cols());
  g.wp = Mat::Zero(net.wp.rows(), net.wp.cols());
  g.wv = Mat::Zero(net.wv.rows(), net.wv.cols());
  g.b1 = Vec::Zero(net.b1.size());
  g.b2 = Vec::Zero(net.b2.size());
  g.bp = Vec::Zero(net.bp.size());

  double sum_clip = 0.0, sum_vloss = 0.0, sum_entropy = 0.0;
  for (int t = 0; t < n; ++t) {
    const Transition& tr = batch[static_cast<std::size_t>(t)];
    const ForwardCache f = forward_cached(net, tr.observation);
    const double adv = advantages(t);

    const double log_p = std::log(std::max(f.probs(tr.action), 1e-300));
    const double ratio = std::exp(log_p - tr.log_prob);
    const double unclipped = ratio * adv;
    const double clipped =
        std::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio) * adv;
    sum_clip += std::min(unclipped, clipped);

    const double entropy = -(f.probs.array() * f.probs.array().max(1e-300).log()).sum();
    sum_entropy += entropy;

    const double verr = f.value - returns(t);
    sum_vloss += verr * verr;

    // d(loss)/d(logits): clipped surrogate (gradient flows only when the
    // unclipped branch attains the min), plus the entropy bonus.
    Vec dz = Vec::Zero(net.n_actions);
    if (unclipped <= clipped) {
      dz = adv * ratio * f.probs;
      dz(tr.action) -= adv * ratio;  // together: -adv*ratio*(e_a - p)
    }
    dz += config.entropy_coefficient *
          (f.probs.array() * (f.probs.array().max(1e-300).log() + entropy)).matrix();

    // d(loss)/d(value) where loss holds value_coefficient * (v - R)^2.
    const double dv = config.value_coefficient * 2.0 * verr;

    g.wp += dz * f.h2.transpose();
    g.bp += dz;
    g.wv += dv * f.h2.transpose();
    g.bv += dv;

    const Vec dh2 = net.wp.transpose() * dz + net.wv.transpose() * dv;
    const Vec da2 = (dh2.array() * (1.0 - f.h2.array().square())).matrix();
    g.w2 += da2 * f.h1.transpose();
    g.b2 += da2;

    const Vec da1 = ((net.w2.transpose() * da2).array() * (1.0 - f.h1.array().square())).matrix();
    g.w1 += da1 * tr.observation.transpose();
    g.b1 += da1;
  }

  const double inv_n = 1.0 / n;
  g.w1 *= inv_n;
  g.w2 *= inv_n;
  g.wp *= inv_n;
  g.wv *= inv_n;
  g.b1 *= inv_n;
  g.b2 *= inv_n;
  g.bp *= inv_n;
  g.bv *= inv_n;

  g.clip_objective = sum_clip * inv_n;
  g.value_loss = sum_vloss * inv_n;
  g.entropy = sum_entropy * inv_n;
  g.loss = -g.clip_objective + config.value_coefficient * g.value_loss -
           config.entropy_coefficient * g.entropy;
  return g;
}

PpoTrainer::PpoTrainer(const SearchEnv& env, PpoConfig cfg)
    : config(cfg),
      net(PolicyValueNet::init(env.observation_size(), cfg.hidden1, cfg.hidden2,
                               static_cast<int>(env.actions().size()),
                               split_seed(cfg.seed, 0x11))),
      adam(AdamState::zeros_like(net)),
      trajectory(cfg.trajectory_capacity),
      rng(split_seed(cfg.seed, 0x22)) {
  if (config.update_frequency < 1 || config.update_frequency > config.trajectory_capacity) {
    throw std::invalid_argument("PpoTrainer: need 1 <= update_frequency <= trajectory_capacity");
  }
}

TrainResult PpoTrainer::train(SearchEnv& env, int episodes) {
  TrainResult result;
  result.best.chsh = -1.0;

  for (int ep = 0; ep < episodes; ++ep) {
    Vec obs = env.reset();
    while (!env.done()) {
      const ForwardCache f = forward_cached(net, obs);

      // Sample from the policy by CDF inversion.
      const double u = unit_draw(rng);
      int action = net.n_actions - 1;
      double cdf = 0.0;
      for (int a = 0; a < net.n_actions; ++a) {
        cdf += f.probs(a);
        if (u <= cdf) {
          action = a;
          break;
        }
      }

      const StepResult step = env.step(action);

      Transition tr;
      tr.observation = obs;
      tr.action = action;
      tr.log_prob = std::log(std::max(f.probs(action), 1e-300));
      tr.reward = step.reward;
      tr.value = f.value;
      tr.done = step.done;
      trajectory.push(tr);
      fresh.push_back(tr);

      obs = step.observation;

      if (static_cast<int>(fresh.size()) >= config.update_frequency) {
        const double last_value = fresh.back().done ? 0.0 : forward(net, obs).value;
        ppo_update(net, fresh, last_value, config, adam);
        fresh.clear();
      }
    }

    const EpisodeRecord& record = env.last_episode();
    result.chsh_trace.push_back(record.chsh);
    if (record.chsh > result.best.chsh) {
      result.best = record;
    }
    ++episodes_done;
  }

  if (result.best.chsh < 0.0) {
    result.best = EpisodeRecord{};  // zero-episode budget: no best record
  }
  return result;
}

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) {
    throw std::runtime_error("checkpoint: malformed matrix");
  }
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows[0].size());
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw std::runtime_error("checkpoint: ragged matrix");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Vec vec_from_json(const json& arr) {
  Vec v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = arr[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json transition_to_json(const Transition& t) {
  return json{{"observation", vec_to_json(t.observation)}, {"action", t.action},
              {"log_prob", t.log_prob},                    {"reward", t.reward},
              {"value", t.value},                          {"done", t.done}};
}

Transition transition_from_json(const json& j) {
  Transition t;
  t.observation = vec_from_json(j.at("observation"));
  t.action = j.at("action").get<int>();
  t.log_prob = j.at("log_prob").get<double>();
  t.reward = j.at("reward").get<double>();
  t.value = j.at("value").get<double>();
  t.done = j.at("done").get<bool>();
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const PpoTrainer& trainer) {
  std::ostringstream rng_text;
  rng_text << trainer.rng;

  json ring = json::array();
  for (const Transition& t : trainer.trajectory.recent(trainer.trajectory.size())) {
    ring.push_back(transition_to_json(t));
  }
  json pending = json::array();
  for (const Transition& t : trainer.fresh) {
    pending.push_back(transition_to_json(t));
  }

  const PpoConfig& c = trainer.config;
  const PolicyValueNet& n = trainer.net;
  const AdamState& a = trainer.adam;
  json doc = {
      {"format", 1},
      {"config",
       {{"update_frequency", c.update_frequency},
        {"trajectory_capacity", c.trajectory_capacity},
        {"clip_ratio", c.clip_ratio},
        {"discount", c.discount},
        {"gae_lambda", c.gae_lambda},
        {"learning_rate", c.learning_rate},
        {"epochs_per_update", c.epochs_per_update},
        {"entropy_coefficient", c.entropy_coefficient},
        {"value_coefficient", c.value_coefficient},
        {"hidden1", c.hidden1},
        {"hidden2", c.hidden2},
        {"seed", c.seed}}},
      {"net",
       {{"input_dim", n.input_dim},
        {"n_actions", n.n_actions},
        {"w1", mat_to_json(n.w1)},
        {"w2", mat_to_json(n.w2)},
        {"wp", mat_to_json(n.wp)},
        {"wv", mat_to_json(n.wv)},
        {"b1", vec_to_json(n.b1)},
        {"b2", vec_to_json(n.b2)},
        {"bp", vec_to_json(n.bp)},
        {"bv", n.bv}}},
      {"adam",
       {{"mw1", mat_to_json(a.mw1)}, {"vw1", mat_to_json(a.vw1)},
        {"mw2", mat_to_json(a.mw2)}, {"vw2", mat_to_json(a.vw2)},
        {"mwp", mat_to_json(a.mwp)}, {"vwp", mat_to_json(a.vwp)},
        {"mwv", mat_to_json(a.mwv)}, {"vwv", mat_to_json(a.vwv)},
        {"mb1", vec_to_json(a.mb1)}, {"vb1", vec_to_json(a.vb1)},
        {"mb2", vec_to_json(a.mb2)}, {"vb2", vec_to_json(a.vb2)},
        {"mbp", vec_to_json(a.mbp)}, {"vbp", vec_to_json(a.vbp)},
        {"mbv", a.mbv},              {"vbv", a.vbv},
        {"step", a.step}}},
      {"trajectory", ring},
      {"fresh", pending},
      {"rng", rng_text.str()},
      {"episodes_done", trainer.episodes_done},
  };

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint: " + path);
  }
  out << doc.dump() << "\n";
}

PpoTrainer load_checkpoint(const std::string& path, const SearchEnv& env) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (doc.at("format").get<int>() != 1) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }

  PpoConfig config;
  const json& jc = doc.at("config");
  config.update_frequency = jc.at("update_frequency").get<int>();
  config.trajectory_capacity = jc.at("trajectory_capacity").get<int>();
  config.clip_ratio = jc.at("clip_ratio").get<double>();
  config.discount = jc.at("discount").get<double>();
  config.gae_lambda = jc.at("gae_lambda").get<double>();
  config.learning_rate = jc.at("learning_rate").get<double>();
  config.epochs_per_update = jc.at("epochs_per_update").get<int>();
  config.entropy_coefficient = jc.at("entropy_coefficient").get<double>();
  config.value_coefficient = jc.at("value_coefficient").get<double>();
  config.hidden1 = jc.at("hidden1").get<int>();
  config.hidden2 = jc.at("hidden2").get<int>();
  config.seed = jc.at("seed").get<std::uint64_t>();

  PpoTrainer trainer(env, config);

  const json& jn = doc.at("net");
  trainer.net.input_dim = jn.at("input_dim").get<int>();
  trainer.net.n_actions = jn.at("n_actions").get<int>();
  if (trainer.net.input_dim != env.observation_size() ||
      trainer.net.n_actions != static_cast<int>(env.actions().size())) {
    throw std::runtime_error("checkpoint: network shape does not match the environment");
  }
  trainer.net.w1 = mat_from_json(jn.at("w1"));
  trainer.net.w2 = mat_from_json(jn.at("w2"));
  trainer.net.wp = mat_from_json(jn.at("wp"));
  trainer.net.wv = mat_from_json(jn.at("wv"));
  trainer.net.b1 = vec_from_json(jn.at("b1"));
  trainer.net.b2 = vec_from_json(jn.at("b2"));
  trainer.net.bp = vec_from_json(jn.at("bp"));
  trainer.net.bv = jn.at("bv").get<double>();

  const json& ja = doc.at("adam");
  trainer.adam.mw1 = mat_from_json(ja.at("mw1"));
  trainer.adam.vw1 = mat_from_json(ja.at("vw1"));
  trainer.adam.mw2 = mat_from_json(ja.at("mw2"));
  trainer.adam.vw2 = mat_from_json(ja.at("vw2"));
  trainer.adam.mwp = mat_from_json(ja.at("mwp"));
  trainer.adam.vwp = mat_from_json(ja.at("vwp"));
  trainer.adam.mwv = mat_from_json(ja.at("mwv"));
  trainer.adam.vwv = mat_from_json(ja.at("vwv"));
  trainer.adam.mb1 = vec_from_json(ja.at("mb1"));
  trainer.adam.vb1 = vec_from_json(ja.at("vb1"));
  trainer.adam.mb2 = vec_from_json(ja.at("mb2"));
  trainer.adam.vb2 = vec_from_json(ja.at("vb2"));
  trainer.adam.mbp = vec_from_json(ja.at("mbp"));
  trainer.adam.vbp = vec_from_json(ja.at("vbp"));
  trainer.adam.mbv = ja.at("mbv").get<double>();
  trainer.adam.vbv = ja.at("vbv").get<double>();
  trainer.adam.step = ja.at("step").get<long>();

  trainer.trajectory = Trajectory(config.trajectory_capacity);
  for (const json& jt : doc.at("trajectory")) {
    trainer.trajectory.push(transition_from_json(jt));
  }
  trainer.fresh.clear();
  for (const json& jt : doc.at("fresh")) {
    trainer.fresh.push_back(transition_from_json(jt));
  }

  std::istringstream rng_text(doc.at("rng").get<std::string>());
  rng_text >> trainer.rng;
  if (!rng_text) {
    throw std::runtime_error("checkpoint: malformed RNG state");
  }
  trainer.episodes_done = doc.at("episodes_done").get<long>();
  return trainer;
}

}  // namespace hpl
