#include "cicam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cicam/checkpoint.hpp"
#include "cicam/config_json.hpp"
#include "cicam/errors.hpp"
#include "cicam/rng.hpp"

namespace cicam {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ValidationError("learning_rate must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ValidationError("beta1 must be in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ValidationError("beta2 must be in [0, 1)");
  if (adam_eps <= 0.0) throw ValidationError("adam_eps must be positive");
}

double dual_loss(const ClassScores& s, const ClassScores& se, int label) {
  if (label < 0 || label >= s.num_classes())
    throw ValidationError("dual_loss: invalid label");
  return -std::log(s.probs.at(label)) - std::log(se.probs.at(label));
}

AdamOptimizer::AdamOptimizer(ParamStore& store, const TrainConfig& config)
    : store_(store),
      lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.adam_eps) {
  for (const auto& p : store.all()) {
    m_.emplace_back(p->value.shape);
    v_.emplace_back(p->value.shape);
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t idx = 0;
  for (const auto& p : store_.all()) {
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* m = m_[idx].data();
    double* v = v_[idx].data();
    const std::size_t n = p->value.numel();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    ++idx;
  }
}

Trainer::Trainer(Network& net, const TrainConfig& config)
    : net_(net), config_(config), adam_(net.store, config) {
  config_.validate();
  net_.pool.lambda = config_.lambda;
}

double Trainer::train_step(const std::vector<const Sample*>& batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  net_.store.zero_grad();
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss_sum = 0.0;
  for (const Sample* s : batch) {
    Network::Forward f = net_.forward(s->image, /*update_pool_q=*/net_.config.pool_enabled);
    loss_sum += net_.backward(f, s->label, scale);
  }
  const double mean_loss = loss_sum * scale;
  if (!std::isfinite(mean_loss))
    throw std::runtime_error("non-finite loss; aborting training");
  adam_.step();
  return mean_loss;
}

double Trainer::train_epoch(const std::vector<Sample>& data, int epoch,
                            const std::function<void(const StepRecord&)>& on_step) {
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  // Shuffle is a pure function of (seed, epoch) so resumed runs replay the
  // exact batch sequence.
  Rng rng = make_rng(config_.seed, 1000 + static_cast<std::uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);

  double epoch_loss = 0.0;
  int steps = 0;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(config_.batch_size)) {
    std::vector<const Sample*> batch;
    for (std::size_t i = start;
         i < std::min(order.size(), start + static_cast<std::size_t>(config_.batch_size));
         ++i)
      batch.push_back(&data[static_cast<std::size_t>(order[i])]);
    double loss = train_step(batch);
    epoch_loss += loss;
    ++steps;
    if (on_step) on_step({epoch, steps, loss, config_.learning_rate});
  }
  return epoch_loss / steps;
}

void save_training_checkpoint(const std::string& path, Network& net,
                              const AdamOptimizer* adam, int epoch,
                              const TrainConfig* train_config) {
  Checkpoint ck;
  for (const auto& p : net.store.all()) ck.put_tensor(p->name, p->value);
  ck.put_tensor("pool/Q", net.pool.q);
  ck.put_scalar("pool/lambda", net.pool.lambda);
  ck.put_int("meta/epoch", epoch);
  ck.put_bytes("meta/network_config", to_json(net.config).dump());
  if (train_config)
    ck.put_bytes("meta/train_config", to_json(*train_config).dump());
  if (adam) {
    ck.put_int("adam/t", const_cast<AdamOptimizer*>(adam)->t());
    std::size_t idx = 0;
    for (const auto& p : net.store.all()) {
      ck.put_tensor("adam/m/" + p->name, const_cast<AdamOptimizer*>(adam)->m()[idx]);
      ck.put_tensor("adam/v/" + p->name, const_cast<AdamOptimizer*>(adam)->v()[idx]);
      ++idx;
    }
  }
  ck.save(path);
}

std::unique_ptr<Network> load_network_from_checkpoint(const std::string& path,
                                                      int* epoch,
                                                      TrainConfig* train_config) {
  Checkpoint ck = Checkpoint::load(path);
  NetworkConfig cfg =
      network_config_from_json(nlohmann::json::parse(ck.get_bytes("meta/network_config")));
  auto net = std::make_unique<Network>(cfg, /*seed=*/0);
  for (const auto& p : net->store.all()) {
    Tensor t = ck.get_tensor(p->name);
    if (t.shape != p->value.shape)
      throw ValidationError("checkpoint shape mismatch for " + p->name);
    p->value = std::move(t);
  }
  net->pool.q = ck.get_tensor("pool/Q");
  net->pool.lambda = ck.get_scalar("pool/lambda");
  if (epoch) *epoch = static_cast<int>(ck.get_int("meta/epoch"));
  if (train_config && ck.has("meta/train_config"))
    *train_config =
        train_config_from_json(nlohmann::json::parse(ck.get_bytes("meta/train_config")));
  return net;
}

void load_adam_state(const std::string& path, Network& net, AdamOptimizer& adam) {
  Checkpoint ck = Checkpoint::load(path);
  adam.set_t(ck.get_int("adam/t"));
  std::size_t idx = 0;
  for (const auto& p : net.store.all()) {
    adam.m()[idx] = ck.get_tensor("adam/m/" + p->name);
    adam.v()[idx] = ck.get_tensor("adam/v/" + p->name);
    ++idx;
  }
}

}  // namespace cicam
