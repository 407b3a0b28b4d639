#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cicam/datagen.hpp"
#include "cicam/network.hpp"

namespace cicam {

struct TrainConfig {
  double learning_rate = 0.0005;
  int batch_size = 6;
  int epochs = 30;  // desk-scale default; the reference setup uses 100
  double lambda = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Sum of both branches' cross-entropies against the one-hot label.
double dual_loss(const ClassScores& s, const ClassScores& se, int label);

class AdamOptimizer {
 public:
  AdamOptimizer(ParamStore& store, const TrainConfig& config);

  void step();  // one update from the accumulated gradients

  std::int64_t t() const { return t_; }
  void set_t(std::int64_t t) { t_ = t; }
  // Moment buffers, index-aligned with store.all().
  std::vector<Tensor>& m() { return m_; }
  std::vector<Tensor>& v() { return v_; }

 private:
  ParamStore& store_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct StepRecord {
  int epoch;
  int step;
  double loss;
  double lr;
};

class Trainer {
 public:
  Trainer(Network& net, const TrainConfig& config);

  // One Adam step on the mean batch loss; pool updated once per sample, in
  // sample order, inside the forward pass. Returns the mean dual loss.
  double train_step(const std::vector<const Sample*>& batch);

  // Deterministic shuffle derived from (seed, epoch), then batched steps.
  // Returns the epoch mean loss. `epoch` is 1-based.
  double train_epoch(const std::vector<Sample>& data, int epoch,
                     const std::function<void(const StepRecord&)>& on_step = {});

  AdamOptimizer& optimizer() { return adam_; }
  const TrainConfig& config() const { return config_; }

 private:
  Network& net_;
  TrainConfig config_;
  AdamOptimizer adam_;
};

// Full training state: parameters, pool (pool/Q, pool/lambda), Adam moments,
// epoch counter, and both configs as JSON.
void save_training_checkpoint(const std::string& path, Network& net,
                              const AdamOptimizer* adam, int epoch,
                              const TrainConfig* train_config);

// Rebuilds the network from the stored config and loads parameters + pool.
// Optionally recovers the epoch counter and train config.
std::unique_ptr<Network> load_network_from_checkpoint(const std::string& path,
                                                      int* epoch = nullptr,
                                                      TrainConfig* train_config = nullptr);

// Restores Adam moments from the same checkpoint (resume path).
void load_adam_state(const std::string& path, Network& net, AdamOptimizer& adam);

}  // namespace cicam
