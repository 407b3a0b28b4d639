#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cicam/errors.hpp"
#include "cicam/trainer.hpp"

using namespace cicam;

namespace {

NetworkConfig tiny_config(bool pool = true) {
  NetworkConfig cfg;
  cfg.backbone.stage_channels = {3, 4};
  cfg.backbone.convs_per_stage = 1;
  cfg.backbone.nonlocal_after_stage = {};
  cfg.num_classes = 5;
  cfg.image_size = 16;
  cfg.pool_enabled = pool;
  return cfg;
}

std::vector<Sample> tiny_dataset(int count, std::uint64_t seed = 21) {
  SceneSpec spec;
  spec.image_size = 16;
  spec.num_classes = 5;
  spec.seed = seed;
  return generate_dataset(spec, count, Split::train);
}

ClassScores scores_from_probs(std::vector<double> probs) {
  ClassScores s;
  const int n = static_cast<int>(probs.size());
  s.logits = Tensor({n});
  s.probs = Tensor({n});
  for (int i = 0; i < n; ++i) s.probs.at(i) = probs[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace

TEST_CASE("dual loss analytic values") {
  const int n = 5;
  ClassScores uniform = scores_from_probs(std::vector<double>(n, 1.0 / n));
  CHECK(std::abs(dual_loss(uniform, uniform, 2) - 2.0 * std::log(n)) <= 1e-6);

  std::vector<double> perfect(n, 0.0);
  perfect[2] = 1.0;
  ClassScores hit = scores_from_probs(perfect);
  CHECK(dual_loss(hit, hit, 2) < 1e-6);
}

TEST_CASE("Adam step matches the hand-computed update") {
  ParamStore store;
  Param& p = store.add("w", {2});
  p.value.at(0) = 1.0;
  p.value.at(1) = -2.0;
  p.grad.at(0) = 0.5;
  p.grad.at(1) = -0.25;

  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  AdamOptimizer adam(store, cfg);
  adam.step();

  for (int i = 0; i < 2; ++i) {
    double g = i == 0 ? 0.5 : -0.25;
    double m = (1.0 - cfg.beta1) * g;
    double v = (1.0 - cfg.beta2) * g * g;
    double mhat = m / (1.0 - cfg.beta1);
    double vhat = v / (1.0 - cfg.beta2);
    double expect = (i == 0 ? 1.0 : -2.0) - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    CHECK(p.value.at(i) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(adam.t() == 1);
}

TEST_CASE("training is deterministic given the seed") {
  auto data = tiny_dataset(24);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 5;

  Network a(tiny_config(), cfg.seed), b(tiny_config(), cfg.seed);
  Trainer ta(a, cfg), tb(b, cfg);
  std::vector<double> losses_a, losses_b;
  for (int e = 1; e <= cfg.epochs; ++e) {
    ta.train_epoch(data, e, [&](const StepRecord& r) { losses_a.push_back(r.loss); });
    tb.train_epoch(data, e, [&](const StepRecord& r) { losses_b.push_back(r.loss); });
  }
  CHECK(losses_a == losses_b);  // bit-identical
  for (const auto& p : a.store.all())
    CHECK(p->value.v == b.store.get(p->name).value.v);
  CHECK(a.pool.q.v == b.pool.q.v);
}

TEST_CASE("different seeds shuffle differently") {
  auto data = tiny_dataset(24);
  TrainConfig ca, cb;
  ca.seed = 1;
  cb.seed = 2;
  Network a(tiny_config(), 3), b(tiny_config(), 3);
  Trainer ta(a, ca), tb(b, cb);
  std::vector<double> la, lb;
  ta.train_epoch(data, 1, [&](const StepRecord& r) { la.push_back(r.loss); });
  tb.train_epoch(data, 1, [&](const StepRecord& r) { lb.push_back(r.loss); });
  CHECK(la != lb);
}

TEST_CASE("loss decreases over a few epochs") {
  auto data = tiny_dataset(60);
  TrainConfig cfg;
  cfg.learning_rate = 0.002;
  cfg.seed = 7;
  Network net(tiny_config(), cfg.seed);
  Trainer tr(net, cfg);
  double first = tr.train_epoch(data, 1);
  double last = 0.0;
  for (int e = 2; e <= 6; ++e) last = tr.train_epoch(data, e);
  CHECK(last < first);
}

TEST_CASE("pool updates once per training sample") {
  auto data = tiny_dataset(23);  // not a multiple of the batch size
  TrainConfig cfg;
  cfg.seed = 9;
  Network net(tiny_config(), cfg.seed);
  Trainer tr(net, cfg);
  tr.train_epoch(data, 1);
  CHECK(net.pool_update_count == 23);
  tr.train_epoch(data, 2);
  CHECK(net.pool_update_count == 46);
}

TEST_CASE("pool-off training never touches the pool") {
  auto data = tiny_dataset(12);
  TrainConfig cfg;
  Network net(tiny_config(false), 4);
  Trainer tr(net, cfg);
  tr.train_epoch(data, 1);
  CHECK(net.pool_update_count == 0);
  for (double v : net.pool.q.v) CHECK(v == 0.0);
}

TEST_CASE("zero enhance parameters make the branches identical") {
  // At init the enhancement is a no-op, so S^e must equal S within 1e-6 even
  // with a populated pool.
  auto data = tiny_dataset(6);
  Network net(tiny_config(), 15);
  Rng rng = make_rng(16);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : net.pool.q.v) v = d(rng);
  for (const auto& s : data) {
    auto f = net.forward(s.image, false);
    for (int i = 0; i < net.config.num_classes; ++i)
      CHECK(std::abs(f.se.logits.at(i) - f.s.logits.at(i)) <= 1e-6);
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
