#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cicam/combiner.hpp"
#include "cicam/errors.hpp"
#include "cicam/rng.hpp"

using namespace cicam;

TEST_CASE("gamma kind parsing round-trips and rejects unknown names") {
  for (const char* name : {"top1", "linear-decay", "nlccam-bipolar"})
    CHECK(gamma_kind_name(parse_gamma_kind(name)) == name);
  CHECK_THROWS_AS(parse_gamma_kind("softmax"), ValidationError);
}

TEST_CASE("top1 weights") {
  CombinerConfig cfg;
  cfg.kind = GammaKind::top1;
  auto g = gamma_weights(cfg, 5);
  CHECK(g == std::vector<double>{1, 0, 0, 0, 0});
}

TEST_CASE("linear decay weights") {
  CombinerConfig cfg;
  cfg.kind = GammaKind::linear_decay;
  auto g = gamma_weights(cfg, 4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.75));
  CHECK(g[2] == doctest::Approx(0.5));
  CHECK(g[3] == doctest::Approx(0.25));
}

TEST_CASE("bipolar weights: defaults, zero case, and the (1, 0, -1) case") {
  CombinerConfig cfg;  // nlccam-bipolar, p = q = 0.1, scale = 1
  auto g = gamma_weights(cfg, 5);
  CHECK(g == std::vector<double>{1, 0, 0, 0, -0.25});

  cfg.p = 0.0;
  cfg.q = 0.0;
  g = gamma_weights(cfg, 5);
  CHECK(g == std::vector<double>{0, 0, 0, 0, 0});

  cfg.p = 1.0 / 3.0;
  cfg.q = 1.0 / 3.0;
  cfg.scale = 2.0;
  g = gamma_weights(cfg, 3);
  CHECK(g == std::vector<double>{1, 0, -1});
}

TEST_CASE("rank_maps orders by probability, ties to lowest class index") {
  ActivationMaps m;
  m.t = Tensor({4, 2, 2});
  ClassScores s;
  s.logits = Tensor({4});
  s.probs = Tensor({4});
  s.probs.at(0) = 0.2;
  s.probs.at(1) = 0.4;
  s.probs.at(2) = 0.2;
  s.probs.at(3) = 0.2;
  auto order = rank_maps(m, s);
  CHECK(order == std::vector<int>{1, 0, 2, 3});
}

TEST_CASE("combine matches a naive weighted sum over ranked maps") {
  Rng rng = make_rng(1);
  const int n = 5, h = 3, w = 3;
  ActivationMaps m;
  m.t = Tensor({n, h, w});
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : m.t.v) v = d(rng);

  std::vector<int> order{3, 0, 4, 1, 2};
  CombinerConfig cfg;  // bipolar defaults: gamma = (1, 0, 0, 0, -0.25)
  LocalizationMap out = combine(m, order, cfg);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double expect = 1.0 * m.t.at(3, y, x) - 0.25 * m.t.at(2, y, x);
      CHECK(out.h.at(y, x) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("all-zero gamma yields the zero map") {
  ActivationMaps m;
  m.t = Tensor({3, 2, 2});
  for (double& v : m.t.v) v = 1.0;
  CombinerConfig cfg;
  cfg.p = 0.0;
  cfg.q = 0.0;
  LocalizationMap out = combine(m, {0, 1, 2}, cfg);
  for (double v : out.h.v) CHECK(v == 0.0);
}

TEST_CASE("combine validates the ranked list length") {
  ActivationMaps m;
  m.t = Tensor({3, 2, 2});
  CombinerConfig cfg;
  CHECK_THROWS_AS(combine(m, {0, 1}, cfg), ValidationError);
}
