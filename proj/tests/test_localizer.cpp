#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <deque>

#include "cicam/errors.hpp"
#include "cicam/localizer.hpp"
#include "cicam/rng.hpp"

using namespace cicam;

namespace {

// Reference flood fill, structured nothing like the stack-based production code.
std::vector<std::vector<int>> oracle_components(const std::vector<std::uint8_t>& mask,
                                                int h, int w, int connectivity) {
  std::vector<int> comp_id(mask.size(), -1);
  std::vector<std::vector<int>> comps;
  for (int start = 0; start < h * w; ++start) {
    if (!mask[static_cast<std::size_t>(start)] || comp_id[static_cast<std::size_t>(start)] >= 0)
      continue;
    std::vector<int> pixels;
    std::deque<int> frontier{start};
    comp_id[static_cast<std::size_t>(start)] = static_cast<int>(comps.size());
    while (!frontier.empty()) {
      int p = frontier.front();
      frontier.pop_front();
      pixels.push_back(p);
      int py = p / w, px = p % w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          if (connectivity == 4 && dy != 0 && dx != 0) continue;
          int ny = py + dy, nx = px + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          int q = ny * w + nx;
          if (mask[static_cast<std::size_t>(q)] && comp_id[static_cast<std::size_t>(q)] < 0) {
            comp_id[static_cast<std::size_t>(q)] = static_cast<int>(comps.size());
            frontier.push_back(q);
          }
        }
    }
    std::sort(pixels.begin(), pixels.end());
    comps.push_back(std::move(pixels));
  }
  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return comps;
}

}  // namespace

TEST_CASE("bilinear upsampling: constants stay constant, ramps interpolate") {
  Tensor m({2, 2});
  for (double& v : m.v) v = 3.0;
  Tensor up = upsample_bilinear(m, 8, 8);
  for (double v : up.v) CHECK(v == doctest::Approx(3.0).epsilon(1e-12));

  // Horizontal ramp 0..1: upsampled rows are nondecreasing left to right and
  // clamp to the edge values.
  m.at(0, 0) = m.at(1, 0) = 0.0;
  m.at(0, 1) = m.at(1, 1) = 1.0;
  up = upsample_bilinear(m, 8, 8);
  for (int y = 0; y < 8; ++y) {
    CHECK(up.at(y, 0) == doctest::Approx(0.0));
    CHECK(up.at(y, 7) == doctest::Approx(1.0));
    for (int x = 1; x < 8; ++x) CHECK(up.at(y, x) >= up.at(y, x - 1));
  }

  // Half-pixel centers: output pixel x maps to source (x + 0.5)/4 - 0.5.
  // For x = 3 that is 0.375, so the value is 0.375 along the ramp.
  CHECK(up.at(4, 3) == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("1x1 maps broadcast") {
  Tensor m({1, 1});
  m.at(0) = 0.7;
  Tensor up = upsample_bilinear(m, 5, 5);
  for (double v : up.v) CHECK(v == doctest::Approx(0.7));
}

TEST_CASE("connected components match the flood-fill oracle on random masks") {
  Rng rng = make_rng(9);
  std::bernoulli_distribution coin(0.45);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 8, w = 8;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(h * w));
    for (auto& v : mask) v = coin(rng);
    for (int connectivity : {4, 8}) {
      auto got = connected_components(mask, h, w, connectivity);
      auto want = oracle_components(mask, h, w, connectivity);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i].pixels == want[i]);
    }
  }
}

TEST_CASE("segment_box picks the tight box of the largest component") {
  // Two blobs at feature resolution; the 3-wide one must win over the 1-wide.
  LocalizationMap hmap;
  hmap.h = Tensor({8, 8});
  for (int x = 1; x <= 3; ++x) hmap.h.at(2, x) = 1.0;
  hmap.h.at(6, 6) = 1.0;
  LocalizerConfig cfg;
  cfg.theta = 0.5;
  BoundingBox box = segment_box(hmap, 8, cfg);
  CHECK(box == BoundingBox{1, 2, 4, 3});
}

TEST_CASE("segment_box agrees with the oracle on random maps") {
  Rng rng = make_rng(10);
  std::uniform_real_distribution<double> d(-0.5, 1.0);
  int produced = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LocalizationMap hmap;
    hmap.h = Tensor({8, 8});
    for (double& v : hmap.h.v) v = d(rng);
    LocalizerConfig cfg;
    cfg.theta = 0.3;
    cfg.connectivity = trial % 2 ? 4 : 8;

    // Reference path: upsample (identity at 8->8), strict threshold, oracle
    // flood fill, tight box of the largest component.
    double mx = *std::max_element(hmap.h.v.begin(), hmap.h.v.end());
    if (mx <= 0.0) {
      CHECK_THROWS_AS(segment_box(hmap, 8, cfg), NoForegroundError);
      continue;
    }
    std::vector<std::uint8_t> mask(hmap.h.numel());
    for (std::size_t i = 0; i < mask.size(); ++i)
      mask[i] = hmap.h.v[i] > cfg.theta * mx;
    auto comps = oracle_components(mask, 8, 8, cfg.connectivity);
    REQUIRE(!comps.empty());  // the max pixel always survives its own threshold
    BoundingBox want{8, 8, 0, 0};
    for (int p : comps.front()) {
      want.x_min = std::min(want.x_min, p % 8);
      want.x_max = std::max(want.x_max, p % 8 + 1);
      want.y_min = std::min(want.y_min, p / 8);
      want.y_max = std::max(want.y_max, p / 8 + 1);
    }
    CHECK(segment_box(hmap, 8, cfg) == want);
    ++produced;
  }
  CHECK(produced > 100);
}

TEST_CASE("non-positive maps raise NoForegroundError") {
  LocalizationMap hmap;
  hmap.h = Tensor({4, 4});
  for (double& v : hmap.h.v) v = -1.0;
  CHECK_THROWS_AS(segment_box(hmap, 16, LocalizerConfig{}), NoForegroundError);
}

TEST_CASE("config validation") {
  LocalizerConfig cfg;
  cfg.theta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = LocalizerConfig{};
  cfg.theta = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = LocalizerConfig{};
  cfg.connectivity = 6;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
