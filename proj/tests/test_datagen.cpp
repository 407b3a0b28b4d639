#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cicam/datagen.hpp"
#include "cicam/errors.hpp"

using namespace cicam;
namespace fs = std::filesystem;

namespace {

SceneSpec small_spec() {
  SceneSpec s;
  s.image_size = 32;
  s.num_classes = 5;
  s.cooccurrence_rate = 0.95;
  s.seed = 7;
  return s;
}

bool is_foreground_pixel(const Sample& s, int y, int x) {
  // Shapes are flat saturated colors; textures live in a muted band with
  // channel spread < 0.3. Channel max-min > 0.4 only on foreground.
  double mn = 1.0, mx = 0.0;
  for (int c = 0; c < 3; ++c) {
    mn = std::min(mn, s.image.at(c, y, x));
    mx = std::max(mx, s.image.at(c, y, x));
  }
  return mx - mn > 0.4;
}

}  // namespace

TEST_CASE("determinism: identical spec yields identical datasets") {
  auto a = generate_dataset(small_spec(), 20, Split::train);
  auto b = generate_dataset(small_spec(), 20, Split::train);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].gt_box == b[i].gt_box);
    CHECK(a[i].image.v == b[i].image.v);  // bit-identical
  }
}

TEST_CASE("train and test splits differ") {
  auto a = generate_dataset(small_spec(), 5, Split::train);
  auto b = generate_dataset(small_spec(), 5, Split::test);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].image.v != b[i].image.v) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("rho=1.0 couples background to label") {
  SceneSpec spec = small_spec();
  spec.cooccurrence_rate = 1.0;
  for (const auto& s : generate_dataset(spec, 200, Split::train))
    CHECK(s.texture_id == s.label);
}

TEST_CASE("gt_box bounds the foreground tightly") {
  auto samples = generate_dataset(small_spec(), 50, Split::train);
  for (const auto& s : samples) {
    const BoundingBox& b = s.gt_box;
    REQUIRE(b.valid());
    REQUIRE(b.x_min >= 0);
    REQUIRE(b.y_min >= 0);
    REQUIRE(b.x_max <= s.image.dim(2));
    REQUIRE(b.y_max <= s.image.dim(1));
    bool left = false, right = false, top = false, bottom = false;
    for (int y = 0; y < s.image.dim(1); ++y)
      for (int x = 0; x < s.image.dim(2); ++x) {
        if (!is_foreground_pixel(s, y, x)) continue;
        CHECK(x >= b.x_min);
        CHECK(x < b.x_max);
        CHECK(y >= b.y_min);
        CHECK(y < b.y_max);
        left = left || x == b.x_min;
        right = right || x == b.x_max - 1;
        top = top || y == b.y_min;
        bottom = bottom || y == b.y_max - 1;
      }
    CHECK(left);
    CHECK(right);
    CHECK(top);
    CHECK(bottom);
  }
}

TEST_CASE("empirical co-occurrence tracks rho") {
  SceneSpec spec = small_spec();
  spec.cooccurrence_rate = 0.95;
  int hits = 0;
  const int n = 10000;
  auto samples = generate_dataset(spec, n, Split::train);
  for (const auto& s : samples) hits += s.texture_id == s.label;
  double rate = static_cast<double>(hits) / n;
  CHECK(rate == doctest::Approx(0.95).epsilon(0.021));
}

TEST_CASE("rho=1/n: chi-square does not reject label/texture independence") {
  SceneSpec spec = small_spec();
  spec.cooccurrence_rate = 1.0 / spec.num_classes;
  const int n = 10000;
  auto samples = generate_dataset(spec, n, Split::train);
  const int k = spec.num_classes;
  std::vector<int> table(static_cast<std::size_t>(k * k), 0);
  std::vector<int> row(static_cast<std::size_t>(k), 0), col(static_cast<std::size_t>(k), 0);
  for (const auto& s : samples) {
    ++table[static_cast<std::size_t>(s.label * k + s.texture_id)];
    ++row[static_cast<std::size_t>(s.label)];
    ++col[static_cast<std::size_t>(s.texture_id)];
  }
  double chi2 = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double expect = static_cast<double>(row[static_cast<std::size_t>(i)]) *
                      col[static_cast<std::size_t>(j)] / n;
      double obs = table[static_cast<std::size_t>(i * k + j)];
      chi2 += (obs - expect) * (obs - expect) / expect;
    }
  // (k-1)^2 = 16 dof, alpha = 0.01 critical value.
  CHECK(chi2 < 32.0);
}

TEST_CASE("validation errors") {
  SceneSpec spec = small_spec();
  CHECK_THROWS_AS(generate_dataset(spec, 0, Split::train), ValidationError);
  spec.num_classes = 9;
  CHECK_THROWS_AS(generate_dataset(spec, 1, Split::train), ValidationError);
  spec = small_spec();
  spec.cooccurrence_rate = 1.5;
  CHECK_THROWS_AS(generate_dataset(spec, 1, Split::train), ValidationError);
}

TEST_CASE("save/load round trip is exact") {
  auto samples = generate_dataset(small_spec(), 8, Split::train);
  fs::path dir = fs::temp_directory_path() / "cicam_test_ds";
  fs::remove_all(dir);
  save_dataset(dir.string(), samples);
  auto loaded = load_dataset(dir.string());
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].label == samples[i].label);
    CHECK(loaded[i].gt_box == samples[i].gt_box);
    CHECK(loaded[i].image.v == samples[i].image.v);
  }
  CHECK(!dataset_hash(dir.string()).empty());
  fs::remove_all(dir);
}
