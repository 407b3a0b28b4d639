#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cicam/checkpoint.hpp"
#include "cicam/errors.hpp"
#include "cicam/trainer.hpp"

using namespace cicam;
namespace fs = std::filesystem;

namespace {

NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.backbone.stage_channels = {3, 4};
  cfg.backbone.convs_per_stage = 1;
  cfg.backbone.nonlocal_after_stage = {2};
  cfg.num_classes = 5;
  cfg.image_size = 16;
  return cfg;
}

std::string tmp_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("container round trip preserves every entry type") {
  Checkpoint ck;
  Tensor t({2, 3});
  for (std::size_t i = 0; i < t.numel(); ++i) t.v[i] = 0.1 * static_cast<double>(i) - 0.25;
  ck.put_tensor("a/b", t);
  ck.put_tensor_f32("a/c", t);
  ck.put_scalar("s", 3.14159);
  ck.put_int("i", -42);
  ck.put_bytes("j", "{\"k\":1}");

  std::string path = tmp_path("cicam_ck_roundtrip.bin");
  ck.save(path);
  Checkpoint loaded = Checkpoint::load(path);

  CHECK(loaded.get_tensor("a/b").v == t.v);  // f64 is bit-exact
  Tensor f32 = loaded.get_tensor("a/c");
  REQUIRE(f32.shape == t.shape);
  for (std::size_t i = 0; i < t.numel(); ++i)
    CHECK(f32.v[i] == doctest::Approx(t.v[i]).epsilon(1e-6));
  CHECK(loaded.get_scalar("s") == 3.14159);
  CHECK(loaded.get_int("i") == -42);
  CHECK(loaded.get_bytes("j") == "{\"k\":1}");
  CHECK(loaded.names().size() == 5);
  CHECK(loaded.has("a/b"));
  CHECK(!loaded.has("missing"));
  CHECK_THROWS_AS(loaded.get_tensor("missing"), ValidationError);
  fs::remove(path);
}

TEST_CASE("corrupt files are rejected") {
  std::string path = tmp_path("cicam_ck_bogus.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS(Checkpoint::load(path));
  fs::remove(path);
}

TEST_CASE("network checkpoint restores parameters, pool, and config") {
  SceneSpec spec;
  spec.image_size = 16;
  spec.num_classes = 5;
  spec.seed = 31;
  auto data = generate_dataset(spec, 18, Split::train);

  TrainConfig tcfg;
  tcfg.seed = 31;
  Network net(tiny_config(), tcfg.seed);
  Trainer tr(net, tcfg);
  tr.train_epoch(data, 1);

  std::string path = tmp_path("cicam_ck_net.bin");
  save_training_checkpoint(path, net, &tr.optimizer(), 1, &tcfg);

  int epoch = -1;
  TrainConfig restored_cfg;
  auto restored = load_network_from_checkpoint(path, &epoch, &restored_cfg);
  CHECK(epoch == 1);
  CHECK(restored_cfg.seed == tcfg.seed);
  CHECK(restored->config.num_classes == 5);
  CHECK(restored->config.backbone.stage_channels == std::vector<int>{3, 4});
  for (const auto& p : net.store.all())
    CHECK(restored->store.get(p->name).value.v == p->value.v);
  CHECK(restored->pool.q.v == net.pool.q.v);
  fs::remove(path);
}

TEST_CASE("resume reproduces an uninterrupted run bit for bit") {
  SceneSpec spec;
  spec.image_size = 16;
  spec.num_classes = 5;
  spec.seed = 32;
  auto data = generate_dataset(spec, 24, Split::train);

  TrainConfig tcfg;
  tcfg.seed = 11;

  // Straight run: 4 epochs.
  Network full(tiny_config(), tcfg.seed);
  {
    Trainer tr(full, tcfg);
    for (int e = 1; e <= 4; ++e) tr.train_epoch(data, e);
  }

  // Interrupted run: 2 epochs, checkpoint, reload, 2 more.
  std::string path = tmp_path("cicam_ck_resume.bin");
  {
    Network net(tiny_config(), tcfg.seed);
    Trainer tr(net, tcfg);
    for (int e = 1; e <= 2; ++e) tr.train_epoch(data, e);
    save_training_checkpoint(path, net, &tr.optimizer(), 2, &tcfg);
  }
  int epoch = 0;
  TrainConfig loaded_cfg;
  auto resumed = load_network_from_checkpoint(path, &epoch, &loaded_cfg);
  Trainer tr2(*resumed, loaded_cfg);
  load_adam_state(path, *resumed, tr2.optimizer());
  for (int e = epoch + 1; e <= 4; ++e) tr2.train_epoch(data, e);

  for (const auto& p : full.store.all())
    CHECK(resumed->store.get(p->name).value.v == p->value.v);
  CHECK(resumed->pool.q.v == full.pool.q.v);
  fs::remove(path);
}
