#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("CICAM_BIN");
  REQUIRE(b != nullptr);
  return b;
}

fs::path work_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "cicam_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run(const std::string& args) {
  std::string cmd = bin() + " " + args + " > " +
                    (work_root() / "stdout.txt").string() + " 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

// One small dataset + trained checkpoint shared by the dependent cases.
struct Fixture {
  fs::path train_dir, test_dir, run_dir;
  Fixture() {
    train_dir = work_root() / "train_data";
    test_dir = work_root() / "test_data";
    run_dir = work_root() / "run";
    REQUIRE(run("datagen --classes 5 --rho 0.95 --count 30 --seed 1 --size 16 --split train --out " +
                train_dir.string()) == 0);
    REQUIRE(run("datagen --classes 5 --count 10 --seed 2 --size 16 --split test --out " +
                test_dir.string()) == 0);
    REQUIRE(run("train --data " + train_dir.string() + " --out " + run_dir.string() +
                " --epochs 2 --seed 3 --stage-channels 3,4 --convs-per-stage 1 --nonlocal \"\"") == 0);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("datagen writes a loadable dataset and manifest") {
  Fixture& f = fixture();
  REQUIRE(fs::exists(f.train_dir / "manifest.json"));
  json manifest = read_json(f.train_dir / "manifest.json");
  REQUIRE(manifest.is_array());
  CHECK(manifest.size() == 30);
  for (const auto& e : manifest) {
    CHECK(e.contains("file"));
    CHECK(e.contains("label"));
    CHECK(e.contains("gt_box"));
    CHECK(fs::exists(f.train_dir / e["file"].get<std::string>()));
  }
  CHECK(fs::exists(f.train_dir / "run_manifest.json"));
}

TEST_CASE("datagen is byte-deterministic") {
  fs::path a = work_root() / "dg_a", b = work_root() / "dg_b";
  std::string flags = "datagen --classes 5 --count 6 --seed 9 --size 16 --split train --out ";
  REQUIRE(run(flags + a.string()) == 0);
  REQUIRE(run(flags + b.string()) == 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    fs::path other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(read_file(entry.path()) == read_file(other));
  }
}

TEST_CASE("train writes the checkpoint, log, and manifest") {
  Fixture& f = fixture();
  CHECK(fs::exists(f.run_dir / "ckpt_final.bin"));
  CHECK(fs::exists(f.run_dir / "run_manifest.json"));
  std::istringstream log(read_file(f.run_dir / "train_log.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    json rec = json::parse(line);
    CHECK(rec.contains("epoch"));
    CHECK(rec.contains("step"));
    CHECK(rec.contains("loss"));
    CHECK(rec.contains("lr"));
    ++lines;
  }
  CHECK(lines == 2 * 5);  // 30 samples, batch 6, 2 epochs
}

TEST_CASE("train is deterministic: identical seeds give identical loss logs") {
  Fixture& f = fixture();
  fs::path again = work_root() / "run_again";
  REQUIRE(run("train --data " + f.train_dir.string() + " --out " + again.string() +
              " --epochs 2 --seed 3 --stage-channels 3,4 --convs-per-stage 1 --nonlocal \"\"") == 0);
  CHECK(read_file(again / "train_log.jsonl") == read_file(f.run_dir / "train_log.jsonl"));
}

TEST_CASE("eval writes a complete report and is deterministic") {
  Fixture& f = fixture();
  fs::path out1 = work_root() / "eval1", out2 = work_root() / "eval2";
  std::string flags = "eval --data " + f.test_dir.string() + " --ckpt " +
                      (f.run_dir / "ckpt_final.bin").string() + " --csv --out ";
  REQUIRE(run(flags + out1.string()) == 0);
  REQUIRE(run(flags + out2.string()) == 0);

  json rep = read_json(out1 / "report.json");
  for (const char* key : {"top1_cls", "top5_cls", "top1_loc", "top5_loc", "gtknown_loc",
                          "counts", "noforeground_count", "mean_box_area"})
    CHECK(rep.contains(key));
  CHECK(rep["counts"] == 10);
  CHECK(read_file(out1 / "report.json") == read_file(out2 / "report.json"));
  CHECK(read_file(out1 / "per_sample.csv") == read_file(out2 / "per_sample.csv"));
}

TEST_CASE("theta sweep emits one row per threshold") {
  Fixture& f = fixture();
  fs::path out = work_root() / "eval_sweep";
  REQUIRE(run("eval --data " + f.test_dir.string() + " --ckpt " +
              (f.run_dir / "ckpt_final.bin").string() +
              " --theta-sweep 0.0:0.3:0.1 --out " + out.string()) == 0);
  json sweep = read_json(out / "theta_sweep.json");
  REQUIRE(sweep.is_array());
  CHECK(sweep.size() == 4);
  for (const auto& row : sweep) {
    CHECK(row.contains("theta"));
    CHECK(row.contains("mean_box_area"));
    CHECK(row.contains("gtknown_loc"));
  }
}

TEST_CASE("visualize writes one composite per sample") {
  Fixture& f = fixture();
  fs::path out = work_root() / "viz";
  REQUIRE(run("visualize --data " + f.test_dir.string() + " --ckpt " +
              (f.run_dir / "ckpt_final.bin").string() + " --count 3 --out " + out.string()) == 0);
  int pngs = 0;
  for (const auto& e : fs::directory_iterator(out))
    pngs += e.path().extension() == ".png";
  CHECK(pngs == 3);
}

TEST_CASE("resume continues from a checkpoint") {
  Fixture& f = fixture();
  fs::path out = work_root() / "run_resumed";
  REQUIRE(run("train --data " + f.train_dir.string() + " --out " + out.string() +
              " --resume " + (f.run_dir / "ckpt_final.bin").string() + " --epochs 3") == 0);
  CHECK(fs::exists(out / "ckpt_final.bin"));
}

TEST_CASE("--nonlocal none disables the attention blocks") {
  Fixture& f = fixture();
  fs::path out = work_root() / "run_no_nl";
  REQUIRE(run("train --data " + f.train_dir.string() + " --out " + out.string() +
              " --epochs 1 --seed 8 --stage-channels 3,4 --convs-per-stage 1 --nonlocal none") == 0);
  json manifest = read_json(out / "run_manifest.json");
  CHECK(manifest["config"]["network"]["backbone"]["nonlocal_after_stage"].empty());
}

TEST_CASE("bad invocations exit with the validation code") {
  CHECK(run("datagen --out /tmp/x --classes 99 --count 1") == 2);
  CHECK(run("datagen") == 2);                       // missing --out
  CHECK(run("frobnicate") == 2);                    // unknown subcommand
  CHECK(run("eval --data /nonexistent --ckpt /nonexistent/ckpt.bin --out /tmp/x2") >= 2);
  CHECK(run("train --data /nonexistent --out /tmp/x3 --epochs 1") >= 2);
}

TEST_CASE("CICAM_DATA_DIR provides the dataset fallback") {
  Fixture& f = fixture();
  fs::path out = work_root() / "eval_env";
  std::string cmd = "CICAM_DATA_DIR=" + f.test_dir.string() + " " + bin() +
                    " eval --ckpt " + (f.run_dir / "ckpt_final.bin").string() +
                    " --out " + out.string() + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(out / "report.json"));
}
