#include "cicam/run_manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace cicam {

namespace {

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

void RunManifest::mark_started() { started_at_ = utc_now(); }
void RunManifest::mark_finished() { finished_at_ = utc_now(); }

void RunManifest::write(const std::string& dir) const {
  nlohmann::json j{{"command", command},
                   {"config", config},
                   {"seed", seed},
                   {"outputs", outputs}};
  j["dataset_hash"] = dataset_hash.empty() ? nlohmann::json() : nlohmann::json(dataset_hash);
  if (deterministic) {
    j["started_at"] = nullptr;
    j["finished_at"] = nullptr;
  } else {
    j["started_at"] = started_at_;
    j["finished_at"] = finished_at_;
  }
  std::filesystem::create_directories(dir);
  std::ofstream f(dir + "/run_manifest.json");
  f << j.dump(2) << "\n";
}

}  // namespace cicam
