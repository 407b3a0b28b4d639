#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace cicam {

// Provenance record written once per artifact directory. `deterministic`
// suppresses wall-clock timestamps so directory bytes stay a pure function of
// the inputs (dataset generation relies on this).
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string dataset_hash;  // empty when no dataset is involved
  std::vector<std::string> outputs;
  bool deterministic = false;

  void mark_started();
  void mark_finished();
  void write(const std::string& dir) const;  // <dir>/run_manifest.json

 private:
  std::string started_at_, finished_at_;
};

}  // namespace cicam
