#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cicam/box.hpp"
#include "cicam/tensor.hpp"

namespace cicam {

enum class Split { train, test };

// Controls the synthetic confounded scene generator. Each class has a
// signature foreground shape and a paired background texture; with
// probability `cooccurrence_rate` a sample is rendered on its paired texture.
struct SceneSpec {
  int image_size = 64;           // square images
  int num_classes = 5;           // n, at most the shape/texture inventory (5)
  double cooccurrence_rate = 0.95;  // rho in [0,1]
  double foreground_scale = 0.4;    // nominal object side as fraction of image side
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

constexpr int kShapeInventory = 5;  // disk, square, triangle, cross, ring

struct Sample {
  Tensor image;  // 3 x H x W in [0,1], values on the 8-bit grid
  int label = 0;
  int texture_id = 0;  // background texture actually used
  BoundingBox gt_box;  // tight bound of the rendered foreground
};

// Renders `count` samples. The test split defaults to the unconfounded rate
// rho = 1/n unless `override_rate` >= 0 is given. Deterministic in
// (spec, count, split): the same arguments always produce identical samples.
std::vector<Sample> generate_dataset(const SceneSpec& spec, int count, Split split,
                                     double override_rate = -1.0);

// On-disk layout: <dir>/manifest.json with [{file, label, gt_box}] plus one
// PNG per sample.
void save_dataset(const std::string& dir, const std::vector<Sample>& samples);
std::vector<Sample> load_dataset(const std::string& dir);

// Content hash over manifest + image bytes, recorded in run manifests.
std::string dataset_hash(const std::string& dir);

}  // namespace cicam
