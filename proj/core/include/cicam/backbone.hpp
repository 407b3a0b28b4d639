#pragma once

#include <optional>
#include <vector>

#include "cicam/nonlocal.hpp"
#include "cicam/params.hpp"
#include "cicam/rng.hpp"
#include "cicam/tensor.hpp"

namespace cicam {

// Small fully convolutional extractor: per stage, `convs_per_stage` 3x3
// conv+ReLU layers followed by a stride-2 max pool, with optional non-local
// blocks after selected stages. Stage indices are 1-based.
struct BackboneConfig {
  std::vector<int> stage_channels{32, 64, 128};
  int convs_per_stage = 2;
  std::vector<int> nonlocal_after_stage{1, 2};
  int embed_ratio = 2;

  void validate() const;
  int total_stride() const { return 1 << static_cast<int>(stage_channels.size()); }
};

class Backbone {
 public:
  Backbone(ParamStore& store, const BackboneConfig& config, int in_channels = 3);

  void init(Rng& rng);

  struct Cache {
    // Per conv layer (flattened across stages): post-ReLU output.
    std::vector<Tensor> conv_out;
    // Per stage: pooled output, pool argmax, optional non-local output + cache.
    std::vector<Tensor> pool_out;
    std::vector<std::vector<int>> pool_argmax;
    std::vector<Tensor> nl_out;
    std::vector<NonLocalBlock::Cache> nl_cache;
  };

  // image is [in_channels, H, W] with H == W divisible by the total stride.
  FeatureMaps forward(const Tensor& image, Cache* cache) const;

  // Accumulates parameter gradients; dfeat is the gradient at the output.
  void backward(const Tensor& image, const Cache& cache, const Tensor& dfeat);

  int out_channels() const { return config_.stage_channels.back(); }
  const BackboneConfig& config() const { return config_; }

 private:
  bool has_nonlocal(int stage) const;  // 0-based stage

  BackboneConfig config_;
  int in_channels_;
  struct ConvLayer {
    Param* w;
    Param* b;
    int cin, cout;
  };
  std::vector<std::vector<ConvLayer>> stages_;
  std::vector<std::optional<NonLocalBlock>> nonlocal_;  // per stage
};

}  // namespace cicam
