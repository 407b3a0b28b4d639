#pragma once

#include <cstdint>
#include <string>

#include "cicam/backbone.hpp"
#include "cicam/cam_head.hpp"
#include "cicam/causal_pool.hpp"
#include "cicam/params.hpp"

namespace cicam {

// Which pool content enhances the features: the predicted class slot (the
// network as stated) or the mean over all class slots (literal stratified
// aggregation, kept for comparison).
enum class Aggregate { predicted, all_classes };

struct NetworkConfig {
  BackboneConfig backbone;
  int num_classes = 5;
  int image_size = 64;
  bool enhance_per_channel = false;
  bool pool_enabled = true;  // off: X^e = X (baseline ablation)
  Aggregate aggregate = Aggregate::predicted;

  void validate() const;
  int feature_size() const;  // spatial side of the backbone output
};

// Dual-branch CAM network around the causal context pool. The two CAM heads
// share one classifier storage (cls_w/cls_b), so a single gradient buffer
// accumulates both branches.
class Network {
 public:
  Network(const NetworkConfig& config, std::uint64_t seed);

  struct Forward {
    Tensor image;  // kept for the backward pass of the first conv
    Backbone::Cache bb;
    FeatureMaps x;
    ClassScores s;
    ActivationMaps m;
    int pi = 0;
    Tensor q_ctx;  // context map used for enhancement (constant w.r.t. grads)
    FeatureMaps xe;
    ClassScores se;
    ActivationMaps me;
  };

  // Runs the full dual-branch pass. When update_pool_q is true the pool slot
  // of the branch-1 prediction is updated before enhancement (training data
  // flow); otherwise the stored pool is read as-is.
  Forward forward(const Tensor& image, bool update_pool_q);

  // Cross-entropy of both branches against `label`, scaled by `scale`;
  // accumulates parameter gradients. Returns the unscaled dual loss.
  double backward(const Forward& fwd, int label, double scale);

  // Loss without gradient accumulation (finite-difference probes).
  double loss_only(const Tensor& image, int label);

  NetworkConfig config;
  ParamStore store;
  Backbone backbone;
  Param* cls_w;  // [n, c]
  Param* cls_b;  // [n]
  Param* enh_w;  // [1] or [c]
  Param* enh_b;  // [1] or [c]
  ContextPool pool;
  std::uint64_t pool_update_count = 0;
};

}  // namespace cicam
