#pragma once

#include "cicam/tensor.hpp"

namespace cicam {

// Per-class accumulated context maps. Q is a statistics buffer: updates never
// participate in gradient propagation. Every updated slot is standardized to
// zero mean / unit variance over its h*w entries.
struct ContextPool {
  Tensor q;  // [n, h, w]
  double lambda = 0.01;
  double eps = 1e-5;

  ContextPool() = default;
  ContextPool(int n, int h, int w, double lambda_ = 0.01)
      : q({n, h, w}), lambda(lambda_) {}

  int num_classes() const { return q.dim(0); }
  int height() const { return q.dim(1); }
  int width() const { return q.dim(2); }

  // Slot of the predicted class as an h*w view.
  const double* slot(int i) const {
    return q.data() + static_cast<std::size_t>(i) * height() * width();
  }
};

// (m - mean(m)) / sqrt(var(m) + eps), population statistics over all entries.
Tensor standardize(const Tensor& map_in, double eps);

// Q_pi <- standardize(Q_pi + lambda * standardize(M_pi)). Only slot pi
// changes; pi must be the top class of the first branch.
void update_pool(ContextPool& pool, const ActivationMaps& m, int pi);

// Mean of all class slots, for the literal all-classes aggregation mode.
Tensor pool_class_mean(const ContextPool& pool);

// X^e = X + X (*) a with attention a = w*Q_pi + b broadcast over channels.
// Shared-scalar mode: w and b are [1]. Per-channel mode: w and b are [c] and
// a has one map per channel. Q_pi is treated as a constant.
FeatureMaps enhance_features(const FeatureMaps& x, const Tensor& q_pi,
                             const Tensor& w, const Tensor& b);

}  // namespace cicam
