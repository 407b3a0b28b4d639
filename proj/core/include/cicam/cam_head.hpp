#pragma once

#include "cicam/tensor.hpp"

namespace cicam {

// Logits and softmax probabilities for n classes.
struct ClassScores {
  Tensor logits;  // [n]
  Tensor probs;   // [n]
  int num_classes() const { return logits.dim(0); }
};

// GAP + fully connected classifier: logits_i = W_i . mean_hw(X) + b_i.
// W is [n, c], b is [n]. Both CAM branches call these with the same storage.
ClassScores classify(const FeatureMaps& x, const Tensor& w, const Tensor& b);

// Class activation maps: maps[i] = sum_k W[i][k] * X[k]. Bias excluded.
ActivationMaps compute_cams(const FeatureMaps& x, const Tensor& w);

// Argmax over probabilities; ties break to the lowest index.
int top_class(const ClassScores& scores);

}  // namespace cicam
