#pragma once

#include <string>
#include <vector>

#include "cicam/cam_head.hpp"
#include "cicam/tensor.hpp"

namespace cicam {

// Rank-indexed combination weights gamma(k), k = 1..n.
enum class GammaKind { top1, linear_decay, nlccam_bipolar };

struct CombinerConfig {
  GammaKind kind = GammaKind::nlccam_bipolar;
  // nlccam-bipolar: +1 for the top ceil(n*p) ranks, -scale/(n - ceil(n*p))
  // for the bottom ceil(n*q) ranks, 0 elsewhere.
  double p = 0.1;
  double q = 0.1;
  double scale = 1.0;
};

struct LocalizationMap {
  Tensor h;  // [h, w]
};

GammaKind parse_gamma_kind(const std::string& name);  // throws ValidationError
std::string gamma_kind_name(GammaKind kind);

// gamma(k) for k = 1..n, index 0 holding gamma(1).
std::vector<double> gamma_weights(const CombinerConfig& config, int n);

// Class ids ordered by descending probability; ties break to the lowest
// class index. order[0] is the top class.
std::vector<int> rank_maps(const ActivationMaps& m, const ClassScores& scores);

// H = sum_k gamma(k) * M[order[k-1]].
LocalizationMap combine(const ActivationMaps& m, const std::vector<int>& order,
                        const CombinerConfig& config);

}  // namespace cicam
