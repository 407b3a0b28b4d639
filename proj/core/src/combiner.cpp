#include "cicam/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cicam/errors.hpp"

namespace cicam {

GammaKind parse_gamma_kind(const std::string& name) {
  if (name == "top1") return GammaKind::top1;
  if (name == "linear-decay") return GammaKind::linear_decay;
  if (name == "nlccam-bipolar") return GammaKind::nlccam_bipolar;
  throw ValidationError("unknown gamma kind: " + name);
}

std::string gamma_kind_name(GammaKind kind) {
  switch (kind) {
    case GammaKind::top1:
      return "top1";
    case GammaKind::linear_decay:
      return "linear-decay";
    default:
      return "nlccam-bipolar";
  }
}

std::vector<double> gamma_weights(const CombinerConfig& config, int n) {
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  switch (config.kind) {
    case GammaKind::top1:
      g[0] = 1.0;
      break;
    case GammaKind::linear_decay:
      for (int k = 1; k <= n; ++k)
        g[static_cast<std::size_t>(k - 1)] = 1.0 - static_cast<double>(k - 1) / n;
      break;
    case GammaKind::nlccam_bipolar: {
      int top = std::min(n, static_cast<int>(std::ceil(n * config.p)));
      int bottom = std::min(n - top, static_cast<int>(std::ceil(n * config.q)));
      for (int k = 0; k < top; ++k) g[static_cast<std::size_t>(k)] = 1.0;
      if (bottom > 0) {
        double wv = -config.scale / static_cast<double>(n - top);
        for (int k = n - bottom; k < n; ++k) g[static_cast<std::size_t>(k)] = wv;
      }
      break;
    }
  }
  return g;
}

std::vector<int> rank_maps(const ActivationMaps& m, const ClassScores& scores) {
  const int n = scores.num_classes();
  if (m.num_classes() != n) throw ValidationError("rank_maps: class count mismatch");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&scores](int a, int b) {
    return scores.probs.at(a) > scores.probs.at(b);
  });
  return order;
}

LocalizationMap combine(const ActivationMaps& m, const std::vector<int>& order,
                        const CombinerConfig& config) {
  const int n = m.num_classes();
  if (static_cast<int>(order.size()) != n)
    throw ValidationError("combine: ranked list incomplete");
  const std::vector<double> g = gamma_weights(config, n);
  const std::size_t plane = static_cast<std::size_t>(m.height()) * m.width();

  LocalizationMap out;
  out.h = Tensor({m.height(), m.width()});
  for (int k = 0; k < n; ++k) {
    double wv = g[static_cast<std::size_t>(k)];
    if (wv == 0.0) continue;
    const double* mp = m.t.data() + static_cast<std::size_t>(order[static_cast<std::size_t>(k)]) * plane;
    for (std::size_t p = 0; p < plane; ++p) out.h.v[p] += wv * mp[p];
  }
  return out;
}

}  // namespace cicam
