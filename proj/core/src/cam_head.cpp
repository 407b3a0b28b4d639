#include "cicam/cam_head.hpp"

#include <cmath>

#include "cicam/errors.hpp"

namespace cicam {

ClassScores classify(const FeatureMaps& x, const Tensor& w, const Tensor& b) {
  const int c = x.channels();
  const int n = w.dim(0);
  if (w.dim(1) != c || b.dim(0) != n)
    throw ValidationError("classify: dimension mismatch");

  const std::size_t plane = static_cast<std::size_t>(x.height()) * x.width();
  Tensor gap({c});
  for (int k = 0; k < c; ++k) {
    const double* xp = x.t.data() + k * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += xp[i];
    gap.at(k) = acc / static_cast<double>(plane);
  }

  ClassScores s;
  s.logits = Tensor({n});
  s.probs = Tensor({n});
  for (int i = 0; i < n; ++i) {
    double acc = b.at(i);
    for (int k = 0; k < c; ++k) acc += w.at(i, k) * gap.at(k);
    s.logits.at(i) = acc;
  }
  double mx = s.logits.at(0);
  for (int i = 1; i < n; ++i) mx = std::max(mx, s.logits.at(i));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    s.probs.at(i) = std::exp(s.logits.at(i) - mx);
    sum += s.probs.at(i);
  }
  for (int i = 0; i < n; ++i) s.probs.at(i) /= sum;
  return s;
}

ActivationMaps compute_cams(const FeatureMaps& x, const Tensor& w) {
  const int c = x.channels();
  const int n = w.dim(0);
  if (w.dim(1) != c) throw ValidationError("compute_cams: dimension mismatch");

  const std::size_t plane = static_cast<std::size_t>(x.height()) * x.width();
  ActivationMaps m;
  m.t = Tensor({n, x.height(), x.width()});
  for (int i = 0; i < n; ++i) {
    double* mp = m.t.data() + i * plane;
    for (int k = 0; k < c; ++k) {
      double wv = w.at(i, k);
      const double* xp = x.t.data() + k * plane;
      for (std::size_t p = 0; p < plane; ++p) mp[p] += wv * xp[p];
    }
  }
  return m;
}

int top_class(const ClassScores& scores) {
  int best = 0;
  for (int i = 1; i < scores.num_classes(); ++i)
    if (scores.probs.at(i) > scores.probs.at(best)) best = i;
  return best;
}

}  // namespace cicam
