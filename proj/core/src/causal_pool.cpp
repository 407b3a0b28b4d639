#include "cicam/causal_pool.hpp"

#include <cmath>

#include "cicam/errors.hpp"

namespace cicam {

Tensor standardize(const Tensor& map_in, double eps) {
  const std::size_t n = map_in.numel();
  double mean = 0.0;
  for (double v : map_in.v) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : map_in.v) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  double inv = 1.0 / std::sqrt(var + eps);

  Tensor out = map_in;
  for (double& v : out.v) v = (v - mean) * inv;
  return out;
}

void update_pool(ContextPool& pool, const ActivationMaps& m, int pi) {
  if (pi < 0 || pi >= pool.num_classes())
    throw ValidationError("update_pool: class index out of range");
  if (m.num_classes() != pool.num_classes() || m.height() != pool.height() ||
      m.width() != pool.width())
    throw ValidationError("update_pool: shape mismatch");

  const int h = pool.height(), w = pool.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  Tensor m_pi({h, w});
  std::copy(m.t.data() + pi * plane, m.t.data() + (pi + 1) * plane, m_pi.data());
  Tensor m_std = standardize(m_pi, pool.eps);

  double* qp = pool.q.data() + pi * plane;
  Tensor mixed({h, w});
  for (std::size_t i = 0; i < plane; ++i)
    mixed.v[i] = qp[i] + pool.lambda * m_std.v[i];
  Tensor q_new = standardize(mixed, pool.eps);
  std::copy(q_new.v.begin(), q_new.v.end(), qp);
}

Tensor pool_class_mean(const ContextPool& pool) {
  const int h = pool.height(), w = pool.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out({h, w});
  for (int i = 0; i < pool.num_classes(); ++i) {
    const double* qp = pool.slot(i);
    for (std::size_t p = 0; p < plane; ++p) out.v[p] += qp[p];
  }
  double inv = 1.0 / pool.num_classes();
  for (double& v : out.v) v *= inv;
  return out;
}

FeatureMaps enhance_features(const FeatureMaps& x, const Tensor& q_pi,
                             const Tensor& w, const Tensor& b) {
  const int c = x.channels(), h = x.height(), wd = x.width();
  if (q_pi.dim(0) != h || q_pi.dim(1) != wd)
    throw ValidationError("enhance_features: spatial size mismatch");
  const bool per_channel = w.dim(0) > 1;
  if (per_channel && (w.dim(0) != c || b.dim(0) != c))
    throw ValidationError("enhance_features: per-channel param size mismatch");

  const std::size_t plane = static_cast<std::size_t>(h) * wd;
  FeatureMaps out;
  out.t = Tensor({c, h, wd});
  for (int k = 0; k < c; ++k) {
    double wk = per_channel ? w.at(k) : w.at(0);
    double bk = per_channel ? b.at(k) : b.at(0);
    const double* xp = x.t.data() + k * plane;
    double* yp = out.t.data() + k * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      double a = wk * q_pi.v[p] + bk;
      yp[p] = xp[p] * (1.0 + a);
    }
  }
  return out;
}

}  // namespace cicam
