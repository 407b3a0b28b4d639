#include "cicam/network.hpp"

#include <cmath>

#include "cicam/errors.hpp"

namespace cicam {

void NetworkConfig::validate() const {
  backbone.validate();
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (image_size < backbone.total_stride())
    throw ValidationError("image_size smaller than total stride");
  if (image_size % backbone.total_stride() != 0)
    throw ValidationError("image_size not divisible by total stride");
}

int NetworkConfig::feature_size() const { return image_size / backbone.total_stride(); }

Network::Network(const NetworkConfig& cfg, std::uint64_t seed)
    : config(cfg), backbone(store, cfg.backbone) {
  config.validate();
  const int c = backbone.out_channels();
  const int n = config.num_classes;
  cls_w = &store.add("classifier/w", {n, c});
  cls_b = &store.add("classifier/b", {n});
  const int enh_dim = config.enhance_per_channel ? c : 1;
  enh_w = &store.add("enhance/w", {enh_dim});
  enh_b = &store.add("enhance/b", {enh_dim});

  Rng rng = make_rng(seed, 42);
  backbone.init(rng);
  std::normal_distribution<double> d(0.0, std::sqrt(1.0 / c));
  for (double& v : cls_w->value.v) v = d(rng);
  // cls_b, enh_w, enh_b start at zero; zero enhance params make branch 2
  // reproduce branch 1 exactly.

  const int fs = config.feature_size();
  pool = ContextPool(n, fs, fs);
}

Network::Forward Network::forward(const Tensor& image, bool update_pool_q) {
  Forward f;
  f.image = image;
  f.x = backbone.forward(image, &f.bb);
  f.s = classify(f.x, cls_w->value, cls_b->value);
  f.m = compute_cams(f.x, cls_w->value);
  f.pi = top_class(f.s);

  if (config.pool_enabled) {
    if (update_pool_q) {
      update_pool(pool, f.m, f.pi);
      ++pool_update_count;
    }
    if (config.aggregate == Aggregate::all_classes) {
      f.q_ctx = pool_class_mean(pool);
    } else {
      f.q_ctx = Tensor({pool.height(), pool.width()});
      const double* qp = pool.slot(f.pi);
      std::copy(qp, qp + f.q_ctx.numel(), f.q_ctx.data());
    }
    f.xe = enhance_features(f.x, f.q_ctx, enh_w->value, enh_b->value);
  } else {
    f.q_ctx = Tensor({pool.height(), pool.width()});
    f.xe = f.x;
  }

  f.se = classify(f.xe, cls_w->value, cls_b->value);
  f.me = compute_cams(f.xe, cls_w->value);
  return f;
}

double Network::backward(const Forward& f, int label, double scale) {
  const int n = config.num_classes;
  if (label < 0 || label >= n) throw ValidationError("backward: invalid label");
  const int c = backbone.out_channels();
  const int h = f.x.height(), w = f.x.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const double inv_plane = 1.0 / static_cast<double>(plane);

  const double loss =
      -std::log(f.s.probs.at(label)) - std::log(f.se.probs.at(label));

  // Per-branch softmax-CE gradient on logits, then through GAP + classifier.
  Tensor dlog1({n}), dlog2({n});
  for (int i = 0; i < n; ++i) {
    double onehot = i == label ? 1.0 : 0.0;
    dlog1.at(i) = (f.s.probs.at(i) - onehot) * scale;
    dlog2.at(i) = (f.se.probs.at(i) - onehot) * scale;
  }

  auto gap_of = [&](const FeatureMaps& x, int k) {
    const double* xp = x.t.data() + k * plane;
    double acc = 0.0;
    for (std::size_t p = 0; p < plane; ++p) acc += xp[p];
    return acc * inv_plane;
  };

  Tensor dx({c, h, w});   // grad w.r.t. backbone output X
  Tensor dxe({c, h, w});  // grad w.r.t. enhanced features X^e

  for (int i = 0; i < n; ++i) {
    cls_b->grad.at(i) += dlog1.at(i) + dlog2.at(i);
    for (int k = 0; k < c; ++k)
      cls_w->grad.at(i, k) += dlog1.at(i) * gap_of(f.x, k) + dlog2.at(i) * gap_of(f.xe, k);
  }
  for (int k = 0; k < c; ++k) {
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < n; ++i) {
      d1 += dlog1.at(i) * cls_w->value.at(i, k);
      d2 += dlog2.at(i) * cls_w->value.at(i, k);
    }
    double* dxp = dx.data() + k * plane;
    double* dxep = dxe.data() + k * plane;
    double g1 = d1 * inv_plane, g2 = d2 * inv_plane;
    for (std::size_t p = 0; p < plane; ++p) {
      dxp[p] += g1;
      dxep[p] += g2;
    }
  }

  if (config.pool_enabled) {
    // X^e[k] = X[k] * (1 + a), a = w*Q + b; Q constant.
    const bool per_channel = config.enhance_per_channel;
    double dw_shared = 0.0, db_shared = 0.0;
    for (int k = 0; k < c; ++k) {
      double wk = per_channel ? enh_w->value.at(k) : enh_w->value.at(0);
      double bk = per_channel ? enh_b->value.at(k) : enh_b->value.at(0);
      const double* xp = f.x.t.data() + k * plane;
      const double* dxep = dxe.data() + k * plane;
      double* dxp = dx.data() + k * plane;
      double dwk = 0.0, dbk = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        double a = wk * f.q_ctx.v[p] + bk;
        dxp[p] += dxep[p] * (1.0 + a);
        double da = dxep[p] * xp[p];
        dwk += da * f.q_ctx.v[p];
        dbk += da;
      }
      if (per_channel) {
        enh_w->grad.at(k) += dwk;
        enh_b->grad.at(k) += dbk;
      } else {
        dw_shared += dwk;
        db_shared += dbk;
      }
    }
    if (!per_channel) {
      enh_w->grad.at(0) += dw_shared;
      enh_b->grad.at(0) += db_shared;
    }
  } else {
    for (std::size_t i = 0; i < dx.numel(); ++i) dx.v[i] += dxe.v[i];
  }

  backbone.backward(f.image, f.bb, dx);
  return loss;
}

double Network::loss_only(const Tensor& image, int label) {
  Forward f = forward(image, false);
  return -std::log(f.s.probs.at(label)) - std::log(f.se.probs.at(label));
}

}  // namespace cicam
