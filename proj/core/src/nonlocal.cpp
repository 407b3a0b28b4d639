#include "cicam/nonlocal.hpp"

#include <cmath>
#include <vector>

#include "cicam/layers.hpp"

namespace cicam {

NonLocalBlock::NonLocalBlock(ParamStore& store, const std::string& prefix,
                             int channels, int embed_ratio)
    : channels_(channels), embed_(std::max(1, channels / embed_ratio)) {
  theta_w_ = &store.add(prefix + "/theta/w", {embed_, channels_});
  theta_b_ = &store.add(prefix + "/theta/b", {embed_});
  phi_w_ = &store.add(prefix + "/phi/w", {embed_, channels_});
  phi_b_ = &store.add(prefix + "/phi/b", {embed_});
  g_w_ = &store.add(prefix + "/g/w", {embed_, channels_});
  g_b_ = &store.add(prefix + "/g/b", {embed_});
  z_w_ = &store.add(prefix + "/z/w", {channels_, embed_});
  z_b_ = &store.add(prefix + "/z/b", {channels_});
  gamma_ = &store.add(prefix + "/affine/gamma", {channels_});
  beta_ = &store.add(prefix + "/affine/beta", {channels_});
}

void NonLocalBlock::init(Rng& rng) {
  auto he = [&rng](Tensor& t, int fan_in) {
    std::normal_distribution<double> d(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : t.v) v = d(rng);
  };
  he(theta_w_->value, channels_);
  he(phi_w_->value, channels_);
  he(g_w_->value, channels_);
  he(z_w_->value, embed_);
  // biases and the affine (gamma, beta) stay zero: identity at init.
}

void NonLocalBlock::forward(const double* x, int h, int w, double* y,
                            Cache* cache) const {
  const int N = h * w;
  const int ce = embed_;
  const int c = channels_;

  Cache local;
  Cache& cc = cache ? *cache : local;
  cc.theta = Tensor({ce, N});
  cc.phi = Tensor({ce, N});
  cc.g = Tensor({ce, N});
  cc.attn = Tensor({N, N});
  cc.o = Tensor({ce, N});
  cc.u = Tensor({c, N});

  conv1x1_forward(x, c, h, w, theta_w_->value.data(), theta_b_->value.data(), ce,
                  cc.theta.data());
  conv1x1_forward(x, c, h, w, phi_w_->value.data(), phi_b_->value.data(), ce,
                  cc.phi.data());
  conv1x1_forward(x, c, h, w, g_w_->value.data(), g_b_->value.data(), ce,
                  cc.g.data());

  // attn[p][q] = softmax_q(theta_p . phi_q)
  std::vector<double> row(static_cast<std::size_t>(N));
  for (int p = 0; p < N; ++p) {
    double mx = -1e300;
    for (int q = 0; q < N; ++q) {
      double dot = 0.0;
      for (int e = 0; e < ce; ++e)
        dot += cc.theta.v[static_cast<std::size_t>(e) * N + p] *
               cc.phi.v[static_cast<std::size_t>(e) * N + q];
      row[static_cast<std::size_t>(q)] = dot;
      if (dot > mx) mx = dot;
    }
    double sum = 0.0;
    for (int q = 0; q < N; ++q) {
      double ev = std::exp(row[static_cast<std::size_t>(q)] - mx);
      row[static_cast<std::size_t>(q)] = ev;
      sum += ev;
    }
    double* ar = cc.attn.data() + static_cast<std::size_t>(p) * N;
    for (int q = 0; q < N; ++q) ar[q] = row[static_cast<std::size_t>(q)] / sum;
  }

  // o[e][p] = sum_q attn[p][q] * g[e][q]
  cc.o.zero();
  for (int p = 0; p < N; ++p) {
    const double* ar = cc.attn.data() + static_cast<std::size_t>(p) * N;
    for (int e = 0; e < ce; ++e) {
      const double* ge = cc.g.data() + static_cast<std::size_t>(e) * N;
      double acc = 0.0;
      for (int q = 0; q < N; ++q) acc += ar[q] * ge[q];
      cc.o.v[static_cast<std::size_t>(e) * N + p] = acc;
    }
  }

  conv1x1_forward(cc.o.data(), ce, h, w, z_w_->value.data(), z_b_->value.data(), c,
                  cc.u.data());

  for (int k = 0; k < c; ++k) {
    double ga = gamma_->value.at(k), be = beta_->value.at(k);
    const double* xp = x + static_cast<std::size_t>(k) * N;
    const double* up = cc.u.data() + static_cast<std::size_t>(k) * N;
    double* yp = y + static_cast<std::size_t>(k) * N;
    for (int p = 0; p < N; ++p) yp[p] = xp[p] + ga * up[p] + be;
  }
}

void NonLocalBlock::backward(const double* x, int h, int w, const Cache& cc,
                             const double* dy, double* dx) {
  const int N = h * w;
  const int ce = embed_;
  const int c = channels_;

  // Affine head: y = x + gamma*u + beta.
  Tensor du({c, N});
  for (int k = 0; k < c; ++k) {
    double ga = gamma_->value.at(k);
    const double* dyp = dy + static_cast<std::size_t>(k) * N;
    const double* up = cc.u.data() + static_cast<std::size_t>(k) * N;
    double* dxp = dx + static_cast<std::size_t>(k) * N;
    double dg = 0.0, db = 0.0;
    double* dup = du.data() + static_cast<std::size_t>(k) * N;
    for (int p = 0; p < N; ++p) {
      dg += dyp[p] * up[p];
      db += dyp[p];
      dup[p] = ga * dyp[p];
      dxp[p] += dyp[p];  // residual path
    }
    gamma_->grad.at(k) += dg;
    beta_->grad.at(k) += db;
  }

  // z projection: u = z_w o + z_b.
  Tensor dO({ce, N});
  conv1x1_backward(cc.o.data(), z_w_->value.data(), ce, c, h, w, du.data(),
                   dO.data(), z_w_->grad.data(), z_b_->grad.data());

  // o[e][p] = sum_q attn[p][q] g[e][q]
  Tensor dAttn({N, N});
  Tensor dG({ce, N});
  for (int p = 0; p < N; ++p) {
    double* dar = dAttn.data() + static_cast<std::size_t>(p) * N;
    const double* ar = cc.attn.data() + static_cast<std::size_t>(p) * N;
    for (int e = 0; e < ce; ++e) {
      double dop = dO.v[static_cast<std::size_t>(e) * N + p];
      if (dop == 0.0) continue;
      const double* ge = cc.g.data() + static_cast<std::size_t>(e) * N;
      double* dge = dG.data() + static_cast<std::size_t>(e) * N;
      for (int q = 0; q < N; ++q) {
        dar[q] += dop * ge[q];
        dge[q] += dop * ar[q];
      }
    }
  }

  // Row-wise softmax backward into similarity logits.
  Tensor dTheta({ce, N});
  Tensor dPhi({ce, N});
  std::vector<double> dlog(static_cast<std::size_t>(N));
  for (int p = 0; p < N; ++p) {
    const double* ar = cc.attn.data() + static_cast<std::size_t>(p) * N;
    const double* dar = dAttn.data() + static_cast<std::size_t>(p) * N;
    double inner = 0.0;
    for (int q = 0; q < N; ++q) inner += ar[q] * dar[q];
    for (int q = 0; q < N; ++q) dlog[static_cast<std::size_t>(q)] = ar[q] * (dar[q] - inner);
    for (int e = 0; e < ce; ++e) {
      const double* pe = cc.phi.data() + static_cast<std::size_t>(e) * N;
      double th = cc.theta.v[static_cast<std::size_t>(e) * N + p];
      double* dpe = dPhi.data() + static_cast<std::size_t>(e) * N;
      double acc = 0.0;
      for (int q = 0; q < N; ++q) {
        acc += dlog[static_cast<std::size_t>(q)] * pe[q];
        dpe[q] += dlog[static_cast<std::size_t>(q)] * th;
      }
      dTheta.v[static_cast<std::size_t>(e) * N + p] += acc;
    }
  }

  conv1x1_backward(x, theta_w_->value.data(), c, ce, h, w, dTheta.data(), dx,
                   theta_w_->grad.data(), theta_b_->grad.data());
  conv1x1_backward(x, phi_w_->value.data(), c, ce, h, w, dPhi.data(), dx,
                   phi_w_->grad.data(), phi_b_->grad.data());
  conv1x1_backward(x, g_w_->value.data(), c, ce, h, w, dG.data(), dx,
                   g_w_->grad.data(), g_b_->grad.data());
}

}  // namespace cicam
