#pragma once

#include "cicam/params.hpp"
#include "cicam/rng.hpp"
#include "cicam/tensor.hpp"

namespace cicam {

// Embedded dot-product spatial self-attention with a residual connection:
//   y = x + Z(Wz * attend(theta(x), phi(x), g(x)))
// where theta/phi/g are 1x1 convs reducing channels by `embed_ratio`, attend
// softmax-normalizes pairwise position similarities, and Z is a per-channel
// affine whose scale and shift start at zero, so the block is the identity at
// initialization.
class NonLocalBlock {
 public:
  NonLocalBlock(ParamStore& store, const std::string& prefix, int channels,
                int embed_ratio);

  void init(Rng& rng);

  struct Cache {
    Tensor theta, phi, g;  // [ce, N]
    Tensor attn;           // [N, N], rows sum to 1
    Tensor o;              // [ce, N]
    Tensor u;              // [c, N]
  };

  // x and y are [c, h, w]; cache may be null for inference-only calls.
  void forward(const double* x, int h, int w, double* y, Cache* cache) const;

  // Accumulates parameter gradients and adds the input gradient into dx.
  void backward(const double* x, int h, int w, const Cache& cache, const double* dy,
                double* dx);

  int channels() const { return channels_; }
  int embed_channels() const { return embed_; }

 private:
  int channels_;
  int embed_;
  Param *theta_w_, *theta_b_, *phi_w_, *phi_b_, *g_w_, *g_b_, *z_w_, *z_b_;
  Param *gamma_, *beta_;  // zero-initialized affine
};

}  // namespace cicam
