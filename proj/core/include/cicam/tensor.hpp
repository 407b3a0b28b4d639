#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cicam {

// Dense row-major tensor of doubles, rank 1..4.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(numel_of(shape), 0.0) {}

  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t numel() const { return v.size(); }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  double& at(int i) { return v[static_cast<std::size_t>(i)]; }
  double at(int i) const { return v[static_cast<std::size_t>(i)]; }

  double& at(int i, int j) {
    return v[static_cast<std::size_t>(i) * shape[1] + j];
  }
  double at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * shape[1] + j];
  }

  double& at(int i, int j, int k) {
    return v[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  double at(int i, int j, int k) const {
    return v[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
  }

  double& at(int i, int j, int k, int l) {
    return v[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }
  double at(int i, int j, int k, int l) const {
    return v[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }

  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// c x h x w feature maps produced by the backbone (X and X^e).
struct FeatureMaps {
  Tensor t;  // shape [c, h, w]
  int channels() const { return t.dim(0); }
  int height() const { return t.dim(1); }
  int width() const { return t.dim(2); }
};

// n x h x w per-class activation maps (M and M^e).
struct ActivationMaps {
  Tensor t;  // shape [n, h, w]
  int num_classes() const { return t.dim(0); }
  int height() const { return t.dim(1); }
  int width() const { return t.dim(2); }
};

}  // namespace cicam
