#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "muhdi/errors.hpp"

namespace muhdi {

// Dense row-major double tensor, last dimension contiguous.
// Convention for images and activations: [H, W, C]. Conv weights: [KH, KW, Cin, Cout].
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)), v(checked_numel(shape), 0.0) {}

  static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int64_t> s, double x) {
    Tensor t(std::move(s));
    std::fill(t.v.begin(), t.v.end(), x);
    return t;
  }

  static int64_t checked_numel(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) {
      if (d < 0) throw ValidationError("tensor dimension must be non-negative");
      n *= d;
    }
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(v.size()); }
  int64_t dim(size_t i) const { return shape[i]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  double& at(int64_t i, int64_t j) { return v[i * shape[1] + j]; }
  double at(int64_t i, int64_t j) const { return v[i * shape[1] + j]; }
  double& at(int64_t i, int64_t j, int64_t k) { return v[(i * shape[1] + j) * shape[2] + k]; }
  double at(int64_t i, int64_t j, int64_t k) const { return v[(i * shape[1] + j) * shape[2] + k]; }
  double& at(int64_t a, int64_t b, int64_t c, int64_t d) {
    return v[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
  double at(int64_t a, int64_t b, int64_t c, int64_t d) const {
    return v[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace muhdi
