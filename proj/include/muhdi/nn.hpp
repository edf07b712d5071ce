#pragma once

#include <string>
#include <vector>

#include "muhdi/rng.hpp"
#include "muhdi/tensor.hpp"

namespace muhdi {

// One learnable tensor with its gradient buffer. Frozen copies drop the
// gradient buffer entirely, making updates structurally impossible.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  bool trainable() const { return grad.numel() == value.numel() && value.numel() > 0; }
  void drop_grad() { grad = Tensor(); }
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int64_t cin, int64_t cout, int64_t k, int64_t stride,
         int64_t pad);

  void init_he(Rng& rng);
  void init_zero();

  int64_t out_dim(int64_t in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }

  // x: [H,W,cin] -> [OH,OW,cout]
  Tensor forward(const Tensor& x) const;
  // Accumulates parameter grads; accumulates input grad into *dx when given.
  void backward(const Tensor& x, const Tensor& dout, Tensor* dx);
  // Input gradient only; parameters untouched (trainability not required).
  void backward_input_only(const Tensor& dout, int64_t h, int64_t w, Tensor& dx) const;

  std::vector<Param*> params() { return {&w_, &b_}; }
  std::vector<const Param*> params() const { return {&w_, &b_}; }

  int64_t cin() const { return cin_; }
  int64_t cout() const { return cout_; }
  int64_t kernel() const { return k_; }
  int64_t stride() const { return stride_; }
  int64_t pad() const { return pad_; }

  Param w_, b_;

 private:
  int64_t cin_ = 0, cout_ = 0, k_ = 0, stride_ = 0, pad_ = 0;
};

Tensor relu(const Tensor& x);
void relu_backward(const Tensor& x, const Tensor& dout, Tensor& dx);
Tensor leaky_relu(const Tensor& x, double slope);
void leaky_relu_backward(const Tensor& x, const Tensor& dout, double slope, Tensor& dx);

// Per-pixel softmax over the channel dimension of [H,W,C].
Tensor softmax_hw(const Tensor& logits);
// dlogits += J_softmax^T(prob) * dprob
void softmax_backward(const Tensor& prob, const Tensor& dprob, Tensor& dlogits);

Tensor sigmoid(const Tensor& x);
// dx += dy * y * (1 - y), where y is the sigmoid output
void sigmoid_backward(const Tensor& y, const Tensor& dy, Tensor& dx);

// Bilinear upsample by an integer factor (half-pixel centers, edges clamped).
Tensor upsample_bilinear(const Tensor& x, int64_t factor);
void upsample_bilinear_backward(const Tensor& dout, int64_t factor, Tensor& dx);

// Layout converters between the internal [H,W,C] activations and the
// [C,H,W] contract layout of distillation feature stacks.
Tensor hwc_to_chw(const Tensor& x);
Tensor chw_to_hwc(const Tensor& x);
// dhwc += transpose(dchw)
void add_chw_to_hwc(const Tensor& dchw, Tensor& dhwc);

}  // namespace muhdi
