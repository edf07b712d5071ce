#include "muhdi/nn.hpp"

#include <algorithm>
#include <cmath>

#include "muhdi/errors.hpp"
#include "muhdi/kernels.hpp"

namespace muhdi {

Conv2d::Conv2d(std::string name, int64_t cin, int64_t cout, int64_t k, int64_t stride,
               int64_t pad)
    : cin_(cin), cout_(cout), k_(k), stride_(stride), pad_(pad) {
  w_.name = name + ".w";
  w_.value = Tensor::zeros({k, k, cin, cout});
  w_.grad = Tensor::zeros({k, k, cin, cout});
  b_.name = name + ".b";
  b_.value = Tensor::zeros({cout});
  b_.grad = Tensor::zeros({cout});
}

void Conv2d::init_he(Rng& rng) {
  double std_dev = std::sqrt(2.0 / static_cast<double>(k_ * k_ * cin_));
  for (auto& v : w_.value.v) v = std_dev * rng.gauss();
  w_.grad.zero();
  b_.value.zero();
  b_.grad.zero();
}

void Conv2d::init_zero() {
  w_.value.zero();
  w_.grad.zero();
  b_.value.zero();
  b_.grad.zero();
}

Tensor Conv2d::forward(const Tensor& x) const {
  if (x.shape.size() != 3 || x.dim(2) != cin_)
    throw ContractError("conv input shape mismatch for " + w_.name);
  int64_t oh = out_dim(x.dim(0)), ow = out_dim(x.dim(1));
  Tensor out({oh, ow, cout_});
  kern::ops().conv2d_fwd(x.data(), x.dim(0), x.dim(1), cin_, w_.value.data(), k_, k_,
                         cout_, b_.value.data(), stride_, pad_, out.data(), oh, ow);
  return out;
}

void Conv2d::backward(const Tensor& x, const Tensor& dout, Tensor* dx) {
  if (!w_.trainable())
    throw ContractError("backward through a frozen layer: " + w_.name);
  kern::ops().conv2d_bwd_params(x.data(), x.dim(0), x.dim(1), cin_, dout.data(),
                                dout.dim(0), dout.dim(1), cout_, k_, k_, stride_, pad_,
                                w_.grad.data(), b_.grad.data());
  if (dx)
    kern::ops().conv2d_bwd_input(dout.data(), dout.dim(0), dout.dim(1), cout_,
                                 w_.value.data(), k_, k_, cin_, stride_, pad_, dx->data(),
                                 dx->dim(0), dx->dim(1));
}

void Conv2d::backward_input_only(const Tensor& dout, int64_t h, int64_t w,
                                 Tensor& dx) const {
  kern::ops().conv2d_bwd_input(dout.data(), dout.dim(0), dout.dim(1), cout_,
                               w_.value.data(), k_, k_, cin_, stride_, pad_, dx.data(), h,
                               w);
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape);
  kern::ops().relu_fwd(x.numel(), x.data(), out.data());
  return out;
}

void relu_backward(const Tensor& x, const Tensor& dout, Tensor& dx) {
  kern::ops().relu_bwd(x.numel(), x.data(), dout.data(), dx.data());
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor out(x.shape);
  kern::ops().leaky_relu_fwd(x.numel(), slope, x.data(), out.data());
  return out;
}

void leaky_relu_backward(const Tensor& x, const Tensor& dout, double slope, Tensor& dx) {
  kern::ops().leaky_relu_bwd(x.numel(), slope, x.data(), dout.data(), dx.data());
}

Tensor softmax_hw(const Tensor& logits) {
  if (logits.shape.size() != 3) throw ContractError("softmax expects [H,W,C]");
  const int64_t hw = logits.dim(0) * logits.dim(1), c = logits.dim(2);
  Tensor prob(logits.shape);
  std::vector<double> shifted(logits.numel());
  for (int64_t i = 0; i < hw; ++i) {
    const double* row = logits.data() + i * c;
    double m = row[0];
    for (int64_t k = 1; k < c; ++k) m = std::max(m, row[k]);
    for (int64_t k = 0; k < c; ++k) shifted[i * c + k] = row[k] - m;
  }
  kern::ops().vexp(logits.numel(), shifted.data(), prob.data());
  for (int64_t i = 0; i < hw; ++i) {
    double* row = prob.data() + i * c;
    double s = 0.0;
    for (int64_t k = 0; k < c; ++k) s += row[k];
    double inv = 1.0 / s;
    for (int64_t k = 0; k < c; ++k) row[k] *= inv;
  }
  return prob;
}

void softmax_backward(const Tensor& prob, const Tensor& dprob, Tensor& dlogits) {
  const int64_t hw = prob.dim(0) * prob.dim(1), c = prob.dim(2);
  for (int64_t i = 0; i < hw; ++i) {
    const double* p = prob.data() + i * c;
    const double* dp = dprob.data() + i * c;
    double inner = 0.0;
    for (int64_t k = 0; k < c; ++k) inner += dp[k] * p[k];
    double* dl = dlogits.data() + i * c;
    for (int64_t k = 0; k < c; ++k) dl[k] += p[k] * (dp[k] - inner);
  }
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape);
  const int64_t n = x.numel();
  std::vector<double> neg(n);
  for (int64_t i = 0; i < n; ++i) neg[i] = -x.v[i];
  kern::ops().vexp(n, neg.data(), out.data());
  for (int64_t i = 0; i < n; ++i) out.v[i] = 1.0 / (1.0 + out.v[i]);
  return out;
}

void sigmoid_backward(const Tensor& y, const Tensor& dy, Tensor& dx) {
  const int64_t n = y.numel();
  for (int64_t i = 0; i < n; ++i) dx.v[i] += dy.v[i] * y.v[i] * (1.0 - y.v[i]);
}

namespace {

struct Lerp {
  std::vector<int64_t> lo, hi;
  std::vector<double> t;
};

Lerp lerp_axis(int64_t out_n, int64_t in_n, int64_t factor) {
  Lerp l;
  l.lo.resize(out_n);
  l.hi.resize(out_n);
  l.t.resize(out_n);
  for (int64_t o = 0; o < out_n; ++o) {
    double src = (static_cast<double>(o) + 0.5) / static_cast<double>(factor) - 0.5;
    double fl = std::floor(src);
    int64_t i0 = static_cast<int64_t>(fl);
    double tt = src - fl;
    l.lo[o] = std::clamp<int64_t>(i0, 0, in_n - 1);
    l.hi[o] = std::clamp<int64_t>(i0 + 1, 0, in_n - 1);
    l.t[o] = tt;
  }
  return l;
}

}  // namespace

Tensor upsample_bilinear(const Tensor& x, int64_t factor) {
  const int64_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const int64_t oh = h * factor, ow = w * factor;
  Tensor out({oh, ow, c});
  Lerp ly = lerp_axis(oh, h, factor), lx = lerp_axis(ow, w, factor);
  for (int64_t oy = 0; oy < oh; ++oy) {
    double ty = ly.t[oy];
    const double* r0 = x.data() + ly.lo[oy] * w * c;
    const double* r1 = x.data() + ly.hi[oy] * w * c;
    double* orow = out.data() + oy * ow * c;
    for (int64_t ox = 0; ox < ow; ++ox) {
      double tx = lx.t[ox];
      const double* p00 = r0 + lx.lo[ox] * c;
      const double* p01 = r0 + lx.hi[ox] * c;
      const double* p10 = r1 + lx.lo[ox] * c;
      const double* p11 = r1 + lx.hi[ox] * c;
      double w00 = (1.0 - ty) * (1.0 - tx), w01 = (1.0 - ty) * tx;
      double w10 = ty * (1.0 - tx), w11 = ty * tx;
      double* o = orow + ox * c;
      for (int64_t k = 0; k < c; ++k)
        o[k] = w00 * p00[k] + w01 * p01[k] + w10 * p10[k] + w11 * p11[k];
    }
  }
  return out;
}

void upsample_bilinear_backward(const Tensor& dout, int64_t factor, Tensor& dx) {
  const int64_t oh = dout.dim(0), ow = dout.dim(1), c = dout.dim(2);
  const int64_t h = dx.dim(0), w = dx.dim(1);
  Lerp ly = lerp_axis(oh, h, factor), lx = lerp_axis(ow, w, factor);
  for (int64_t oy = 0; oy < oh; ++oy) {
    double ty = ly.t[oy];
    double* r0 = dx.data() + ly.lo[oy] * w * c;
    double* r1 = dx.data() + ly.hi[oy] * w * c;
    const double* drow = dout.data() + oy * ow * c;
    for (int64_t ox = 0; ox < ow; ++ox) {
      double tx = lx.t[ox];
      double* p00 = r0 + lx.lo[ox] * c;
      double* p01 = r0 + lx.hi[ox] * c;
      double* p10 = r1 + lx.lo[ox] * c;
      double* p11 = r1 + lx.hi[ox] * c;
      double w00 = (1.0 - ty) * (1.0 - tx), w01 = (1.0 - ty) * tx;
      double w10 = ty * (1.0 - tx), w11 = ty * tx;
      const double* d = drow + ox * c;
      for (int64_t k = 0; k < c; ++k) {
        p00[k] += w00 * d[k];
        p01[k] += w01 * d[k];
        p10[k] += w10 * d[k];
        p11[k] += w11 * d[k];
      }
    }
  }
}

Tensor hwc_to_chw(const Tensor& x) {
  const int64_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor out({c, h, w});
  for (int64_t y = 0; y < h; ++y)
    for (int64_t xx = 0; xx < w; ++xx)
      for (int64_t k = 0; k < c; ++k) out.at(k, y, xx) = x.at(y, xx, k);
  return out;
}

Tensor chw_to_hwc(const Tensor& x) {
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({h, w, c});
  for (int64_t k = 0; k < c; ++k)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xx = 0; xx < w; ++xx) out.at(y, xx, k) = x.at(k, y, xx);
  return out;
}

void add_chw_to_hwc(const Tensor& dchw, Tensor& dhwc) {
  const int64_t c = dchw.dim(0), h = dchw.dim(1), w = dchw.dim(2);
  for (int64_t k = 0; k < c; ++k)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xx = 0; xx < w; ++xx) dhwc.at(y, xx, k) += dchw.at(k, y, xx);
}

}  // namespace muhdi
