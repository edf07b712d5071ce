// Scalar reference kernels. This translation unit is compiled with
// -ffp-contract=off so results are plain IEEE double operations in program
// order; the SIMD variants are tested against these.

#include <cmath>
#include <cstdint>

#include "muhdi/kernels.hpp"

namespace muhdi::kern {
namespace {

void s_axpy(int64_t n, double a, const double* x, double* y) {
  for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale(int64_t n, double a, double* x) {
  for (int64_t i = 0; i < n; ++i) x[i] *= a;
}

double s_dot(int64_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double s_sum(int64_t n, const double* x) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void s_vexp(int64_t n, const double* x, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void s_vlog(int64_t n, const double* x, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

void s_relu_fwd(int64_t n, const double* x, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void s_relu_bwd(int64_t n, const double* x, const double* dy, double* dx) {
  for (int64_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void s_leaky_relu_fwd(int64_t n, double slope, const double* x, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void s_leaky_relu_bwd(int64_t n, double slope, const double* x, const double* dy,
                      double* dx) {
  for (int64_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0 ? dy[i] : slope * dy[i];
}

void s_conv2d_fwd(const double* in, int64_t H, int64_t W, int64_t Cin,
                  const double* w, int64_t KH, int64_t KW, int64_t Cout,
                  const double* bias, int64_t stride, int64_t pad,
                  double* out, int64_t OH, int64_t OW) {
  for (int64_t oy = 0; oy < OH; ++oy) {
    for (int64_t ox = 0; ox < OW; ++ox) {
      double* o = out + (oy * OW + ox) * Cout;
      for (int64_t co = 0; co < Cout; ++co) o[co] = bias ? bias[co] : 0.0;
      for (int64_t ky = 0; ky < KH; ++ky) {
        int64_t iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= H) continue;
        for (int64_t kx = 0; kx < KW; ++kx) {
          int64_t ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= W) continue;
          const double* irow = in + (iy * W + ix) * Cin;
          const double* wrow = w + ((ky * KW + kx) * Cin) * Cout;
          for (int64_t ci = 0; ci < Cin; ++ci) {
            double a = irow[ci];
            const double* wr = wrow + ci * Cout;
            for (int64_t co = 0; co < Cout; ++co) o[co] += a * wr[co];
          }
        }
      }
    }
  }
}

void s_conv2d_bwd_input(const double* dout, int64_t OH, int64_t OW, int64_t Cout,
                        const double* w, int64_t KH, int64_t KW, int64_t Cin,
                        int64_t stride, int64_t pad,
                        double* din, int64_t H, int64_t W) {
  for (int64_t oy = 0; oy < OH; ++oy) {
    for (int64_t ox = 0; ox < OW; ++ox) {
      const double* dok = dout + (oy * OW + ox) * Cout;
      for (int64_t ky = 0; ky < KH; ++ky) {
        int64_t iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= H) continue;
        for (int64_t kx = 0; kx < KW; ++kx) {
          int64_t ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= W) continue;
          double* drow = din + (iy * W + ix) * Cin;
          const double* wrow = w + ((ky * KW + kx) * Cin) * Cout;
          for (int64_t ci = 0; ci < Cin; ++ci) {
            const double* wr = wrow + ci * Cout;
            double acc = 0.0;
            for (int64_t co = 0; co < Cout; ++co) acc += dok[co] * wr[co];
            drow[ci] += acc;
          }
        }
      }
    }
  }
}

void s_conv2d_bwd_params(const double* in, int64_t H, int64_t W, int64_t Cin,
                         const double* dout, int64_t OH, int64_t OW, int64_t Cout,
                         int64_t KH, int64_t KW, int64_t stride, int64_t pad,
                         double* dw, double* dbias) {
  for (int64_t oy = 0; oy < OH; ++oy) {
    for (int64_t ox = 0; ox < OW; ++ox) {
      const double* dok = dout + (oy * OW + ox) * Cout;
      if (dbias) {
        for (int64_t co = 0; co < Cout; ++co) dbias[co] += dok[co];
      }
      for (int64_t ky = 0; ky < KH; ++ky) {
        int64_t iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= H) continue;
        for (int64_t kx = 0; kx < KW; ++kx) {
          int64_t ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= W) continue;
          const double* irow = in + (iy * W + ix) * Cin;
          double* dwrow = dw + ((ky * KW + kx) * Cin) * Cout;
          for (int64_t ci = 0; ci < Cin; ++ci) {
            double a = irow[ci];
            double* dwr = dwrow + ci * Cout;
            for (int64_t co = 0; co < Cout; ++co) dwr[co] += a * dok[co];
          }
        }
      }
    }
  }
}

void s_sgd_momentum(int64_t n, double lr, double mom, double wd,
                    double* p, const double* g, double* vel) {
  for (int64_t i = 0; i < n; ++i) {
    vel[i] = mom * vel[i] + g[i] + wd * p[i];
    p[i] -= lr * vel[i];
  }
}

void s_adam(int64_t n, double lr, double b1, double b2, double eps,
            double bc1, double bc2, double* p, const double* g,
            double* m, double* v) {
  for (int64_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      s_axpy, s_scale, s_dot, s_sum, s_vexp, s_vlog,
      s_relu_fwd, s_relu_bwd, s_leaky_relu_fwd, s_leaky_relu_bwd,
      s_conv2d_fwd, s_conv2d_bwd_input, s_conv2d_bwd_params,
      s_sgd_momentum, s_adam,
  };
  return table;
}

}  // namespace muhdi::kern
