#pragma once

#include <cstdint>
#include <string>

namespace muhdi::kern {

// Hot numeric inner loops. Each entry has a scalar reference implementation
// and, when the build and CPU allow it, an AVX2+FMA variant. The backend is
// chosen once at startup: env var MUHDI_KERNELS=scalar|avx2|auto (default
// auto = fastest supported). Variants are equivalence-tested against the
// scalar reference.
struct Ops {
  const char* name;

  // y[i] += a * x[i]
  void (*axpy)(int64_t n, double a, const double* x, double* y);
  // x[i] *= a
  void (*scale)(int64_t n, double a, double* x);
  double (*dot)(int64_t n, const double* x, const double* y);
  double (*sum)(int64_t n, const double* x);
  // out[i] = exp(x[i]); finite double domain, overflow saturates to +inf.
  void (*vexp)(int64_t n, const double* x, double* out);
  // out[i] = log(x[i]); domain x > 0 (callers clamp first).
  void (*vlog)(int64_t n, const double* x, double* out);

  void (*relu_fwd)(int64_t n, const double* x, double* out);
  // dx[i] += dy[i] * (x[i] > 0)
  void (*relu_bwd)(int64_t n, const double* x, const double* dy, double* dx);
  void (*leaky_relu_fwd)(int64_t n, double slope, const double* x, double* out);
  void (*leaky_relu_bwd)(int64_t n, double slope, const double* x, const double* dy, double* dx);

  // NHWC conv2d. in: [H,W,Cin], w: [KH,KW,Cin,Cout], bias: [Cout] or null,
  // out: [OH,OW,Cout] with OH = (H + 2*pad - KH)/stride + 1.
  void (*conv2d_fwd)(const double* in, int64_t H, int64_t W, int64_t Cin,
                     const double* w, int64_t KH, int64_t KW, int64_t Cout,
                     const double* bias, int64_t stride, int64_t pad,
                     double* out, int64_t OH, int64_t OW);
  // din += conv backward w.r.t. input
  void (*conv2d_bwd_input)(const double* dout, int64_t OH, int64_t OW, int64_t Cout,
                           const double* w, int64_t KH, int64_t KW, int64_t Cin,
                           int64_t stride, int64_t pad,
                           double* din, int64_t H, int64_t W);
  // dw += grad w.r.t. weights, dbias += grad w.r.t. bias (dbias may be null)
  void (*conv2d_bwd_params)(const double* in, int64_t H, int64_t W, int64_t Cin,
                            const double* dout, int64_t OH, int64_t OW, int64_t Cout,
                            int64_t KH, int64_t KW, int64_t stride, int64_t pad,
                            double* dw, double* dbias);

  // SGD with momentum: v = mom*v + g + wd*p; p -= lr*v
  void (*sgd_momentum)(int64_t n, double lr, double mom, double wd,
                       double* p, const double* g, double* vel);
  // Adam: m,v updated in place; bc1 = 1-b1^t, bc2 = 1-b2^t precomputed.
  void (*adam)(int64_t n, double lr, double b1, double b2, double eps,
               double bc1, double bc2, double* p, const double* g,
               double* m, double* v);
};

const Ops& scalar_ops();
// Null when the binary was built without AVX2 support or the CPU lacks it.
const Ops* avx2_ops();

// Active backend (resolved once from MUHDI_KERNELS, then cached).
const Ops& ops();
// Test hook: force a backend by name ("scalar", "avx2", "auto"). Throws
// ValidationError for unknown names or unavailable backends.
void force_backend(const std::string& name);

}  // namespace muhdi::kern
