// AVX2+FMA kernel variants. Only reached after a runtime CPU check, so the
// whole translation unit may be compiled with -mavx2 -mfma.
//
// vexp/vlog use Cephes-derived rational approximations (~1 ulp on the
// supported domain); exp flushes subnormal results to zero and saturates to
// +inf above ~709. Both properties are covered by the equivalence tests.

#ifdef MUHDI_HAVE_AVX2

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "muhdi/kernels.hpp"

namespace muhdi::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// [sum(a), sum(b), sum(c), sum(d)]
inline __m256d hsum4(__m256d a, __m256d b, __m256d c, __m256d d) {
  __m256d t0 = _mm256_hadd_pd(a, b);
  __m256d t1 = _mm256_hadd_pd(c, d);
  __m256d swapped = _mm256_permute2f128_pd(t0, t1, 0x21);
  __m256d blended = _mm256_blend_pd(t0, t1, 0b1100);
  return _mm256_add_pd(swapped, blended);
}

void a_axpy(int64_t n, double a, const double* x, double* y) {
  __m256d va = _mm256_set1_pd(a);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void a_scale(int64_t n, double a, double* x) {
  __m256d va = _mm256_set1_pd(a);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double a_dot(int64_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double a_sum(int64_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

// ---- exp ---------------------------------------------------------------

const __m256d kExpHi = _mm256_set1_pd(709.0);
const __m256d kExpLo = _mm256_set1_pd(-708.0);
const __m256d kLog2E = _mm256_set1_pd(1.4426950408889634073599);
const __m256d kC1 = _mm256_set1_pd(6.93145751953125e-1);
const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212e-6);
const __m256d kExpP0 = _mm256_set1_pd(1.26177193074810590878e-4);
const __m256d kExpP1 = _mm256_set1_pd(3.02994407707441961300e-2);
const __m256d kExpP2 = _mm256_set1_pd(9.99999999999999999910e-1);
const __m256d kExpQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
const __m256d kExpQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
const __m256d kExpQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
const __m256d kExpQ3 = _mm256_set1_pd(2.00000000000000000005e0);

inline __m256d exp_pd(__m256d x) {
  __m256d over = _mm256_cmp_pd(x, kExpHi, _CMP_GT_OQ);
  __m256d under = _mm256_cmp_pd(x, kExpLo, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, kExpLo), kExpHi);

  __m256d n = _mm256_round_pd(_mm256_mul_pd(kLog2E, xc),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kC1, xc);
  r = _mm256_fnmadd_pd(n, kC2, r);

  __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(kExpP0, rr, kExpP1);
  p = _mm256_fmadd_pd(p, rr, kExpP2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(kExpQ0, rr, kExpQ1);
  q = _mm256_fmadd_pd(q, rr, kExpQ2);
  q = _mm256_fmadd_pd(q, rr, kExpQ3);
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent field
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i ni64 = _mm256_cvtepi32_epi64(ni);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(HUGE_VAL), over);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), under);
  return e;
}

void a_vexp(int64_t n, const double* x, double* out) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::exp(x[i]);
}

// ---- log ---------------------------------------------------------------

const __m256d kSqrtHalf = _mm256_set1_pd(0.70710678118654752440);
const __m256d kLogP0 = _mm256_set1_pd(1.01875663804580931796e-4);
const __m256d kLogP1 = _mm256_set1_pd(4.97494994976747001425e-1);
const __m256d kLogP2 = _mm256_set1_pd(4.70579119878881725854e0);
const __m256d kLogP3 = _mm256_set1_pd(1.44989225341610930846e1);
const __m256d kLogP4 = _mm256_set1_pd(1.79368678507819816313e1);
const __m256d kLogP5 = _mm256_set1_pd(7.70838733755885391666e0);
const __m256d kLogQ0 = _mm256_set1_pd(1.12873587189167450590e1);
const __m256d kLogQ1 = _mm256_set1_pd(4.52279145837532221105e1);
const __m256d kLogQ2 = _mm256_set1_pd(8.29875266912776603211e1);
const __m256d kLogQ3 = _mm256_set1_pd(7.11544750618563894466e1);
const __m256d kLogQ4 = _mm256_set1_pd(2.31251620126765340583e1);

inline __m256d log_pd(__m256d x) {
  __m256d invalid = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LE_OQ);

  __m256i bits = _mm256_castpd_si256(x);
  __m256i expo = _mm256_srli_epi64(bits, 52);
  expo = _mm256_and_si256(expo, _mm256_set1_epi64x(0x7ff));
  expo = _mm256_sub_epi64(expo, _mm256_set1_epi64x(1022));
  __m256i mant = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL));
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(mant, _mm256_set1_epi64x(0x3fe0000000000000LL)));

  // exponents fit in 32 bits; build e as doubles via shuffle-free convert
  alignas(32) int64_t etmp[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(etmp), expo);
  __m256d e = _mm256_set_pd(static_cast<double>(etmp[3]), static_cast<double>(etmp[2]),
                            static_cast<double>(etmp[1]), static_cast<double>(etmp[0]));

  __m256d below = _mm256_cmp_pd(m, kSqrtHalf, _CMP_LT_OQ);
  e = _mm256_add_pd(e, _mm256_and_pd(below, _mm256_set1_pd(-1.0)));
  __m256d xm = _mm256_blendv_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)),
                                _mm256_fmsub_pd(m, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0)),
                                below);

  __m256d z = _mm256_mul_pd(xm, xm);
  __m256d p = _mm256_fmadd_pd(kLogP0, xm, kLogP1);
  p = _mm256_fmadd_pd(p, xm, kLogP2);
  p = _mm256_fmadd_pd(p, xm, kLogP3);
  p = _mm256_fmadd_pd(p, xm, kLogP4);
  p = _mm256_fmadd_pd(p, xm, kLogP5);
  __m256d q = _mm256_add_pd(xm, kLogQ0);
  q = _mm256_fmadd_pd(q, xm, kLogQ1);
  q = _mm256_fmadd_pd(q, xm, kLogQ2);
  q = _mm256_fmadd_pd(q, xm, kLogQ3);
  q = _mm256_fmadd_pd(q, xm, kLogQ4);

  __m256d y = _mm256_mul_pd(xm, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d res = _mm256_add_pd(xm, y);
  res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);

  res = _mm256_blendv_pd(res, _mm256_set1_pd(-HUGE_VAL), invalid);
  return res;
}

void a_vlog(int64_t n, const double* x, double* out) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, log_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::log(x[i]);
}

// ---- activations ---------------------------------------------------------

void a_relu_fwd(int64_t n, const double* x, double* out) {
  __m256d z = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(z, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void a_relu_bwd(int64_t n, const double* x, const double* dy, double* dx) {
  __m256d z = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), z, _CMP_GT_OQ);
    __m256d add = _mm256_and_pd(mask, _mm256_loadu_pd(dy + i));
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), add));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void a_leaky_relu_fwd(int64_t n, double slope, const double* x, double* out) {
  __m256d z = _mm256_setzero_pd();
  __m256d vs = _mm256_set1_pd(slope);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d mask = _mm256_cmp_pd(vx, z, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_mul_pd(vs, vx), vx, mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void a_leaky_relu_bwd(int64_t n, double slope, const double* x, const double* dy,
                      double* dx) {
  __m256d z = _mm256_setzero_pd();
  __m256d vs = _mm256_set1_pd(slope);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vdy = _mm256_loadu_pd(dy + i);
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), z, _CMP_GT_OQ);
    __m256d add = _mm256_blendv_pd(_mm256_mul_pd(vs, vdy), vdy, mask);
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), add));
  }
  for (; i < n; ++i) dx[i] += x[i] > 0.0 ? dy[i] : slope * dy[i];
}

// ---- conv2d ---------------------------------------------------------------

// Output channels are processed in blocks of 16/8/4 with a scalar tail; the
// inner loop broadcasts one input value and FMAs it across the contiguous
// Cout dimension of the weights.
void a_conv2d_fwd(const double* in, int64_t H, int64_t W, int64_t Cin,
                  const double* w, int64_t KH, int64_t KW, int64_t Cout,
                  const double* bias, int64_t stride, int64_t pad,
                  double* out, int64_t OH, int64_t OW) {
  for (int64_t oy = 0; oy < OH; ++oy) {
    for (int64_t ox = 0; ox < OW; ++ox) {
      double* o = out + (oy * OW + ox) * Cout;
      int64_t co = 0;
      for (; co + 16 <= Cout; co += 16) {
        __m256d acc0, acc1, acc2, acc3;
        if (bias) {
          acc0 = _mm256_loadu_pd(bias + co);
          acc1 = _mm256_loadu_pd(bias + co + 4);
          acc2 = _mm256_loadu_pd(bias + co + 8);
          acc3 = _mm256_loadu_pd(bias + co + 12);
        } else {
          acc0 = acc1 = acc2 = acc3 = _mm256_setzero_pd();
        }
        for (int64_t ky = 0; ky < KH; ++ky) {
          int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          for (int64_t kx = 0; kx < KW; ++kx) {
            int64_t ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= W) continue;
            const double* irow = in + (iy * W + ix) * Cin;
            const double* wrow = w + ((ky * KW + kx) * Cin) * Cout + co;
            for (int64_t ci = 0; ci < Cin; ++ci) {
              __m256d va = _mm256_set1_pd(irow[ci]);
              const double* wr = wrow + ci * Cout;
              acc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(wr), acc0);
              acc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(wr + 4), acc1);
              acc2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(wr + 8), acc2);
              acc3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(wr + 12), acc3);
            }
          }
        }
        _mm256_storeu_pd(o + co, acc0);
        _mm256_storeu_pd(o + co + 4, acc1);
        _mm256_storeu_pd(o + co + 8, acc2);
        _mm256_storeu_pd(o + co + 12, acc3);
      }
      for (; co + 4 <= Cout; co += 4) {
        __m256d acc = bias ? _mm256_loadu_pd(bias + co) : _mm256_setzero_pd();
        for (int64_t ky = 0; ky < KH; ++ky) {
          int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          for (int64_t kx = 0; kx < KW; ++kx) {
            int64_t ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= W) continue;
            const double* irow = in + (iy * W + ix) * Cin;
            const double* wrow = w + ((ky * KW + kx) * Cin) * Cout + co;
            for (int64_t ci = 0; ci < Cin; ++ci)
              acc = _mm256_fmadd_pd(_mm256_set1_pd(irow[ci]),
                                    _mm256_loadu_pd(wrow + ci * Cout), acc);
          }
        }
        _mm256_storeu_pd(o + co, acc);
      }
      for (; co < Cout; ++co) {
        double acc = bias ? bias[co] : 0.0;
        for (int64_t ky = 0; ky < KH; ++ky) {
          int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          for (int64_t kx = 0; kx < KW; ++kx) {
            int64_t ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= W) continue;
            const double* irow = in + (iy * W + ix) * Cin;
            const double* wrow = w + ((ky * KW + kx) * Cin) * Cout + co;
            for (int64_t ci = 0; ci < Cin; ++ci) acc += irow[ci] * wrow[ci * Cout];
          }
        }
        o[co] = acc;
      }
    }
  }
}

// Four input channels share the dout loads; their partial dot products are
// reduced with one 4-lane horizontal sum.
void a_conv2d_bwd_input(const double* dout, int64_t OH, int64_t OW, int64_t Cout,
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
          int64_t ci = 0;
          for (; ci + 4 <= Cin; ci += 4) {
            const double* w0 = wrow + (ci + 0) * Cout;
            const double* w1 = wrow + (ci + 1) * Cout;
            const double* w2 = wrow + (ci + 2) * Cout;
            const double* w3 = wrow + (ci + 3) * Cout;
            __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
            int64_t co = 0;
            for (; co + 4 <= Cout; co += 4) {
              __m256d vd = _mm256_loadu_pd(dok + co);
              a0 = _mm256_fmadd_pd(vd, _mm256_loadu_pd(w0 + co), a0);
              a1 = _mm256_fmadd_pd(vd, _mm256_loadu_pd(w1 + co), a1);
              a2 = _mm256_fmadd_pd(vd, _mm256_loadu_pd(w2 + co), a2);
              a3 = _mm256_fmadd_pd(vd, _mm256_loadu_pd(w3 + co), a3);
            }
            __m256d sums = hsum4(a0, a1, a2, a3);
            if (co < Cout) {
              alignas(32) double tail[4] = {0, 0, 0, 0};
              for (; co < Cout; ++co) {
                tail[0] += dok[co] * w0[co];
                tail[1] += dok[co] * w1[co];
                tail[2] += dok[co] * w2[co];
                tail[3] += dok[co] * w3[co];
              }
              sums = _mm256_add_pd(sums, _mm256_load_pd(tail));
            }
            _mm256_storeu_pd(drow + ci, _mm256_add_pd(_mm256_loadu_pd(drow + ci), sums));
          }
          for (; ci < Cin; ++ci) {
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

void a_conv2d_bwd_params(const double* in, int64_t H, int64_t W, int64_t Cin,
                         const double* dout, int64_t OH, int64_t OW, int64_t Cout,
                         int64_t KH, int64_t KW, int64_t stride, int64_t pad,
                         double* dw, double* dbias) {
  for (int64_t oy = 0; oy < OH; ++oy) {
    for (int64_t ox = 0; ox < OW; ++ox) {
      const double* dok = dout + (oy * OW + ox) * Cout;
      if (dbias) a_axpy(Cout, 1.0, dok, dbias);
      for (int64_t ky = 0; ky < KH; ++ky) {
        int64_t iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= H) continue;
        for (int64_t kx = 0; kx < KW; ++kx) {
          int64_t ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= W) continue;
          const double* irow = in + (iy * W + ix) * Cin;
          double* dwrow = dw + ((ky * KW + kx) * Cin) * Cout;
          for (int64_t ci = 0; ci < Cin; ++ci)
            a_axpy(Cout, irow[ci], dok, dwrow + ci * Cout);
        }
      }
    }
  }
}

// ---- optimizer updates ------------------------------------------------------

void a_sgd_momentum(int64_t n, double lr, double mom, double wd,
                    double* p, const double* g, double* vel) {
  __m256d vmom = _mm256_set1_pd(mom), vwd = _mm256_set1_pd(wd), vlr = _mm256_set1_pd(lr);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vp = _mm256_loadu_pd(p + i);
    __m256d vg = _mm256_fmadd_pd(vwd, vp, _mm256_loadu_pd(g + i));
    __m256d vv = _mm256_fmadd_pd(vmom, _mm256_loadu_pd(vel + i), vg);
    _mm256_storeu_pd(vel + i, vv);
    _mm256_storeu_pd(p + i, _mm256_fnmadd_pd(vlr, vv, vp));
  }
  for (; i < n; ++i) {
    vel[i] = mom * vel[i] + g[i] + wd * p[i];
    p[i] -= lr * vel[i];
  }
}

void a_adam(int64_t n, double lr, double b1, double b2, double eps,
            double bc1, double bc2, double* p, const double* g,
            double* m, double* v) {
  __m256d vb1 = _mm256_set1_pd(b1), vb2 = _mm256_set1_pd(b2);
  __m256d v1b1 = _mm256_set1_pd(1.0 - b1), v1b2 = _mm256_set1_pd(1.0 - b2);
  __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
  __m256d veps = _mm256_set1_pd(eps), vlr = _mm256_set1_pd(lr);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i), _mm256_mul_pd(v1b1, vg));
    __m256d vv = _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(v1b2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    __m256d mhat = _mm256_div_pd(vm, vbc1);
    __m256d vhat = _mm256_div_pd(vv, vbc2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    __m256d vp = _mm256_loadu_pd(p + i);
    _mm256_storeu_pd(p + i, _mm256_fnmadd_pd(vlr, _mm256_div_pd(mhat, denom), vp));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
  static const Ops table = {
      "avx2",
      a_axpy, a_scale, a_dot, a_sum, a_vexp, a_vlog,
      a_relu_fwd, a_relu_bwd, a_leaky_relu_fwd, a_leaky_relu_bwd,
      a_conv2d_fwd, a_conv2d_bwd_input, a_conv2d_bwd_params,
      a_sgd_momentum, a_adam,
  };
  return &table;
}

}  // namespace muhdi::kern

#endif  // MUHDI_HAVE_AVX2
