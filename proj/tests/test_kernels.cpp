#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "muhdi/kernels.hpp"
#include "muhdi/rng.hpp"
#include "testutil.hpp"

using namespace muhdi;
using kern::Ops;
using testutil::approx;

namespace {

std::vector<double> rand_vec(Rng& rng, int64_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool vec_close(const std::vector<double>& a, const std::vector<double>& b, double rtol,
               double atol = 1e-14) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!approx(a[i], b[i], rtol, atol)) return false;
  return true;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  const Ops& s = kern::scalar_ops();
  CHECK(std::string(s.name) == "scalar");
  double x[3] = {1.0, 2.0, 3.0};
  CHECK(s.sum(3, x) == doctest::Approx(6.0));
  CHECK(s.dot(3, x, x) == doctest::Approx(14.0));
}

TEST_CASE("backend selection") {
  kern::force_backend("scalar");
  CHECK(std::string(kern::ops().name) == "scalar");
  CHECK_THROWS_AS(kern::force_backend("sse9"), ValidationError);
  kern::force_backend("auto");
  if (kern::avx2_ops()) {
    kern::force_backend("avx2");
    CHECK(std::string(kern::ops().name) == "avx2");
  }
  kern::force_backend("auto");
}

TEST_CASE("scalar exp/log agree with libm") {
  const Ops& s = kern::scalar_ops();
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform(-700.0, 700.0);
    double e;
    s.vexp(1, &x, &e);
    CHECK(e == std::exp(x));
    double p = std::exp(rng.uniform(-30.0, 30.0));
    double l;
    s.vlog(1, &p, &l);
    CHECK(l == std::log(p));
  }
}

TEST_CASE("simd variants match the scalar reference") {
  const Ops* a = kern::avx2_ops();
  if (!a) {
    MESSAGE("avx2 not available; equivalence suite skipped on this machine");
    return;
  }
  const Ops& s = kern::scalar_ops();
  Rng rng(42);

  SUBCASE("axpy/scale/dot/sum") {
    for (int it = 0; it < 50; ++it) {
      int64_t n = rng.uniform_int(1, 300);
      auto x = rand_vec(rng, n);
      auto y0 = rand_vec(rng, n);
      auto y1 = y0;
      double alpha = rng.uniform(-2.0, 2.0);
      s.axpy(n, alpha, x.data(), y0.data());
      a->axpy(n, alpha, x.data(), y1.data());
      CHECK(vec_close(y0, y1, 1e-14));

      auto z0 = x, z1 = x;
      s.scale(n, alpha, z0.data());
      a->scale(n, alpha, z1.data());
      CHECK(vec_close(z0, z1, 1e-15));

      CHECK(approx(s.dot(n, x.data(), y0.data()), a->dot(n, x.data(), y1.data()), 1e-12,
                   1e-13));
      CHECK(approx(s.sum(n, x.data()), a->sum(n, x.data()), 1e-12, 1e-13));
    }
  }

  SUBCASE("vexp over the working domain") {
    for (int it = 0; it < 40; ++it) {
      int64_t n = rng.uniform_int(1, 257);
      auto x = rand_vec(rng, n, -700.0, 700.0);
      std::vector<double> e0(n), e1(n);
      s.vexp(n, x.data(), e0.data());
      a->vexp(n, x.data(), e1.data());
      CHECK(vec_close(e0, e1, 1e-12, 0.0));
    }
    // saturation edges
    double edge[4] = {800.0, -800.0, 0.0, 1.0};
    std::vector<double> e0(4), e1(4);
    s.vexp(4, edge, e0.data());
    a->vexp(4, edge, e1.data());
    CHECK(e1[0] == e0[0]);  // +inf
    CHECK(e1[1] == 0.0);
    CHECK(e1[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(approx(e0[3], e1[3], 1e-14));
  }

  SUBCASE("vlog over the working domain") {
    for (int it = 0; it < 40; ++it) {
      int64_t n = rng.uniform_int(1, 257);
      std::vector<double> x(n);
      for (auto& v : x) v = std::exp(rng.uniform(-30.0, 30.0));
      std::vector<double> l0(n), l1(n);
      s.vlog(n, x.data(), l0.data());
      a->vlog(n, x.data(), l1.data());
      CHECK(vec_close(l0, l1, 1e-13, 1e-15));
    }
    // values near 1 keep relative accuracy
    for (int it = 0; it < 200; ++it) {
      double x = 1.0 + rng.uniform(-1e-3, 1e-3);
      double l0, l1;
      s.vlog(1, &x, &l0);
      a->vlog(1, &x, &l1);
      CHECK(approx(l0, l1, 1e-12, 1e-20));
    }
  }

  SUBCASE("activations") {
    for (int it = 0; it < 30; ++it) {
      int64_t n = rng.uniform_int(1, 200);
      auto x = rand_vec(rng, n);
      auto dy = rand_vec(rng, n);
      std::vector<double> o0(n), o1(n);
      s.relu_fwd(n, x.data(), o0.data());
      a->relu_fwd(n, x.data(), o1.data());
      CHECK(o0 == o1);
      s.leaky_relu_fwd(n, 0.2, x.data(), o0.data());
      a->leaky_relu_fwd(n, 0.2, x.data(), o1.data());
      CHECK(vec_close(o0, o1, 1e-15));

      auto dx0 = rand_vec(rng, n);
      auto dx1 = dx0;
      s.relu_bwd(n, x.data(), dy.data(), dx0.data());
      a->relu_bwd(n, x.data(), dy.data(), dx1.data());
      CHECK(o0.size() == o1.size());
      CHECK(vec_close(dx0, dx1, 1e-15));

      dx0 = rand_vec(rng, n);
      dx1 = dx0;
      s.leaky_relu_bwd(n, 0.2, x.data(), dy.data(), dx0.data());
      a->leaky_relu_bwd(n, 0.2, x.data(), dy.data(), dx1.data());
      CHECK(vec_close(dx0, dx1, 1e-15));
    }
  }

  SUBCASE("conv2d forward/backward") {
    struct Case {
      int64_t H, W, Cin, KH, KW, Cout, stride, pad;
    };
    std::vector<Case> cases = {
        {8, 8, 3, 3, 3, 16, 2, 1},  {8, 8, 16, 3, 3, 32, 2, 1}, {6, 6, 32, 3, 3, 64, 1, 1},
        {8, 8, 4, 4, 4, 16, 2, 1},  {5, 7, 2, 3, 3, 7, 1, 1},   {4, 4, 64, 1, 1, 4, 1, 0},
        {9, 9, 5, 3, 3, 1, 2, 1},   {4, 4, 1, 3, 3, 3, 1, 0},
    };
    for (const auto& cs : cases) {
      int64_t OH = (cs.H + 2 * cs.pad - cs.KH) / cs.stride + 1;
      int64_t OW = (cs.W + 2 * cs.pad - cs.KW) / cs.stride + 1;
      auto in = rand_vec(rng, cs.H * cs.W * cs.Cin);
      auto w = rand_vec(rng, cs.KH * cs.KW * cs.Cin * cs.Cout);
      auto bias = rand_vec(rng, cs.Cout);
      std::vector<double> o0(OH * OW * cs.Cout), o1(o0.size());
      s.conv2d_fwd(in.data(), cs.H, cs.W, cs.Cin, w.data(), cs.KH, cs.KW, cs.Cout,
                   bias.data(), cs.stride, cs.pad, o0.data(), OH, OW);
      a->conv2d_fwd(in.data(), cs.H, cs.W, cs.Cin, w.data(), cs.KH, cs.KW, cs.Cout,
                    bias.data(), cs.stride, cs.pad, o1.data(), OH, OW);
      CHECK(vec_close(o0, o1, 1e-12, 1e-13));

      auto dout = rand_vec(rng, OH * OW * cs.Cout);
      std::vector<double> di0(in.size(), 0.1), di1(in.size(), 0.1);
      s.conv2d_bwd_input(dout.data(), OH, OW, cs.Cout, w.data(), cs.KH, cs.KW, cs.Cin,
                         cs.stride, cs.pad, di0.data(), cs.H, cs.W);
      a->conv2d_bwd_input(dout.data(), OH, OW, cs.Cout, w.data(), cs.KH, cs.KW, cs.Cin,
                          cs.stride, cs.pad, di1.data(), cs.H, cs.W);
      CHECK(vec_close(di0, di1, 1e-12, 1e-13));

      std::vector<double> dw0(w.size(), 0.05), dw1(w.size(), 0.05);
      std::vector<double> db0(cs.Cout, -0.3), db1(cs.Cout, -0.3);
      s.conv2d_bwd_params(in.data(), cs.H, cs.W, cs.Cin, dout.data(), OH, OW, cs.Cout,
                          cs.KH, cs.KW, cs.stride, cs.pad, dw0.data(), db0.data());
      a->conv2d_bwd_params(in.data(), cs.H, cs.W, cs.Cin, dout.data(), OH, OW, cs.Cout,
                           cs.KH, cs.KW, cs.stride, cs.pad, dw1.data(), db1.data());
      CHECK(vec_close(dw0, dw1, 1e-12, 1e-13));
      CHECK(vec_close(db0, db1, 1e-12, 1e-13));
    }
  }

  SUBCASE("optimizer updates") {
    for (int it = 0; it < 20; ++it) {
      int64_t n = rng.uniform_int(1, 100);
      auto p0 = rand_vec(rng, n), g = rand_vec(rng, n), v0 = rand_vec(rng, n);
      auto p1 = p0, v1 = v0;
      s.sgd_momentum(n, 2.5e-4, 0.9, 1e-4, p0.data(), g.data(), v0.data());
      a->sgd_momentum(n, 2.5e-4, 0.9, 1e-4, p1.data(), g.data(), v1.data());
      CHECK(vec_close(p0, p1, 1e-13));
      CHECK(vec_close(v0, v1, 1e-13));

      auto q0 = rand_vec(rng, n), m0 = rand_vec(rng, n, 0.0, 0.1),
           w0 = rand_vec(rng, n, 0.0, 0.1);
      auto q1 = q0, m1 = m0, w1 = w0;
      double bc1 = 1.0 - std::pow(0.9, 5), bc2 = 1.0 - std::pow(0.999, 5);
      s.adam(n, 1e-4, 0.9, 0.999, 1e-8, bc1, bc2, q0.data(), g.data(), m0.data(),
             w0.data());
      a->adam(n, 1e-4, 0.9, 0.999, 1e-8, bc1, bc2, q1.data(), g.data(), m1.data(),
              w1.data());
      CHECK(vec_close(q0, q1, 1e-13));
      CHECK(vec_close(m0, m1, 1e-13));
      CHECK(vec_close(w0, w1, 1e-13));
    }
  }
}

TEST_CASE("conv2d reference matches direct summation") {
  // independent check of the scalar kernel itself on one small case
  const Ops& s = kern::scalar_ops();
  Rng rng(3);
  int64_t H = 5, W = 5, Cin = 2, KH = 3, KW = 3, Cout = 3, stride = 2, pad = 1;
  int64_t OH = (H + 2 * pad - KH) / stride + 1, OW = (W + 2 * pad - KW) / stride + 1;
  auto in = rand_vec(rng, H * W * Cin);
  auto w = rand_vec(rng, KH * KW * Cin * Cout);
  auto bias = rand_vec(rng, Cout);
  std::vector<double> out(OH * OW * Cout);
  s.conv2d_fwd(in.data(), H, W, Cin, w.data(), KH, KW, Cout, bias.data(), stride, pad,
               out.data(), OH, OW);
  for (int64_t oy = 0; oy < OH; ++oy)
    for (int64_t ox = 0; ox < OW; ++ox)
      for (int64_t co = 0; co < Cout; ++co) {
        double acc = bias[co];
        for (int64_t ky = 0; ky < KH; ++ky)
          for (int64_t kx = 0; kx < KW; ++kx) {
            int64_t iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
            for (int64_t ci = 0; ci < Cin; ++ci)
              acc += in[(iy * W + ix) * Cin + ci] * w[((ky * KW + kx) * Cin + ci) * Cout + co];
          }
        CHECK(approx(out[(oy * OW + ox) * Cout + co], acc, 1e-12, 1e-14));
      }
}
