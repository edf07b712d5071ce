#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "muhdi/kernels.hpp"
#include "muhdi/model.hpp"
#include "testutil.hpp"

using namespace muhdi;
using testutil::approx;

namespace {

Tensor random_image(Rng& rng, int64_t h, int64_t w, int64_t c) {
  Tensor img = Tensor::zeros({h, w, c});
  for (auto& x : img.v) x = rng.uniform();
  return img;
}

void randomize_head(Head& h, Rng& rng, double scale) {
  for (auto& x : h.conv.w_.value.v) x = rng.gauss() * scale;
  for (auto& x : h.conv.b_.value.v) x = rng.gauss() * scale;
}

void perturb_params(SegModel& m, Rng& rng, double scale) {
  for (Param* p : m.params())
    for (auto& x : p->value.v) x += rng.gauss() * scale;
}

}  // namespace

TEST_CASE("activation and softmax primitives") {
  Tensor x = Tensor::zeros({1, 1, 4});
  x.v = {-2.0, 0.0, 1.5, -0.5};
  Tensor r = relu(x);
  CHECK(r.v == std::vector<double>{0.0, 0.0, 1.5, 0.0});
  Tensor l = leaky_relu(x, 0.2);
  CHECK(approx(l.v[0], -0.4, 1e-15));
  CHECK(l.v[2] == 1.5);

  Tensor logits = Tensor::zeros({1, 1, 2});
  Tensor p = softmax_hw(logits);
  CHECK(p.v[0] == 0.5);
  CHECK(p.v[1] == 0.5);

  logits.v = {std::log(2.0), 0.0};
  p = softmax_hw(logits);
  CHECK(approx(p.v[0], 2.0 / 3.0, 1e-12));
  CHECK(approx(p.v[1], 1.0 / 3.0, 1e-12));

  // Shift invariance keeps huge logits finite.
  logits.v = {1000.0, 1000.0 + std::log(3.0)};
  p = softmax_hw(logits);
  CHECK(approx(p.v[0], 0.25, 1e-12));
  CHECK(approx(p.v[1], 0.75, 1e-12));

  Tensor s = Tensor::zeros({1, 1, 2});
  s.v = {0.0, std::log(3.0)};
  Tensor sig = sigmoid(s);
  CHECK(sig.v[0] == 0.5);
  CHECK(approx(sig.v[1], 0.75, 1e-12));
}

TEST_CASE("bilinear upsample matches hand-computed half-pixel values") {
  Tensor x = Tensor::zeros({2, 2, 1});
  x.v = {1.0, 2.0, 3.0, 4.0};
  Tensor y = upsample_bilinear(x, 2);
  REQUIRE(y.shape == std::vector<int64_t>{4, 4, 1});
  const double want[16] = {1.0, 1.25, 1.75, 2.0,  1.5, 1.75, 2.25, 2.5,
                           2.5, 2.75, 3.25, 3.5,  3.0, 3.25, 3.75, 4.0};
  for (int i = 0; i < 16; ++i) CHECK(approx(y.v[i], want[i], 1e-14));

  // Constant maps stay constant under any factor (up to blend rounding).
  Tensor c = Tensor::full({3, 5, 2}, 0.7);
  Tensor cu = upsample_bilinear(c, 4);
  for (double v : cu.v) CHECK(approx(v, 0.7, 1e-15));
}

TEST_CASE("bilinear upsample backward is the adjoint of forward") {
  Rng rng(11);
  Tensor x = random_image(rng, 5, 3, 2);
  Tensor y = upsample_bilinear(x, 3);
  Tensor cotangent = random_image(rng, 15, 9, 2);
  double fwd_inner = 0.0;
  for (int64_t i = 0; i < y.numel(); ++i) fwd_inner += y.v[i] * cotangent.v[i];
  Tensor dx = Tensor::zeros(x.shape);
  upsample_bilinear_backward(cotangent, 3, dx);
  double bwd_inner = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) bwd_inner += x.v[i] * dx.v[i];
  CHECK(approx(fwd_inner, bwd_inner, 1e-12));
}

TEST_CASE("layout converters round-trip") {
  Rng rng(12);
  Tensor x = random_image(rng, 4, 6, 3);
  Tensor chw = hwc_to_chw(x);
  REQUIRE(chw.shape == std::vector<int64_t>{3, 4, 6});
  CHECK(chw.at(0, 1, 2) == x.at(1, 2, 0));
  CHECK(chw.at(2, 3, 5) == x.at(3, 5, 2));
  Tensor back = chw_to_hwc(chw);
  CHECK(back.v == x.v);
}

TEST_CASE("forward produces normalized maps and the designated tap stack") {
  SegModelConfig cfg;
  SegModel m(cfg, 7);
  Rng rng(77);
  randomize_head(m.generalist, rng, 0.5);
  perturb_params(m, rng, 0.1);

  Tensor img = random_image(rng, 64, 64, 3);
  SegForward out = forward_segmentation(m, img);
  REQUIRE(out.prob.shape == std::vector<int64_t>{64, 64, 4});
  validate_prob_map(out.prob, 1e-6);

  REQUIRE(out.features.layers.size() == 4);
  CHECK(out.features.layers[0].shape == std::vector<int64_t>{16, 32, 32});
  CHECK(out.features.layers[1].shape == std::vector<int64_t>{32, 16, 16});
  CHECK(out.features.layers[2].shape == std::vector<int64_t>{64, 8, 8});
  CHECK(out.features.layers[3].shape == std::vector<int64_t>{64, 8, 8});
}

TEST_CASE("normalization holds for arbitrary parameter values") {
  SegModelConfig cfg;
  cfg.widths = {8, 8};
  cfg.strides = {2, 2};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    SegModel m(cfg, seed);
    Rng rng(mix_seed(seed, 5));
    randomize_head(m.generalist, rng, 2.0);
    perturb_params(m, rng, 1.0);
    Tensor img = random_image(rng, 16, 16, 3);
    SegForward out = forward_segmentation(m, img);
    validate_prob_map(out.prob, 1e-6);
  }
}

TEST_CASE("zero-initialized head yields the exact uniform map") {
  SegModelConfig cfg;
  SegModel m(cfg, 3);
  Rng rng(33);
  Tensor img = random_image(rng, 64, 64, 3);
  SegForward out = forward_segmentation(m, img);
  const double uniform = 1.0 / 4.0;
  for (double v : out.prob.v) CHECK(v == uniform);

  cfg.classes = 7;
  SegModel m7(cfg, 3);
  SegForward out7 = forward_segmentation(m7, img);
  const double u7 = std::exp(0.0) / (7.0 * std::exp(0.0));
  for (double v : out7.prob.v) CHECK(v == u7);
}

TEST_CASE("repeated forward passes are bit-identical") {
  SegModelConfig cfg;
  SegModel m(cfg, 9);
  Rng rng(99);
  randomize_head(m.generalist, rng, 0.5);
  Tensor img = random_image(rng, 64, 64, 3);
  SegForward a = forward_segmentation(m, img);
  SegForward b = forward_segmentation(m, img);
  CHECK(a.prob.v == b.prob.v);
  for (size_t l = 0; l < a.features.layers.size(); ++l)
    CHECK(a.features.layers[l].v == b.features.layers[l].v);
}

TEST_CASE("head resolution honors the first-step equivalence") {
  SegModelConfig cfg;
  SegModel m(cfg, 4);
  CHECK(m.step_index == 1);
  CHECK_FALSE(m.has_specialist());
  CHECK(&m.head(HeadKind::specialist) == &m.head(HeadKind::generalist));

  Rng rng(44);
  Tensor img = random_image(rng, 64, 64, 3);
  SegForward g = forward_segmentation(m, img, HeadKind::generalist);
  SegForward s = forward_segmentation(m, img, HeadKind::specialist);
  CHECK(g.prob.v == s.prob.v);

  // Past the first step an absent specialist is a contract violation.
  m.step_index = 2;
  CHECK_THROWS_AS((void)m.head(HeadKind::specialist), ContractError);
}

TEST_CASE("snapshot freeze: digest stability, copy semantics, structural immutability") {
  SegModelConfig cfg;
  cfg.widths = {8, 8};
  cfg.strides = {2, 2};
  SegModel m(cfg, 21);
  Rng rng(210);
  randomize_head(m.generalist, rng, 0.4);

  FrozenSnapshot snap(m);
  CHECK(snap.digest() == m.digest());

  Tensor img = random_image(rng, 16, 16, 3);
  SegForward live = forward_segmentation(m, img);
  SegForward froz = snap.forward(img);
  CHECK(live.prob.v == froz.prob.v);

  // "Training" the live bundle cannot move the snapshot.
  uint64_t before = snap.digest();
  for (int step = 0; step < 100; ++step) perturb_params(m, rng, 0.05);
  CHECK(snap.current_digest() == before);
  CHECK(snap.digest() == before);

  // Gradient buffers are gone, so accumulation is structurally impossible.
  for (const Param* p : snap.model().params()) {
    CHECK(p->grad.numel() == 0);
    CHECK_FALSE(p->trainable());
  }
  Encoder::Pass pass;
  snap.model().encoder.forward(img, pass);
  Conv2d frozen_block = snap.model().encoder.blocks[0];
  Tensor dout = Tensor::zeros(pass.pre[0].shape);
  CHECK_THROWS_AS(frozen_block.backward(img, dout, nullptr), ContractError);
}

TEST_CASE("snapshot serialization round-trips to the same digest") {
  SegModelConfig cfg;
  SegModel m(cfg, 8);
  Rng rng(88);
  randomize_head(m.generalist, rng, 0.3);
  m.specialist = m.generalist;
  m.specialist->rename("specialist.head");
  m.step_index = 2;

  std::stringstream ss;
  m.save(ss);
  SegModel back = SegModel::load(ss);
  CHECK(back.digest() == m.digest());
  CHECK(back.step_index == 2);
  CHECK(back.has_specialist());
  CHECK(back.config.widths == m.config.widths);

  Tensor img = random_image(rng, 64, 64, 3);
  CHECK(forward_segmentation(back, img).prob.v == forward_segmentation(m, img).prob.v);
}

TEST_CASE("checkpoint files round-trip model and discriminator") {
  SegModelConfig cfg;
  cfg.widths = {8, 8};
  cfg.strides = {2, 2};
  SegModel m(cfg, 14);
  Rng rng(140);
  randomize_head(m.generalist, rng, 0.4);
  Discriminator::Config dc;
  dc.in_channels = cfg.classes;
  dc.base_width = 8;
  Discriminator d(dc, rng);

  const std::string path = "model_roundtrip.ckpt";
  save_checkpoint(path, m, &d);
  Checkpoint ck = load_checkpoint(path);
  CHECK(ck.model.digest() == m.digest());
  REQUIRE(ck.disc.has_value());
  CHECK(digest_params(ck.disc->params()) == digest_params(d.params()));
  CHECK(ck.disc->slope == d.slope);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_checkpoint("no_such_file.ckpt"), ValidationError);
}

TEST_CASE("spawn: step index, structure, and forward equality of both heads") {
  SegModelConfig cfg;
  cfg.widths = {8, 8};
  cfg.strides = {2, 2};
  SegModel m(cfg, 5);
  Rng rng(55);
  randomize_head(m.generalist, rng, 0.5);

  FrozenSnapshot snap(m);
  SegModel next = spawn_next_step(snap);
  CHECK(next.step_index == 2);
  CHECK(next.has_specialist());
  for (Param* p : next.params()) CHECK(p->trainable());

  Tensor img = random_image(rng, 16, 16, 3);
  SegForward prev_gen = snap.forward(img, HeadKind::generalist);
  CHECK(forward_segmentation(next, img, HeadKind::generalist).prob.v == prev_gen.prob.v);
  CHECK(forward_segmentation(next, img, HeadKind::specialist).prob.v == prev_gen.prob.v);

  SegModel single = spawn_next_step(snap, false);
  CHECK_FALSE(single.has_specialist());
  CHECK(single.step_index == 2);

  // Chained spawn re-seeds the specialist from the generalist, not the old
  // specialist.
  Rng rng2(551);
  randomize_head(*next.specialist, rng2, 0.9);
  FrozenSnapshot snap2(next);
  SegModel third = spawn_next_step(snap2);
  CHECK(third.step_index == 3);
  CHECK(third.specialist->conv.w_.value.v == third.generalist.conv.w_.value.v);
  CHECK(third.specialist->conv.w_.name == std::string("specialist.head.w"));
}

TEST_CASE("discriminator shapes, score range, and parameter partition") {
  Rng rng(31);
  Discriminator::Config dc;
  dc.in_channels = 4;
  Discriminator d(dc, rng);

  Tensor self_info = random_image(rng, 64, 64, 4);
  Discriminator::Pass pass;
  const Tensor& scores = d.forward(self_info, pass);
  REQUIRE(scores.shape == std::vector<int64_t>{8, 8, 1});
  for (double s : scores.v) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }

  SegModelConfig cfg;
  SegModel m(cfg, 2);
  Partition part = parameter_partition(m, d);
  CHECK(part.segmentation.size() == m.params().size());
  CHECK(part.discriminator.size() == 6);
  for (Param* a : part.segmentation)
    for (Param* b : part.discriminator) CHECK(a != b);

  // Union covers everything trainable.
  CHECK(part.segmentation.size() + part.discriminator.size() ==
        m.params().size() + d.params().size());

  // A discriminator-partition update cannot move segmentation parameters.
  uint64_t seg_before = m.digest();
  const kern::Ops& k = kern::ops();
  for (Param* p : part.discriminator) {
    Tensor fake_grad = Tensor::full(p->value.shape, 0.5);
    Tensor vel = Tensor::zeros(p->value.shape);
    k.sgd_momentum(p->value.numel(), 1e-2, 0.9, 0.0, p->value.v.data(),
                   fake_grad.v.data(), vel.v.data());
  }
  CHECK(m.digest() == seg_before);
  CHECK(digest_params(d.params()) != 0);
}

TEST_CASE("component infos expose digests and shapes for manifests") {
  SegModelConfig cfg;
  SegModel m(cfg, 6);
  Rng rng(66);
  Discriminator::Config dc;
  dc.in_channels = cfg.classes;
  Discriminator d(dc, rng);

  auto infos = component_infos(m, &d);
  REQUIRE(infos.size() == 3);  // no specialist yet
  CHECK(infos[0].name == "extractor");
  CHECK(infos[1].name == "generalist_head");
  CHECK(infos[2].name == "discriminator");
  CHECK(infos[0].tensors.size() == 8);

  m.specialist = m.generalist;
  m.specialist->rename("specialist.head");
  auto infos2 = component_infos(m, nullptr);
  REQUIRE(infos2.size() == 3);
  CHECK(infos2[2].name == "specialist_head");
  // Same weights, different names: digests differ because names are part of
  // the hashed identity.
  CHECK(infos2[1].name == "generalist_head");
  CHECK(infos2[1].tensors[0].second == std::vector<int64_t>{1, 1, 64, 4});
}
