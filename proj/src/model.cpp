#include "muhdi/model.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include "muhdi/digest.hpp"
#include "muhdi/errors.hpp"

namespace muhdi {

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(const SegModelConfig& cfg, Rng& rng) {
  if (cfg.widths.size() != cfg.strides.size() || cfg.widths.empty())
    throw ValidationError("encoder widths and strides must be non-empty and match");
  int64_t cin = cfg.in_channels;
  for (size_t l = 0; l < cfg.widths.size(); ++l) {
    blocks.emplace_back("encoder.block" + std::to_string(l), cin, cfg.widths[l],
                        cfg.kernel, cfg.strides[l], cfg.kernel / 2);
    blocks.back().init_he(rng);
    cin = cfg.widths[l];
  }
}

void Encoder::forward(const Tensor& x, Pass& pass) const {
  pass.x = x;
  pass.pre.assign(blocks.size(), Tensor{});
  pass.act.assign(blocks.size(), Tensor{});
  const Tensor* cur = &pass.x;
  for (size_t l = 0; l < blocks.size(); ++l) {
    pass.pre[l] = blocks[l].forward(*cur);
    pass.act[l] = relu(pass.pre[l]);
    cur = &pass.act[l];
  }
}

void Encoder::backward(Pass& pass, std::vector<Tensor>& dtaps) {
  if (dtaps.size() != blocks.size())
    throw ContractError("tap gradient count does not match encoder depth");
  for (size_t i = blocks.size(); i-- > 0;) {
    Tensor dpre = Tensor::zeros(pass.pre[i].shape);
    relu_backward(pass.pre[i], dtaps[i], dpre);
    if (i > 0) {
      blocks[i].backward(pass.act[i - 1], dpre, &dtaps[i - 1]);
    } else {
      blocks[0].backward(pass.x, dpre, nullptr);
    }
  }
}

std::vector<Param*> Encoder::params() {
  std::vector<Param*> ps;
  for (auto& b : blocks)
    for (Param* p : b.params()) ps.push_back(p);
  return ps;
}

std::vector<const Param*> Encoder::params() const {
  std::vector<const Param*> ps;
  for (const auto& b : blocks)
    for (const Param* p : b.params()) ps.push_back(p);
  return ps;
}

// ---------------------------------------------------------------------------
// Head

Head::Head(std::string name, int64_t cin, int64_t classes, int64_t up)
    : conv(std::move(name), cin, classes, 1, 1, 0), up_factor(up) {
  conv.init_zero();
}

const Tensor& Head::forward(const Tensor& feat, Pass& pass) const {
  pass.feat = feat;
  pass.logits_lo = conv.forward(feat);
  Tensor logits_hi = up_factor == 1 ? pass.logits_lo
                                    : upsample_bilinear(pass.logits_lo, up_factor);
  pass.prob = softmax_hw(logits_hi);
  return pass.prob;
}

void Head::backward(Pass& pass, const Tensor& dprob, Tensor& dfeat) {
  Tensor dlogits_hi = Tensor::zeros(pass.prob.shape);
  softmax_backward(pass.prob, dprob, dlogits_hi);
  Tensor dlogits_lo;
  if (up_factor == 1) {
    dlogits_lo = std::move(dlogits_hi);
  } else {
    dlogits_lo = Tensor::zeros(pass.logits_lo.shape);
    upsample_bilinear_backward(dlogits_hi, up_factor, dlogits_lo);
  }
  conv.backward(pass.feat, dlogits_lo, &dfeat);
}

void Head::rename(const std::string& name) {
  conv.w_.name = name + ".w";
  conv.b_.name = name + ".b";
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(const Config& cfg, Rng& rng)
    : c1("disc.c1", cfg.in_channels, cfg.base_width, cfg.kernel, 2, 1),
      c2("disc.c2", cfg.base_width, cfg.base_width * 2, cfg.kernel, 2, 1),
      c3("disc.c3", cfg.base_width * 2, 1, cfg.kernel, 2, 1),
      slope(cfg.slope) {
  c1.init_he(rng);
  c2.init_he(rng);
  c3.init_he(rng);
}

const Tensor& Discriminator::forward(const Tensor& self_info, Pass& pass) const {
  pass.x = self_info;
  pass.z1 = c1.forward(pass.x);
  pass.a1 = leaky_relu(pass.z1, slope);
  pass.z2 = c2.forward(pass.a1);
  pass.a2 = leaky_relu(pass.z2, slope);
  pass.logits = c3.forward(pass.a2);
  pass.scores = sigmoid(pass.logits);
  return pass.scores;
}

void Discriminator::backward_params(Pass& pass, const Tensor& dscores) {
  Tensor dlogits = Tensor::zeros(pass.logits.shape);
  sigmoid_backward(pass.scores, dscores, dlogits);
  Tensor da2 = Tensor::zeros(pass.a2.shape);
  c3.backward(pass.a2, dlogits, &da2);
  Tensor dz2 = Tensor::zeros(pass.z2.shape);
  leaky_relu_backward(pass.z2, da2, slope, dz2);
  Tensor da1 = Tensor::zeros(pass.a1.shape);
  c2.backward(pass.a1, dz2, &da1);
  Tensor dz1 = Tensor::zeros(pass.z1.shape);
  leaky_relu_backward(pass.z1, da1, slope, dz1);
  c1.backward(pass.x, dz1, nullptr);
}

void Discriminator::backward_input(const Pass& pass, const Tensor& dscores,
                                   Tensor& dinput) const {
  Tensor dlogits = Tensor::zeros(pass.logits.shape);
  sigmoid_backward(pass.scores, dscores, dlogits);
  Tensor da2 = Tensor::zeros(pass.a2.shape);
  c3.backward_input_only(dlogits, pass.a2.shape[0], pass.a2.shape[1], da2);
  Tensor dz2 = Tensor::zeros(pass.z2.shape);
  leaky_relu_backward(pass.z2, da2, slope, dz2);
  Tensor da1 = Tensor::zeros(pass.a1.shape);
  c2.backward_input_only(dz2, pass.a1.shape[0], pass.a1.shape[1], da1);
  Tensor dz1 = Tensor::zeros(pass.z1.shape);
  leaky_relu_backward(pass.z1, da1, slope, dz1);
  c1.backward_input_only(dz1, pass.x.shape[0], pass.x.shape[1], dinput);
}

std::vector<Param*> Discriminator::params() {
  std::vector<Param*> ps;
  for (Conv2d* c : {&c1, &c2, &c3})
    for (Param* p : c->params()) ps.push_back(p);
  return ps;
}

std::vector<const Param*> Discriminator::params() const {
  std::vector<const Param*> ps;
  for (const Conv2d* c : {&c1, &c2, &c3})
    for (const Param* p : c->params()) ps.push_back(p);
  return ps;
}

// ---------------------------------------------------------------------------
// SegModel

SegModel::SegModel(const SegModelConfig& cfg, uint64_t seed) : config(cfg) {
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));  // "model"
  encoder = Encoder(cfg, rng);
  generalist = Head("generalist.head", cfg.widths.back(), cfg.classes,
                    cfg.upsample_factor());
  step_index = 1;
}

const Head& SegModel::head(HeadKind kind) const {
  if (kind == HeadKind::generalist) return generalist;
  if (specialist.has_value()) return *specialist;
  if (step_index == 1) return generalist;
  throw ContractError("bundle has no specialist head past the first step");
}

Head& SegModel::head(HeadKind kind) {
  return const_cast<Head&>(static_cast<const SegModel&>(*this).head(kind));
}

std::vector<Param*> SegModel::params() {
  std::vector<Param*> ps = encoder.params();
  for (Param* p : generalist.params()) ps.push_back(p);
  if (specialist)
    for (Param* p : specialist->params()) ps.push_back(p);
  return ps;
}

std::vector<const Param*> SegModel::params() const {
  std::vector<const Param*> ps = encoder.params();
  for (const Param* p : generalist.params()) ps.push_back(p);
  if (specialist)
    for (const Param* p : specialist->params()) ps.push_back(p);
  return ps;
}

uint64_t SegModel::digest() const { return digest_params(params()); }

void SegModel::drop_grads() {
  for (Param* p : params()) p->drop_grad();
}

void SegModel::realloc_grads() {
  for (Param* p : params()) p->grad = Tensor::zeros(p->value.shape);
}

// ---------------------------------------------------------------------------
// Snapshot / spawn

FrozenSnapshot::FrozenSnapshot(const SegModel& m) : model_(m) {
  model_.drop_grads();
  digest_ = model_.digest();
}

SegForward FrozenSnapshot::forward(const Tensor& image, HeadKind head) const {
  return forward_segmentation(model_, image, head);
}

FrozenSnapshot snapshot_freeze(const SegModel& model) { return FrozenSnapshot(model); }

SegModel spawn_next_step(const FrozenSnapshot& prev, bool with_specialist) {
  SegModel next = prev.model();
  next.step_index += 1;
  if (with_specialist) {
    next.specialist = next.generalist;
    next.specialist->rename("specialist.head");
  } else {
    next.specialist.reset();
  }
  next.realloc_grads();
  return next;
}

SegForward forward_segmentation(const SegModel& model, const Tensor& image,
                                HeadKind kind) {
  Encoder::Pass epass;
  model.encoder.forward(image, epass);
  Head::Pass hpass;
  const Head& h = model.head(kind);
  h.forward(epass.act.back(), hpass);
  SegForward out;
  out.prob = std::move(hpass.prob);
  out.features.layers.reserve(epass.act.size());
  for (const Tensor& tap : epass.act) out.features.layers.push_back(hwc_to_chw(tap));
  return out;
}

Partition parameter_partition(SegModel& model, Discriminator& disc) {
  Partition p;
  p.segmentation = model.params();
  p.discriminator = disc.params();
  return p;
}

// ---------------------------------------------------------------------------
// Digests and manifest info

uint64_t digest_params(const std::vector<const Param*>& ps) {
  Fnv1a64 h;
  for (const Param* p : ps) {
    h.update_str(p->name);
    for (int64_t d : p->value.shape) h.update_i64(d);
    h.update_f64s(p->value.v.data(), p->value.v.size());
  }
  return h.digest();
}

uint64_t digest_params(const std::vector<Param*>& ps) {
  std::vector<const Param*> cps(ps.begin(), ps.end());
  return digest_params(cps);
}

static ComponentInfo make_info(const std::string& name,
                               const std::vector<const Param*>& ps) {
  ComponentInfo info;
  info.name = name;
  info.digest = digest_params(ps);
  for (const Param* p : ps) info.tensors.emplace_back(p->name, p->value.shape);
  return info;
}

std::vector<ComponentInfo> component_infos(const SegModel& m, const Discriminator* d) {
  std::vector<ComponentInfo> out;
  out.push_back(make_info("extractor", m.encoder.params()));
  out.push_back(make_info("generalist_head", m.generalist.params()));
  if (m.specialist)
    out.push_back(make_info("specialist_head", m.specialist->params()));
  if (d) out.push_back(make_info("discriminator", d->params()));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization (little-endian, fixed width)

namespace {

void put_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void take_bytes(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw ValidationError("checkpoint stream truncated");
}

void put_u64(std::ostream& os, uint64_t x) { put_bytes(os, &x, 8); }
void put_i64(std::ostream& os, int64_t x) { put_bytes(os, &x, 8); }

uint64_t take_u64(std::istream& is) {
  uint64_t x = 0;
  take_bytes(is, &x, 8);
  return x;
}

int64_t take_i64(std::istream& is) {
  int64_t x = 0;
  take_bytes(is, &x, 8);
  return x;
}

void put_str(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  put_bytes(os, s.data(), s.size());
}

std::string take_str(std::istream& is) {
  uint64_t n = take_u64(is);
  if (n > (1u << 20)) throw ValidationError("checkpoint string length is implausible");
  std::string s(n, '\0');
  take_bytes(is, s.data(), n);
  return s;
}

void put_tensor(std::ostream& os, const Tensor& t) {
  put_u64(os, t.shape.size());
  for (int64_t d : t.shape) put_i64(os, d);
  put_bytes(os, t.v.data(), t.v.size() * sizeof(double));
}

Tensor take_tensor(std::istream& is) {
  uint64_t rank = take_u64(is);
  if (rank > 8) throw ValidationError("checkpoint tensor rank is implausible");
  std::vector<int64_t> shape(rank);
  for (auto& d : shape) d = take_i64(is);
  Tensor t = Tensor::zeros(shape);
  take_bytes(is, t.v.data(), t.v.size() * sizeof(double));
  return t;
}

void put_conv(std::ostream& os, const Conv2d& c) {
  put_str(os, c.w_.name);
  put_str(os, c.b_.name);
  put_i64(os, c.cin());
  put_i64(os, c.cout());
  put_i64(os, c.kernel());
  put_i64(os, c.stride());
  put_i64(os, c.pad());
  put_tensor(os, c.w_.value);
  put_tensor(os, c.b_.value);
}

Conv2d take_conv(std::istream& is) {
  std::string wname = take_str(is);
  std::string bname = take_str(is);
  int64_t cin = take_i64(is), cout = take_i64(is), k = take_i64(is);
  int64_t stride = take_i64(is), pad = take_i64(is);
  std::string base = wname.size() > 2 ? wname.substr(0, wname.size() - 2) : wname;
  Conv2d c(base, cin, cout, k, stride, pad);
  c.w_.value = take_tensor(is);
  c.b_.value = take_tensor(is);
  c.w_.name = wname;
  c.b_.name = bname;
  if (c.w_.value.shape != std::vector<int64_t>{k, k, cin, cout} ||
      c.b_.value.shape != std::vector<int64_t>{cout})
    throw ValidationError("checkpoint conv tensor shape does not match its header");
  return c;
}

constexpr uint64_t kSegMagic = 0x4d5548444953474dULL;   // "MUHDISGM"
constexpr uint64_t kDiscMagic = 0x4d55484449445343ULL;  // "MUHDIDSC"
constexpr uint64_t kCkptMagic = 0x4d55484449434b50ULL;  // "MUHDICKP"

void put_head(std::ostream& os, const Head& h) {
  put_conv(os, h.conv);
  put_i64(os, h.up_factor);
}

Head take_head(std::istream& is) {
  Head h;
  h.conv = take_conv(is);
  h.up_factor = take_i64(is);
  return h;
}

void put_disc(std::ostream& os, const Discriminator& d) {
  put_u64(os, kDiscMagic);
  put_conv(os, d.c1);
  put_conv(os, d.c2);
  put_conv(os, d.c3);
  put_bytes(os, &d.slope, sizeof(double));
}

Discriminator take_disc(std::istream& is) {
  if (take_u64(is) != kDiscMagic)
    throw ValidationError("checkpoint discriminator section has a bad magic");
  Discriminator d;
  d.c1 = take_conv(is);
  d.c2 = take_conv(is);
  d.c3 = take_conv(is);
  take_bytes(is, &d.slope, sizeof(double));
  return d;
}

}  // namespace

void SegModel::save(std::ostream& os) const {
  put_u64(os, kSegMagic);
  put_u64(os, 1);  // format version
  put_i64(os, step_index);
  put_i64(os, config.in_channels);
  put_i64(os, config.classes);
  put_i64(os, config.kernel);
  put_u64(os, config.widths.size());
  for (size_t i = 0; i < config.widths.size(); ++i) {
    put_i64(os, config.widths[i]);
    put_i64(os, config.strides[i]);
  }
  put_u64(os, encoder.blocks.size());
  for (const auto& b : encoder.blocks) put_conv(os, b);
  put_head(os, generalist);
  put_u64(os, specialist.has_value() ? 1 : 0);
  if (specialist) put_head(os, *specialist);
}

SegModel SegModel::load(std::istream& is) {
  if (take_u64(is) != kSegMagic)
    throw ValidationError("checkpoint model section has a bad magic");
  uint64_t version = take_u64(is);
  if (version != 1) throw ValidationError("unsupported checkpoint format version");
  SegModel m;
  m.step_index = take_i64(is);
  m.config.in_channels = take_i64(is);
  m.config.classes = take_i64(is);
  m.config.kernel = take_i64(is);
  uint64_t depth = take_u64(is);
  if (depth == 0 || depth > 64) throw ValidationError("checkpoint depth is implausible");
  m.config.widths.resize(depth);
  m.config.strides.resize(depth);
  for (uint64_t i = 0; i < depth; ++i) {
    m.config.widths[i] = take_i64(is);
    m.config.strides[i] = take_i64(is);
  }
  uint64_t nblocks = take_u64(is);
  if (nblocks != depth) throw ValidationError("checkpoint block count mismatch");
  m.encoder.blocks.clear();
  for (uint64_t i = 0; i < nblocks; ++i) m.encoder.blocks.push_back(take_conv(is));
  m.generalist = take_head(is);
  if (take_u64(is) != 0) m.specialist = take_head(is);
  m.realloc_grads();
  return m;
}

void save_checkpoint(const std::string& path, const SegModel& m,
                     const Discriminator* d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open checkpoint for writing: " + path);
  put_u64(os, kCkptMagic);
  m.save(os);
  put_u64(os, d ? 1 : 0);
  if (d) put_disc(os, *d);
  os.flush();
  if (!os) throw ValidationError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open checkpoint: " + path);
  if (take_u64(is) != kCkptMagic)
    throw ValidationError("not a checkpoint file: " + path);
  Checkpoint ck;
  ck.model = SegModel::load(is);
  if (take_u64(is) != 0) ck.disc = take_disc(is);
  return ck;
}

}  // namespace muhdi
