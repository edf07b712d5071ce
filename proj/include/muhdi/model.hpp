#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "muhdi/losses.hpp"
#include "muhdi/nn.hpp"
#include "muhdi/rng.hpp"
#include "muhdi/tensor.hpp"

namespace muhdi {

struct SegModelConfig {
  int64_t in_channels = 3;
  std::vector<int64_t> widths = {16, 32, 64, 64};
  std::vector<int64_t> strides = {2, 2, 2, 1};
  int64_t kernel = 3;
  int64_t classes = 4;

  int64_t upsample_factor() const {
    int64_t f = 1;
    for (int64_t s : strides) f *= s;
    return f;
  }
};

// Strided conv feature extractor; the activation after every block is a
// designated distillation tap.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const SegModelConfig& cfg, Rng& rng);

  struct Pass {
    Tensor x;
    std::vector<Tensor> pre;  // pre-activation per block
    std::vector<Tensor> act;  // tap per block, [H_l, W_l, C_l]
  };

  void forward(const Tensor& x, Pass& pass) const;
  // dtaps[l] holds the loss gradient w.r.t. tap l; consumed by the call.
  void backward(Pass& pass, std::vector<Tensor>& dtaps);

  size_t depth() const { return blocks.size(); }
  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  std::vector<Conv2d> blocks;
};

// 1x1 conv classifier at feature resolution, bilinearly upsampled to input
// resolution, followed by a per-pixel softmax. Zero-initialized, so a fresh
// head predicts the uniform distribution.
class Head {
 public:
  Head() = default;
  Head(std::string name, int64_t cin, int64_t classes, int64_t up_factor);

  struct Pass {
    Tensor feat;
    Tensor logits_lo;
    Tensor prob;  // [H*up, W*up, classes]
  };

  const Tensor& forward(const Tensor& feat, Pass& pass) const;
  // Accumulates parameter grads and the feature gradient.
  void backward(Pass& pass, const Tensor& dprob, Tensor& dfeat);

  void rename(const std::string& name);
  std::vector<Param*> params() { return conv.params(); }
  std::vector<const Param*> params() const { return conv.params(); }

  Conv2d conv;
  int64_t up_factor = 1;
};

// Patch discriminator over self-information maps: strided convs with leaky
// ReLU, sigmoid scores on the final (spatially reduced) logit map.
class Discriminator {
 public:
  struct Config {
    int64_t in_channels = 4;
    int64_t base_width = 16;
    int64_t kernel = 4;
    double slope = 0.2;
  };

  Discriminator() = default;
  Discriminator(const Config& cfg, Rng& rng);

  struct Pass {
    Tensor x, z1, a1, z2, a2, logits, scores;
  };

  // Returns patch scores in the open unit interval, shape [oh, ow, 1].
  const Tensor& forward(const Tensor& self_info, Pass& pass) const;
  // Own update path: accumulates parameter grads only.
  void backward_params(Pass& pass, const Tensor& dscores);
  // Alignment path: input gradient only, parameters never touched.
  void backward_input(const Pass& pass, const Tensor& dscores, Tensor& dinput) const;

  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  Conv2d c1, c2, c3;
  double slope = 0.2;
};

enum class HeadKind { generalist, specialist };

// Feature extractor plus classification heads for one training step. At the
// first step the generalist is the only head and doubles as the specialist.
class SegModel {
 public:
  SegModel() = default;
  SegModel(const SegModelConfig& cfg, uint64_t seed);

  // Resolves the head: asking for the specialist at step 1 yields the
  // generalist (same head); at later steps without one it is a contract error.
  const Head& head(HeadKind kind) const;
  Head& head(HeadKind kind);
  bool has_specialist() const { return specialist.has_value(); }

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  uint64_t digest() const;
  void drop_grads();
  void realloc_grads();

  void save(std::ostream& os) const;
  static SegModel load(std::istream& is);

  SegModelConfig config;
  Encoder encoder;
  Head generalist;
  std::optional<Head> specialist;
  int64_t step_index = 1;
};

struct SegForward {
  ProbMap prob;           // [H, W, classes]
  FeatureStack features;  // taps in [C,H,W] layout, shallow to deep
};

// Full forward through one head, returning the probability map at input
// resolution and the distillation feature stack.
SegForward forward_segmentation(const SegModel& model, const Tensor& image,
                                HeadKind head = HeadKind::generalist);

// Deep copy with gradient buffers dropped; parameters are immutable and the
// content digest is recorded at freeze time.
class FrozenSnapshot {
 public:
  FrozenSnapshot() = default;
  explicit FrozenSnapshot(const SegModel& m);

  const SegModel& model() const { return model_; }
  uint64_t digest() const { return digest_; }
  uint64_t current_digest() const { return model_.digest(); }
  SegForward forward(const Tensor& image, HeadKind head = HeadKind::generalist) const;

 private:
  SegModel model_;
  uint64_t digest_ = 0;
};

FrozenSnapshot snapshot_freeze(const SegModel& model);

// Next-step bundle: weights copied from the snapshot, step index incremented,
// and (unless single_head) a specialist head initialized from the previous
// generalist.
SegModel spawn_next_step(const FrozenSnapshot& prev, bool with_specialist = true);

struct Partition {
  std::vector<Param*> segmentation;
  std::vector<Param*> discriminator;
};

// The two optimizer domains; disjoint and together covering every parameter.
Partition parameter_partition(SegModel& model, Discriminator& disc);

uint64_t digest_params(const std::vector<const Param*>& ps);
uint64_t digest_params(const std::vector<Param*>& ps);

struct ComponentInfo {
  std::string name;
  uint64_t digest = 0;
  std::vector<std::pair<std::string, std::vector<int64_t>>> tensors;
};

std::vector<ComponentInfo> component_infos(const SegModel& m, const Discriminator* d);

struct Checkpoint {
  SegModel model;
  std::optional<Discriminator> disc;
};

void save_checkpoint(const std::string& path, const SegModel& m, const Discriminator* d);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace muhdi
