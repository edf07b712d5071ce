#pragma once

#include <cstdint>
#include <vector>

#include "muhdi/tensor.hpp"

namespace muhdi {

// Probability clamp used inside logs of the loss terms.
inline constexpr double kLossEps = 1e-7;

// [H,W,C] per-pixel class probabilities; each pixel sums to 1.
using ProbMap = Tensor;
// [H,W,C] per-pixel per-class self-information, entries in [0, 1/e].
using SelfInfoMap = Tensor;

struct LabelMap {
  int64_t h = 0, w = 0;
  std::vector<int32_t> y;  // row-major class ids

  static LabelMap filled(int64_t h, int64_t w, int32_t cls) {
    LabelMap m;
    m.h = h;
    m.w = w;
    m.y.assign(static_cast<size_t>(h * w), cls);
    return m;
  }
};

// Intermediate feature maps chosen for distillation, shallow to deep.
// Layer l has shape [C_l, H_l, W_l].
struct FeatureStack {
  std::vector<Tensor> layers;
};

struct LossWeights {
  double lambda_adv = 1e-3;  // adversarial alignment weight
  double lambda_dd = 1e-5;   // output distribution distillation weight
  double lambda_fd = 1e-2;   // feature distillation weight
  double lambda_prev = 1e-5; // previous-model term inside distribution distillation
};

// Throws ValidationError if entries leave [0,1] or any pixel's sum deviates
// from 1 by more than sum_tol.
void validate_prob_map(const ProbMap& p, double sum_tol);

// I[h][w][c] = -p * ln(p), with 0 ln 0 := 0.
SelfInfoMap self_information_map(const ProbMap& p);
// Accumulates d(sum(dmap * I))/dp into dp (same shape as p).
void self_information_backward(const ProbMap& p, const Tensor& dmap, Tensor& dp);

// Binary cross-entropy on a single score; pred clamped to [eps, 1-eps].
double bce(double pred, double label);
double bce_dpred(double pred, double label);

// Mean BCE against label 1 over all source patch scores plus mean BCE
// against label 0 over all target patch scores. Each tensor holds the patch
// scores of one sample. Throws ValidationError on an empty side.
double discriminator_loss(const std::vector<Tensor>& d_source,
                          const std::vector<Tensor>& d_target);
void discriminator_loss_backward(const std::vector<Tensor>& d_source,
                                 const std::vector<Tensor>& d_target, double scale,
                                 std::vector<Tensor>& d_source_grad,
                                 std::vector<Tensor>& d_target_grad);

// Mean BCE against label 1 over all target patch scores: the model-side
// alignment term that rewards target outputs the discriminator reads as
// source-like. The discriminator's own parameters are never updated by it.
double adversarial_fool_loss(const std::vector<Tensor>& d_target);
void adversarial_fool_loss_backward(const std::vector<Tensor>& d_target, double scale,
                                    std::vector<Tensor>& d_target_grad);

// Mean over pixels of -ln p[label]; labels outside [0, C) throw.
double segmentation_ce(const ProbMap& p, const LabelMap& labels);
void segmentation_ce_backward(const ProbMap& p, const LabelMap& labels, double scale,
                              Tensor& dp);

// Sum over pixels of KL(teacher || student): sum_c p_t ln(p_t / p_s), with
// zero teacher entries contributing zero and the student clamped to >= eps.
double kl_map(const ProbMap& teacher, const ProbMap& student);
void kl_map_backward_student(const ProbMap& teacher, const ProbMap& student,
                             double scale, Tensor& dstudent);

// mean(kl_specialist) + lambda_prev * mean(kl_previous); an empty list
// contributes zero, both empty throws ValidationError.
double generalist_distillation_loss(const std::vector<double>& kl_specialist,
                                    const std::vector<double>& kl_previous,
                                    double lambda_prev);

// Width- and height-pooled descriptor of one [C,H,W] feature map. For each
// scale s the map splits into s x s regions; per channel and region the
// row means are emitted, then the column means. Order: scale-major, then
// channel, then region (row-major). With normalize, each scale's segment is
// L2-normalized. Throws ValidationError naming any scale that does not
// divide H or W.
std::vector<double> pod_embed(const Tensor& feature, const std::vector<int64_t>& scales,
                              bool normalize = false);

// (1/L) * sum_l || psi(cur_l) - psi(prev_l) ||^2
double local_pod_loss(const FeatureStack& current, const FeatureStack& previous,
                      const std::vector<int64_t>& scales, bool normalize = false);
// Accumulates scale * d(loss)/d(current_l) into dcurrent (shapes must match).
void local_pod_backward(const FeatureStack& current, const FeatureStack& previous,
                        const std::vector<int64_t>& scales, bool normalize,
                        double scale, FeatureStack& dcurrent);

// seg + lambda_adv*adv + lambda_dd*dd + lambda_fd*fd. Throws NumericalError
// naming the first non-finite component.
double total_model_loss(double seg, double adv, double dd, double fd,
                        const LossWeights& w);

}  // namespace muhdi
