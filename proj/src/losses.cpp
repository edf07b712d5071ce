#include "muhdi/losses.hpp"

#include <cfloat>
#include <cmath>
#include <string>

#include "muhdi/errors.hpp"
#include "muhdi/kernels.hpp"

namespace muhdi {
namespace {

int64_t patch_count(const std::vector<Tensor>& batch) {
  int64_t n = 0;
  for (const Tensor& t : batch) n += t.numel();
  return n;
}

void check_rank3(const Tensor& t, const char* what) {
  if (t.shape.size() != 3)
    throw ValidationError(std::string(what) + " must have shape [H,W,C]");
}

}  // namespace

void validate_prob_map(const ProbMap& p, double sum_tol) {
  check_rank3(p, "probability map");
  const int64_t hw = p.dim(0) * p.dim(1), c = p.dim(2);
  const double* d = p.data();
  for (int64_t i = 0; i < hw; ++i) {
    double s = 0.0;
    for (int64_t k = 0; k < c; ++k) {
      double v = d[i * c + k];
      if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
        throw ValidationError("probability map entry outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > sum_tol)
      throw ValidationError("probability map pixel does not sum to 1");
  }
}

SelfInfoMap self_information_map(const ProbMap& p) {
  validate_prob_map(p, 1e-4);
  const int64_t n = p.numel();
  SelfInfoMap out(p.shape);
  std::vector<double> clamped(n), lg(n);
  for (int64_t i = 0; i < n; ++i) clamped[i] = p.v[i] > DBL_MIN ? p.v[i] : DBL_MIN;
  kern::ops().vlog(n, clamped.data(), lg.data());
  for (int64_t i = 0; i < n; ++i) out.v[i] = -(p.v[i] * lg[i]);
  return out;
}

void self_information_backward(const ProbMap& p, const Tensor& dmap, Tensor& dp) {
  if (!p.same_shape(dmap) || !p.same_shape(dp))
    throw ValidationError("self-information backward shape mismatch");
  const int64_t n = p.numel();
  // dI/dp = -(ln p + 1); clamped below eps so saturated pixels stay bounded
  for (int64_t i = 0; i < n; ++i) {
    double q = p.v[i] > kLossEps ? p.v[i] : kLossEps;
    dp.v[i] += dmap.v[i] * (-(std::log(q) + 1.0));
  }
}

double bce(double pred, double label) {
  if (label != 0.0 && label != 1.0)
    throw ValidationError("binary cross-entropy label must be 0 or 1");
  double q = pred;
  if (q < kLossEps) q = kLossEps;
  if (q > 1.0 - kLossEps) q = 1.0 - kLossEps;
  return label == 1.0 ? -std::log(q) : -std::log(1.0 - q);
}

double bce_dpred(double pred, double label) {
  if (label != 0.0 && label != 1.0)
    throw ValidationError("binary cross-entropy label must be 0 or 1");
  if (pred < kLossEps || pred > 1.0 - kLossEps) return 0.0;  // flat clamp region
  return label == 1.0 ? -1.0 / pred : 1.0 / (1.0 - pred);
}

double discriminator_loss(const std::vector<Tensor>& d_source,
                          const std::vector<Tensor>& d_target) {
  const int64_t ns = patch_count(d_source), nt = patch_count(d_target);
  if (ns == 0 || nt == 0)
    throw ValidationError("discriminator loss requires non-empty source and target batches");
  double ls = 0.0, lt = 0.0;
  for (const Tensor& t : d_source)
    for (double s : t.v) ls += bce(s, 1.0);
  for (const Tensor& t : d_target)
    for (double s : t.v) lt += bce(s, 0.0);
  return ls / static_cast<double>(ns) + lt / static_cast<double>(nt);
}

void discriminator_loss_backward(const std::vector<Tensor>& d_source,
                                 const std::vector<Tensor>& d_target, double scale,
                                 std::vector<Tensor>& d_source_grad,
                                 std::vector<Tensor>& d_target_grad) {
  const int64_t ns = patch_count(d_source), nt = patch_count(d_target);
  if (ns == 0 || nt == 0)
    throw ValidationError("discriminator loss requires non-empty source and target batches");
  for (size_t b = 0; b < d_source.size(); ++b)
    for (int64_t i = 0; i < d_source[b].numel(); ++i)
      d_source_grad[b].v[i] += scale / static_cast<double>(ns) * bce_dpred(d_source[b].v[i], 1.0);
  for (size_t b = 0; b < d_target.size(); ++b)
    for (int64_t i = 0; i < d_target[b].numel(); ++i)
      d_target_grad[b].v[i] += scale / static_cast<double>(nt) * bce_dpred(d_target[b].v[i], 0.0);
}

double adversarial_fool_loss(const std::vector<Tensor>& d_target) {
  const int64_t nt = patch_count(d_target);
  if (nt == 0) throw ValidationError("fool loss requires a non-empty target batch");
  double l = 0.0;
  for (const Tensor& t : d_target)
    for (double s : t.v) l += bce(s, 1.0);
  return l / static_cast<double>(nt);
}

void adversarial_fool_loss_backward(const std::vector<Tensor>& d_target, double scale,
                                    std::vector<Tensor>& d_target_grad) {
  const int64_t nt = patch_count(d_target);
  if (nt == 0) throw ValidationError("fool loss requires a non-empty target batch");
  for (size_t b = 0; b < d_target.size(); ++b)
    for (int64_t i = 0; i < d_target[b].numel(); ++i)
      d_target_grad[b].v[i] += scale / static_cast<double>(nt) * bce_dpred(d_target[b].v[i], 1.0);
}

double segmentation_ce(const ProbMap& p, const LabelMap& labels) {
  check_rank3(p, "probability map");
  if (labels.h != p.dim(0) || labels.w != p.dim(1))
    throw ValidationError("label map size does not match probability map");
  const int64_t hw = p.dim(0) * p.dim(1), c = p.dim(2);
  std::vector<double> py(hw), lg(hw);
  for (int64_t i = 0; i < hw; ++i) {
    int32_t y = labels.y[i];
    if (y < 0 || y >= c)
      throw ValidationError("label id " + std::to_string(y) + " outside [0, " +
                            std::to_string(c) + ")");
    double q = p.v[i * c + y];
    py[i] = q > kLossEps ? q : kLossEps;
  }
  kern::ops().vlog(hw, py.data(), lg.data());
  return -kern::ops().sum(hw, lg.data()) / static_cast<double>(hw);
}

void segmentation_ce_backward(const ProbMap& p, const LabelMap& labels, double scale,
                              Tensor& dp) {
  if (!p.same_shape(dp)) throw ValidationError("segmentation CE backward shape mismatch");
  const int64_t hw = p.dim(0) * p.dim(1), c = p.dim(2);
  const double inv_n = 1.0 / static_cast<double>(hw);
  for (int64_t i = 0; i < hw; ++i) {
    int32_t y = labels.y[i];
    double q = p.v[i * c + y];
    if (q < kLossEps) continue;  // clamped in the forward pass
    dp.v[i * c + y] += scale * (-inv_n / q);
  }
}

double kl_map(const ProbMap& teacher, const ProbMap& student) {
  check_rank3(teacher, "teacher map");
  if (!teacher.same_shape(student))
    throw ValidationError("teacher and student maps must have the same shape");
  const int64_t n = teacher.numel();
  std::vector<double> ct(n), cs(n), lt(n), ls(n);
  for (int64_t i = 0; i < n; ++i) {
    ct[i] = teacher.v[i] > DBL_MIN ? teacher.v[i] : DBL_MIN;
    cs[i] = student.v[i] > kLossEps ? student.v[i] : kLossEps;
  }
  kern::ops().vlog(n, ct.data(), lt.data());
  kern::ops().vlog(n, cs.data(), ls.data());
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i)
    if (teacher.v[i] > 0.0) acc += teacher.v[i] * (lt[i] - ls[i]);
  return acc;
}

void kl_map_backward_student(const ProbMap& teacher, const ProbMap& student,
                             double scale, Tensor& dstudent) {
  if (!teacher.same_shape(student) || !teacher.same_shape(dstudent))
    throw ValidationError("KL backward shape mismatch");
  const int64_t n = teacher.numel();
  for (int64_t i = 0; i < n; ++i) {
    double pt = teacher.v[i];
    double ps = student.v[i];
    if (pt > 0.0 && ps >= kLossEps) dstudent.v[i] += scale * (-pt / ps);
  }
}

double generalist_distillation_loss(const std::vector<double>& kl_specialist,
                                    const std::vector<double>& kl_previous,
                                    double lambda_prev) {
  if (kl_specialist.empty() && kl_previous.empty())
    throw ValidationError("distillation loss needs at least one KL term");
  double l = 0.0;
  if (!kl_specialist.empty())
    l += kern::ops().sum(static_cast<int64_t>(kl_specialist.size()), kl_specialist.data()) /
         static_cast<double>(kl_specialist.size());
  if (!kl_previous.empty())
    l += lambda_prev *
         kern::ops().sum(static_cast<int64_t>(kl_previous.size()), kl_previous.data()) /
         static_cast<double>(kl_previous.size());
  return l;
}

namespace {

void check_feature(const Tensor& f) {
  if (f.shape.size() != 3) throw ValidationError("pod feature must have shape [C,H,W]");
}

void check_scales(const Tensor& f, const std::vector<int64_t>& scales) {
  const int64_t h = f.dim(1), w = f.dim(2);
  if (scales.empty()) throw ValidationError("pod needs at least one scale");
  for (int64_t s : scales) {
    if (s <= 0 || h % s != 0 || w % s != 0)
      throw ValidationError("pod scale " + std::to_string(s) + " does not divide feature map " +
                            std::to_string(h) + "x" + std::to_string(w));
  }
}

int64_t pod_embed_size(const Tensor& f, const std::vector<int64_t>& scales) {
  int64_t n = 0;
  for (int64_t s : scales) n += f.dim(0) * s * (f.dim(1) + f.dim(2));
  return n;
}

// Shared iteration for embed and scatter. emit(index, plane, y0, x0, rh, rw,
// is_row, k) describes one pooled mean: over row k (is_row) or column k of
// the region at (y0, x0).
template <typename F>
void pod_walk(const Tensor& f, const std::vector<int64_t>& scales, F&& emit) {
  const int64_t c = f.dim(0), h = f.dim(1), w = f.dim(2);
  int64_t idx = 0;
  for (int64_t s : scales) {
    const int64_t rh = h / s, rw = w / s;
    for (int64_t ch = 0; ch < c; ++ch) {
      for (int64_t ri = 0; ri < s; ++ri) {
        for (int64_t rj = 0; rj < s; ++rj) {
          const int64_t y0 = ri * rh, x0 = rj * rw;
          for (int64_t r = 0; r < rh; ++r) emit(idx++, ch, y0, x0, rh, rw, true, r);
          for (int64_t k = 0; k < rw; ++k) emit(idx++, ch, y0, x0, rh, rw, false, k);
        }
      }
    }
  }
}

void normalize_segments(std::vector<double>& psi, const Tensor& f,
                        const std::vector<int64_t>& scales) {
  int64_t start = 0;
  for (int64_t s : scales) {
    const int64_t len = f.dim(0) * s * (f.dim(1) + f.dim(2));
    double n2 = kern::ops().dot(len, psi.data() + start, psi.data() + start);
    double inv = 1.0 / std::max(std::sqrt(n2), 1e-12);
    kern::ops().scale(len, inv, psi.data() + start);
    start += len;
  }
}

}  // namespace

std::vector<double> pod_embed(const Tensor& feature, const std::vector<int64_t>& scales,
                              bool normalize) {
  check_feature(feature);
  check_scales(feature, scales);
  const int64_t h = feature.dim(1), w = feature.dim(2);
  std::vector<double> psi(pod_embed_size(feature, scales));
  pod_walk(feature, scales,
           [&](int64_t idx, int64_t ch, int64_t y0, int64_t x0, int64_t rh, int64_t rw,
               bool is_row, int64_t k) {
             const double* plane = feature.data() + ch * h * w;
             double acc = 0.0;
             if (is_row) {
               const double* row = plane + (y0 + k) * w + x0;
               for (int64_t x = 0; x < rw; ++x) acc += row[x];
               psi[idx] = acc / static_cast<double>(rw);
             } else {
               for (int64_t y = 0; y < rh; ++y) acc += plane[(y0 + y) * w + x0 + k];
               psi[idx] = acc / static_cast<double>(rh);
             }
           });
  if (normalize) normalize_segments(psi, feature, scales);
  return psi;
}

double local_pod_loss(const FeatureStack& current, const FeatureStack& previous,
                      const std::vector<int64_t>& scales, bool normalize) {
  if (current.layers.empty() || current.layers.size() != previous.layers.size())
    throw ValidationError("feature stacks must be non-empty and the same length");
  double acc = 0.0;
  for (size_t l = 0; l < current.layers.size(); ++l) {
    if (!current.layers[l].same_shape(previous.layers[l]))
      throw ValidationError("feature stack layer shapes differ");
    std::vector<double> pc = pod_embed(current.layers[l], scales, normalize);
    std::vector<double> pp = pod_embed(previous.layers[l], scales, normalize);
    for (size_t i = 0; i < pc.size(); ++i) {
      double d = pc[i] - pp[i];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(current.layers.size());
}

void local_pod_backward(const FeatureStack& current, const FeatureStack& previous,
                        const std::vector<int64_t>& scales, bool normalize,
                        double scale, FeatureStack& dcurrent) {
  if (current.layers.empty() || current.layers.size() != previous.layers.size() ||
      current.layers.size() != dcurrent.layers.size())
    throw ValidationError("feature stacks must be non-empty and the same length");
  const double inv_l = 1.0 / static_cast<double>(current.layers.size());
  for (size_t l = 0; l < current.layers.size(); ++l) {
    const Tensor& cur = current.layers[l];
    if (!cur.same_shape(previous.layers[l]) || !cur.same_shape(dcurrent.layers[l]))
      throw ValidationError("feature stack layer shapes differ");
    std::vector<double> raw = pod_embed(cur, scales, false);
    std::vector<double> pp = pod_embed(previous.layers[l], scales, normalize);

    std::vector<double> dpsi(raw.size());
    if (!normalize) {
      for (size_t i = 0; i < raw.size(); ++i)
        dpsi[i] = scale * inv_l * 2.0 * (raw[i] - pp[i]);
    } else {
      // d/dx of ||x/||x|| - y||^2 = (2/||x||) * (xhat_diff - xhat * <xhat, xhat_diff>)
      int64_t start = 0;
      for (int64_t s : scales) {
        const int64_t len = cur.dim(0) * s * (cur.dim(1) + cur.dim(2));
        double* xr = raw.data() + start;
        const double* yp = pp.data() + start;
        double n = std::max(std::sqrt(kern::ops().dot(len, xr, xr)), 1e-12);
        std::vector<double> xhat(len), diff(len);
        for (int64_t i = 0; i < len; ++i) {
          xhat[i] = xr[i] / n;
          diff[i] = xhat[i] - yp[i];
        }
        double proj = kern::ops().dot(len, xhat.data(), diff.data());
        for (int64_t i = 0; i < len; ++i)
          dpsi[start + i] = scale * inv_l * 2.0 / n * (diff[i] - xhat[i] * proj);
        start += len;
      }
    }

    Tensor& dst = dcurrent.layers[l];
    const int64_t h = cur.dim(1), w = cur.dim(2);
    pod_walk(cur, scales,
             [&](int64_t idx, int64_t ch, int64_t y0, int64_t x0, int64_t rh, int64_t rw,
                 bool is_row, int64_t k) {
               double* plane = dst.data() + ch * h * w;
               if (is_row) {
                 double g = dpsi[idx] / static_cast<double>(rw);
                 double* row = plane + (y0 + k) * w + x0;
                 for (int64_t x = 0; x < rw; ++x) row[x] += g;
               } else {
                 double g = dpsi[idx] / static_cast<double>(rh);
                 for (int64_t y = 0; y < rh; ++y) plane[(y0 + y) * w + x0 + k] += g;
               }
             });
  }
}

double total_model_loss(double seg, double adv, double dd, double fd,
                        const LossWeights& w) {
  const struct {
    const char* name;
    double value;
  } parts[] = {{"segmentation", seg},
               {"adversarial", adv},
               {"distribution distillation", dd},
               {"feature distillation", fd}};
  for (const auto& part : parts)
    if (!std::isfinite(part.value))
      throw NumericalError(std::string("non-finite ") + part.name + " loss");
  double total = seg + w.lambda_adv * adv + w.lambda_dd * dd + w.lambda_fd * fd;
  if (!std::isfinite(total)) throw NumericalError("non-finite total loss");
  return total;
}

}  // namespace muhdi
