#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "muhdi/data.hpp"
#include "muhdi/losses.hpp"
#include "muhdi/metrics.hpp"
#include "muhdi/model.hpp"

namespace muhdi {

// Ablation axis: which auxiliary terms and heads a run trains with.
enum class Method { continual_baseline, dd_only, fd_only, dd_fd, muhdi };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

struct MethodMask {
  bool dd = false;          // output-distribution distillation terms
  bool fd = false;          // pooled feature distillation term
  bool multi_head = false;  // specialist head at steps t >= 2
};

MethodMask method_mask(Method m);

struct TrainConfig {
  LossWeights weights;
  double lr_seg = 2.5e-4;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double lr_disc = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int64_t iterations_per_step = 3000;
  int64_t batch_size = 1;
  std::vector<int64_t> pod_scales = {1, 2};
  bool pod_normalize = false;
  Method method = Method::muhdi;
  uint64_t seed = 0;
  bool warm_start_disc = false;  // keep the previous step's discriminator
  SegModelConfig model;
  int64_t disc_base_width = 16;

  void validate() const;
};

// SGD with momentum over a fixed parameter list (the segmentation partition).
class SgdMomentum {
 public:
  explicit SgdMomentum(const std::vector<Param*>& params);
  void step(double lr, double momentum, double weight_decay);

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> vel_;
};

// Adam over a fixed parameter list (the discriminator partition).
class AdamOpt {
 public:
  explicit AdamOpt(const std::vector<Param*>& params);
  void step(double lr, double beta1, double beta2, double eps);

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  int64_t t_ = 0;
};

struct CurveRow {
  int64_t step = 0;
  int64_t iteration = 0;  // within the step
  double seg = 0.0, adv = 0.0, disc = 0.0;
  double kl_spec = 0.0, kl_prev = 0.0, pod = 0.0;
  double total = 0.0;
};

// One model+discriminator update on the given batches. `prev` must be null
// exactly when step == 1 (or when the method trains a bare single head and no
// distillation applies... it is required for any t >= 2 run).
class StepTrainer {
 public:
  StepTrainer(const TrainConfig& cfg, int64_t step, SegModel& model,
              Discriminator& disc, const FrozenSnapshot* prev);

  CurveRow iterate(const std::vector<Sample>& source, const std::vector<Sample>& target,
                   int64_t iteration);

 private:
  const TrainConfig& cfg_;
  int64_t step_;
  SegModel& model_;
  Discriminator& disc_;
  const FrozenSnapshot* prev_;
  MethodMask mask_;
  SgdMomentum seg_opt_;
  AdamOpt disc_opt_;
  bool partition_checked_ = false;
};

// Evaluation with the generalist head over full eval splits (or the first
// eval_max samples when positive).
std::vector<DomainMetrics> evaluate_domains(const SegModel& model,
                                            const std::vector<const DatasetManifest*>& domains,
                                            const DomainRoles& roles, int64_t step,
                                            int64_t eval_max, AccessLog* log);

struct RunConfig {
  TrainConfig train;
  std::string data_root;
  std::string run_dir;
  std::string source_id = "source";
  std::vector<std::string> target_ids = {"target-1", "target-2"};
  int64_t eval_max = 0;    // 0: the whole eval split
  int64_t eval_every = 0;  // >0: also evaluate seen targets every k iterations
  // Optional checkpoint to stand in for step 1 (shared across ablation
  // methods: every method trains identically at the first step).
  std::string init_step1_from;

  void validate() const;
};

struct EvalPoint {
  int64_t step = 0;
  int64_t iteration = 0;
  std::string domain_id;
  double miou = 0.0;
};

struct RunReport {
  Method method = Method::muhdi;
  uint64_t seed = 0;
  std::string run_dir;
  std::vector<MetricsReport> steps;
  std::vector<CurveRow> curves;
  std::vector<EvalPoint> eval_points;  // populated when eval_every > 0
  AuditReport audit_report;
  bool audit_clean = false;

  const MetricsReport& final_step() const { return steps.back(); }
};

// The full sequential protocol: train step 1..T, evaluate seen targets after
// each step, persist checkpoints/manifests/metrics/curves/access log/audit.
RunReport run_protocol(const RunConfig& rc);

// Step manifest helper (shared by trainer and tools).
std::string step_manifest_json(const TrainConfig& cfg, int64_t step,
                               const SegModel& model, const Discriminator* disc);

void write_curves_csv(const std::string& path, const std::vector<CurveRow>& rows);

}  // namespace muhdi
