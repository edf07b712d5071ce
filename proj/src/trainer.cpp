#include "muhdi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "muhdi/errors.hpp"
#include "muhdi/digest.hpp"
#include "muhdi/kernels.hpp"
#include "muhdi/nn.hpp"

namespace muhdi {

using nlohmann::json;

Method method_from_string(const std::string& s) {
  if (s == "continual_baseline") return Method::continual_baseline;
  if (s == "dd_only") return Method::dd_only;
  if (s == "fd_only") return Method::fd_only;
  if (s == "dd_fd") return Method::dd_fd;
  if (s == "muhdi") return Method::muhdi;
  throw ValidationError("unknown method '" + s + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::continual_baseline: return "continual_baseline";
    case Method::dd_only: return "dd_only";
    case Method::fd_only: return "fd_only";
    case Method::dd_fd: return "dd_fd";
    case Method::muhdi: return "muhdi";
  }
  throw ValidationError("unknown method enum value");
}

MethodMask method_mask(Method m) {
  switch (m) {
    case Method::continual_baseline: return {false, false, false};
    case Method::dd_only: return {true, false, false};
    case Method::fd_only: return {false, true, false};
    case Method::dd_fd: return {true, true, false};
    case Method::muhdi: return {true, true, true};
  }
  throw ValidationError("unknown method enum value");
}

void TrainConfig::validate() const {
  if (lr_seg <= 0.0 || lr_disc <= 0.0) throw ValidationError("learning rates must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw ValidationError("weight decay must be non-negative");
  if (iterations_per_step <= 0) throw ValidationError("iterations_per_step must be positive");
  if (batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (pod_scales.empty()) throw ValidationError("pod_scales must not be empty");
  for (int64_t s : pod_scales)
    if (s <= 0) throw ValidationError("pooling scales must be positive");
  if (weights.lambda_adv < 0.0 || weights.lambda_dd < 0.0 || weights.lambda_fd < 0.0 ||
      weights.lambda_prev < 0.0)
    throw ValidationError("loss weights must be non-negative");
  if (model.classes < 2) throw ValidationError("need at least two classes");
  if (disc_base_width <= 0) throw ValidationError("disc_base_width must be positive");
}

void RunConfig::validate() const {
  train.validate();
  if (data_root.empty()) throw ValidationError("data_root must be set");
  if (run_dir.empty()) throw ValidationError("run_dir must be set");
  if (target_ids.empty()) throw ValidationError("the protocol needs at least one target");
  if (eval_max < 0 || eval_every < 0)
    throw ValidationError("eval_max and eval_every must be non-negative");
  for (const std::string& t : target_ids)
    if (t == source_id) throw ValidationError("the source cannot double as a target");
}

SgdMomentum::SgdMomentum(const std::vector<Param*>& params) : params_(params) {
  vel_.reserve(params_.size());
  for (Param* p : params_) vel_.emplace_back(p->value.shape);
}

void SgdMomentum::step(double lr, double momentum, double weight_decay) {
  const kern::Ops& k = kern::ops();
  for (size_t i = 0; i < params_.size(); ++i) {
    Param* p = params_[i];
    if (!p->trainable()) throw ContractError("optimizer saw a frozen parameter: " + p->name);
    k.sgd_momentum(p->value.numel(), lr, momentum, weight_decay, p->value.data(),
                   p->grad.data(), vel_[i].data());
  }
}

AdamOpt::AdamOpt(const std::vector<Param*>& params) : params_(params) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.emplace_back(p->value.shape);
    v_.emplace_back(p->value.shape);
  }
}

void AdamOpt::step(double lr, double beta1, double beta2, double eps) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  const kern::Ops& k = kern::ops();
  for (size_t i = 0; i < params_.size(); ++i) {
    Param* p = params_[i];
    if (!p->trainable()) throw ContractError("optimizer saw a frozen parameter: " + p->name);
    k.adam(p->value.numel(), lr, beta1, beta2, eps, bc1, bc2, p->value.data(),
           p->grad.data(), m_[i].data(), v_[i].data());
  }
}

namespace {

void check_finite(double v, const char* component, int64_t iteration) {
  if (!std::isfinite(v))
    throw NumericalError("iteration " + std::to_string(iteration) + ": " + component +
                         " loss is not finite");
}

std::vector<Tensor> zero_like_taps(const Encoder::Pass& pass) {
  std::vector<Tensor> dtaps;
  dtaps.reserve(pass.act.size());
  for (const Tensor& t : pass.act) dtaps.emplace_back(t.shape);
  return dtaps;
}

FeatureStack taps_as_chw(const Encoder::Pass& pass) {
  FeatureStack fs;
  fs.layers.reserve(pass.act.size());
  for (const Tensor& t : pass.act) fs.layers.push_back(hwc_to_chw(t));
  return fs;
}

}  // namespace

StepTrainer::StepTrainer(const TrainConfig& cfg, int64_t step, SegModel& model,
                         Discriminator& disc, const FrozenSnapshot* prev)
    : cfg_(cfg),
      step_(step),
      model_(model),
      disc_(disc),
      prev_(prev),
      mask_(method_mask(cfg.method)),
      seg_opt_(model.params()),
      disc_opt_(disc.params()) {
  cfg_.validate();
  if (step_ < 1) throw ValidationError("step index must be >= 1");
  if (model_.step_index != step_)
    throw ContractError("model bundle was spawned for step " +
                        std::to_string(model_.step_index) + ", trainer runs step " +
                        std::to_string(step_));
  const bool use_spec = step_ >= 2 && mask_.multi_head;
  if (use_spec && !model_.has_specialist())
    throw ContractError("multi-head training needs a specialist head in the bundle");
  if (!use_spec && model_.has_specialist())
    throw ContractError("single-head training got a bundle with a specialist head");
  if (step_ >= 2 && prev_ == nullptr)
    throw ContractError("training past the first step needs the previous frozen model");
}

CurveRow StepTrainer::iterate(const std::vector<Sample>& source,
                              const std::vector<Sample>& target, int64_t iteration) {
  const LossWeights& W = cfg_.weights;
  const int64_t n = static_cast<int64_t>(source.size());
  if (n == 0 || target.size() != source.size())
    throw ValidationError("source and target batches must be non-empty and equal-sized");

  const bool later = step_ >= 2;
  const bool use_spec = later && mask_.multi_head;
  const bool dd_on = later && mask_.dd && W.lambda_dd != 0.0;
  const bool fd_on = later && mask_.fd && W.lambda_fd != 0.0;
  const bool adv_on = W.lambda_adv != 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (Param* p : model_.params()) p->grad.zero();

  Head& train_head = use_spec ? *model_.specialist : model_.generalist;
  Head& gen_head = model_.generalist;

  // ---- source passes: supervised term, plus distillation toward the
  // previous model where enabled.
  struct SrcState {
    Encoder::Pass enc;
    Head::Pass head;   // training head (specialist past step 1 in multi-head runs)
    Head::Pass gen;    // generalist, when distinct from the training head
    Tensor dprob_head;
    Tensor dprob_gen;
    Tensor self_info;           // discriminator input, detached by construction
    std::vector<Tensor> dtaps;  // tap gradients accumulated across terms
  };
  std::vector<SrcState> src(source.size());
  double seg_loss = 0.0, kl_prev_sum = 0.0, pod_loss = 0.0;

  for (int64_t i = 0; i < n; ++i) {
    SrcState& s = src[i];
    if (!source[i].label)
      throw ValidationError("source training sample carries no label");
    model_.encoder.forward(source[i].image, s.enc);
    const Tensor& feat = s.enc.act.back();
    train_head.forward(feat, s.head);
    seg_loss += inv_n * segmentation_ce(s.head.prob, *source[i].label);
    s.dprob_head = Tensor(s.head.prob.shape);
    segmentation_ce_backward(s.head.prob, *source[i].label, inv_n, s.dprob_head);
    s.self_info = self_information_map(s.head.prob);
    s.dtaps = zero_like_taps(s.enc);

    if (dd_on || fd_on) {
      SegForward prev_out = prev_->forward(source[i].image, HeadKind::generalist);
      if (dd_on) {
        const double px =
            static_cast<double>(prev_out.prob.dim(0) * prev_out.prob.dim(1));
        const Head::Pass* student = &s.head;
        Tensor* dstudent = &s.dprob_head;
        if (use_spec) {
          gen_head.forward(feat, s.gen);
          s.dprob_gen = Tensor(s.gen.prob.shape);
          student = &s.gen;
          dstudent = &s.dprob_gen;
        }
        kl_prev_sum += inv_n * kl_map(prev_out.prob, student->prob) / px;
        kl_map_backward_student(prev_out.prob, student->prob,
                                W.lambda_dd * W.lambda_prev * inv_n / px, *dstudent);
      }
      if (fd_on) {
        FeatureStack cur = taps_as_chw(s.enc);
        pod_loss += inv_n * local_pod_loss(cur, prev_out.features, cfg_.pod_scales,
                                           cfg_.pod_normalize);
        FeatureStack dcur;
        for (const Tensor& t : cur.layers) dcur.layers.emplace_back(t.shape);
        local_pod_backward(cur, prev_out.features, cfg_.pod_scales, cfg_.pod_normalize,
                           W.lambda_fd * inv_n, dcur);
        for (size_t l = 0; l < s.dtaps.size(); ++l)
          add_chw_to_hwc(dcur.layers[l], s.dtaps[l]);
      }
    }
  }
  check_finite(seg_loss, "segmentation", iteration);

  // ---- target passes: adversarial alignment through the training head and,
  // in multi-head runs, specialist-to-generalist distillation.
  struct TgtState {
    Encoder::Pass enc;
    Head::Pass head;
    Head::Pass gen;
    Discriminator::Pass disc;
    Tensor self_info;
    Tensor dprob_head;
    Tensor dprob_gen;
  };
  std::vector<TgtState> tgt(target.size());
  std::vector<Tensor> tgt_scores(target.size());
  double kl_spec_sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    TgtState& t = tgt[i];
    model_.encoder.forward(target[i].image, t.enc);
    const Tensor& feat = t.enc.act.back();
    train_head.forward(feat, t.head);
    t.self_info = self_information_map(t.head.prob);
    disc_.forward(t.self_info, t.disc);
    tgt_scores[i] = t.disc.scores;
    t.dprob_head = Tensor(t.head.prob.shape);
    if (dd_on && use_spec) {
      gen_head.forward(feat, t.gen);
      t.dprob_gen = Tensor(t.gen.prob.shape);
      const double px = static_cast<double>(t.gen.prob.dim(0) * t.gen.prob.dim(1));
      kl_spec_sum += inv_n * kl_map(t.head.prob, t.gen.prob) / px;
      kl_map_backward_student(t.head.prob, t.gen.prob, W.lambda_dd * inv_n / px,
                              t.dprob_gen);
    }
  }
  const double adv_loss = adversarial_fool_loss(tgt_scores);
  check_finite(adv_loss, "adversarial", iteration);

  double dd_loss = 0.0;
  if (dd_on) {
    std::vector<double> spec_terms, prev_terms{kl_prev_sum};
    if (use_spec) spec_terms.push_back(kl_spec_sum);
    dd_loss = generalist_distillation_loss(spec_terms, prev_terms, W.lambda_prev);
    check_finite(dd_loss, "distribution distillation", iteration);
  }
  if (fd_on) check_finite(pod_loss, "feature distillation", iteration);
  const double total = total_model_loss(seg_loss, adv_loss, dd_loss, pod_loss, W);
  check_finite(total, "total", iteration);

  if (adv_on) {
    std::vector<Tensor> dscores(tgt_scores.size());
    for (size_t i = 0; i < tgt_scores.size(); ++i) dscores[i] = Tensor(tgt_scores[i].shape);
    adversarial_fool_loss_backward(tgt_scores, W.lambda_adv, dscores);
    for (int64_t i = 0; i < n; ++i) {
      Tensor dmap(tgt[i].self_info.shape);
      disc_.backward_input(tgt[i].disc, dscores[i], dmap);
      self_information_backward(tgt[i].head.prob, dmap, tgt[i].dprob_head);
    }
  }

  uint64_t disc_digest_before = 0;
  if (!partition_checked_) disc_digest_before = digest_params(disc_.params());

  // ---- backward sweeps and the segmentation update.
  for (int64_t i = 0; i < n; ++i) {
    SrcState& s = src[i];
    train_head.backward(s.head, s.dprob_head, s.dtaps.back());
    if (dd_on && use_spec) gen_head.backward(s.gen, s.dprob_gen, s.dtaps.back());
    model_.encoder.backward(s.enc, s.dtaps);
  }
  for (int64_t i = 0; i < n; ++i) {
    TgtState& t = tgt[i];
    if (!adv_on && !(dd_on && use_spec)) break;  // nothing reaches the encoder
    std::vector<Tensor> dtaps = zero_like_taps(t.enc);
    if (adv_on) train_head.backward(t.head, t.dprob_head, dtaps.back());
    if (dd_on && use_spec) gen_head.backward(t.gen, t.dprob_gen, dtaps.back());
    model_.encoder.backward(t.enc, dtaps);
  }
  seg_opt_.step(cfg_.lr_seg, cfg_.momentum, cfg_.weight_decay);
  if (!partition_checked_ && digest_params(disc_.params()) != disc_digest_before)
    throw ContractError("segmentation update crossed into the discriminator partition");

  // ---- discriminator update on the detached self-information maps.
  uint64_t seg_digest_before = 0;
  if (!partition_checked_) seg_digest_before = digest_params(model_.params());
  for (Param* p : disc_.params()) p->grad.zero();
  std::vector<Discriminator::Pass> dsrc_pass(src.size());
  std::vector<Tensor> src_scores(src.size());
  for (int64_t i = 0; i < n; ++i) {
    disc_.forward(src[i].self_info, dsrc_pass[i]);
    src_scores[i] = dsrc_pass[i].scores;
  }
  const double disc_loss = discriminator_loss(src_scores, tgt_scores);
  check_finite(disc_loss, "discriminator", iteration);
  std::vector<Tensor> dsrc(src.size()), dtgt(tgt.size());
  for (size_t i = 0; i < src.size(); ++i) dsrc[i] = Tensor(src_scores[i].shape);
  for (size_t i = 0; i < tgt.size(); ++i) dtgt[i] = Tensor(tgt_scores[i].shape);
  discriminator_loss_backward(src_scores, tgt_scores, 1.0, dsrc, dtgt);
  for (int64_t i = 0; i < n; ++i) {
    disc_.backward_params(dsrc_pass[i], dsrc[i]);
    disc_.backward_params(tgt[i].disc, dtgt[i]);
  }
  disc_opt_.step(cfg_.lr_disc, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps);
  if (!partition_checked_) {
    if (digest_params(model_.params()) != seg_digest_before)
      throw ContractError("discriminator update crossed into the segmentation partition");
    partition_checked_ = true;
  }

  CurveRow row;
  row.step = step_;
  row.iteration = iteration;
  row.seg = seg_loss;
  row.adv = adv_loss;
  row.disc = disc_loss;
  row.kl_spec = kl_spec_sum;
  row.kl_prev = kl_prev_sum;
  row.pod = pod_loss;
  row.total = total;
  return row;
}

std::vector<DomainMetrics> evaluate_domains(const SegModel& model,
                                            const std::vector<const DatasetManifest*>& domains,
                                            const DomainRoles& roles, int64_t step,
                                            int64_t eval_max, AccessLog* log) {
  std::vector<DomainMetrics> out;
  out.reserve(domains.size());
  for (const DatasetManifest* m : domains) {
    int64_t count = m->n_eval;
    if (eval_max > 0 && eval_max < count) count = eval_max;
    std::vector<int64_t> idx(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = i;
    std::vector<Sample> samples = load_samples(*m, roles, Split::eval, idx, step, log);
    ConfusionMatrix cm(model.config.classes);
    for (const Sample& s : samples) {
      if (!s.label) throw ValidationError("eval sample carries no label");
      SegForward f = forward_segmentation(model, s.image, HeadKind::generalist);
      cm.accumulate(argmax_labels(f.prob), *s.label);
    }
    IouResult r = iou_from_confusion(cm);
    DomainMetrics dm;
    dm.domain_id = m->domain_id;
    dm.per_class_iou = r.per_class;
    dm.miou = r.miou;
    out.push_back(std::move(dm));
  }
  return out;
}

std::string step_manifest_json(const TrainConfig& cfg, int64_t step,
                               const SegModel& model, const Discriminator* disc) {
  json j;
  j["format_version"] = 1;
  j["step"] = step;
  j["method"] = to_string(cfg.method);
  j["seed"] = cfg.seed;
  j["iterations_per_step"] = cfg.iterations_per_step;
  j["batch_size"] = cfg.batch_size;
  j["weights"] = {{"lambda_adv", cfg.weights.lambda_adv},
                  {"lambda_dd", cfg.weights.lambda_dd},
                  {"lambda_fd", cfg.weights.lambda_fd},
                  {"lambda_prev", cfg.weights.lambda_prev}};
  j["optimizer"] = {{"lr_seg", cfg.lr_seg},
                    {"momentum", cfg.momentum},
                    {"weight_decay", cfg.weight_decay},
                    {"lr_disc", cfg.lr_disc}};
  j["pod_scales"] = cfg.pod_scales;
  j["pod_normalize"] = cfg.pod_normalize;
  j["components"] = json::array();
  for (const ComponentInfo& c : component_infos(model, disc)) {
    json cj;
    cj["name"] = c.name;
    cj["digest"] = hex_digest(c.digest);
    cj["tensors"] = json::array();
    for (const auto& [tname, tshape] : c.tensors)
      cj["tensors"].push_back({{"name", tname}, {"shape", tshape}});
    j["components"].push_back(std::move(cj));
  }
  return j.dump(2);
}

void write_curves_csv(const std::string& path, const std::vector<CurveRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot write " + path);
  os << "step,iteration,loss_seg,loss_adv,loss_disc,kl_spec,kl_prev,loss_pod,loss_total\n";
  char buf[256];
  for (const CurveRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.step), static_cast<long long>(r.iteration),
                  r.seg, r.adv, r.disc, r.kl_spec, r.kl_prev, r.pod, r.total);
    os << buf;
  }
  if (!os) throw ValidationError("short write to " + path);
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot write " + path);
  os << text;
  if (!os) throw ValidationError("short write to " + path);
}

}  // namespace

RunReport run_protocol(const RunConfig& rc) {
  rc.validate();
  namespace fs = std::filesystem;
  const TrainConfig& tc = rc.train;
  const MethodMask mask = method_mask(tc.method);

  DatasetManifest source_m =
      DatasetManifest::load(rc.data_root + "/" + rc.source_id + "/manifest.json");
  std::vector<DatasetManifest> target_m;
  target_m.reserve(rc.target_ids.size());
  for (const std::string& id : rc.target_ids)
    target_m.push_back(DatasetManifest::load(rc.data_root + "/" + id + "/manifest.json"));
  if (source_m.classes != tc.model.classes)
    throw ValidationError("dataset has " + std::to_string(source_m.classes) +
                          " classes, the model config expects " +
                          std::to_string(tc.model.classes));

  DomainRoles roles{rc.source_id, rc.target_ids};
  const int64_t T = static_cast<int64_t>(rc.target_ids.size());

  fs::create_directories(rc.run_dir);
  fs::create_directories(rc.run_dir + "/checkpoints");

  RunReport report;
  report.method = tc.method;
  report.seed = tc.seed;
  report.run_dir = rc.run_dir;

  AccessLog log;
  std::map<std::pair<int64_t, std::string>, double> history;
  std::map<std::string, int64_t> introduced_at;
  for (int64_t k = 1; k <= T; ++k) introduced_at[rc.target_ids[static_cast<size_t>(k - 1)]] = k;

  SegModel model;
  Discriminator disc;
  std::optional<FrozenSnapshot> prev;

  for (int64_t t = 1; t <= T; ++t) {
    Rng step_rng(mix_seed(tc.seed, static_cast<uint64_t>(t), 0x73746570ULL));
    const DatasetManifest& tgt_m = target_m[static_cast<size_t>(t - 1)];

    bool reused_step1 = false;
    if (t == 1) {
      if (!rc.init_step1_from.empty()) {
        Checkpoint ck = load_checkpoint(rc.init_step1_from);
        if (ck.model.config.classes != tc.model.classes ||
            ck.model.step_index != 1)
          throw ValidationError("the step-1 checkpoint does not match this run");
        model = std::move(ck.model);
        if (ck.disc) disc = std::move(*ck.disc);
        reused_step1 = true;
      } else {
        model = SegModel(tc.model, tc.seed);
        Rng drng(mix_seed(tc.seed, static_cast<uint64_t>(t), 0x64697363ULL));
        disc = Discriminator(
            Discriminator::Config{tc.model.classes, tc.disc_base_width, 4, 0.2}, drng);
      }
    } else {
      model = spawn_next_step(*prev, mask.multi_head);
      if (!tc.warm_start_disc) {
        Rng drng(mix_seed(tc.seed, static_cast<uint64_t>(t), 0x64697363ULL));
        disc = Discriminator(
            Discriminator::Config{tc.model.classes, tc.disc_base_width, 4, 0.2}, drng);
      }
    }

    std::vector<const DatasetManifest*> seen;
    for (int64_t k = 1; k <= t; ++k) seen.push_back(&target_m[static_cast<size_t>(k - 1)]);

    if (!reused_step1) {
      StepTrainer trainer(tc, t, model, disc, prev ? &*prev : nullptr);
      for (int64_t it = 0; it < tc.iterations_per_step; ++it) {
        std::vector<Sample> sb =
            load_batch(source_m, roles, Split::train, tc.batch_size, t, step_rng, &log);
        std::vector<Sample> tb =
            load_batch(tgt_m, roles, Split::train, tc.batch_size, t, step_rng, &log);
        report.curves.push_back(trainer.iterate(sb, tb, it));
        if (rc.eval_every > 0 && (it + 1) % rc.eval_every == 0 &&
            it + 1 < tc.iterations_per_step) {
          for (const DomainMetrics& dm :
               evaluate_domains(model, seen, roles, t, rc.eval_max, &log))
            report.eval_points.push_back({t, it + 1, dm.domain_id, dm.miou});
        }
      }
    }

    prev = snapshot_freeze(model);
    save_checkpoint(rc.run_dir + "/checkpoints/step_" + std::to_string(t) + ".bin", model,
                    &disc);
    write_text(rc.run_dir + "/manifest_" + std::to_string(t) + ".json",
               step_manifest_json(tc, t, model, &disc));

    MetricsReport mr;
    mr.step = t;
    mr.domains = evaluate_domains(model, seen, roles, t, rc.eval_max, &log);
    mr.miou_avg = miou_avg_of(mr.domains);
    for (const DomainMetrics& dm : mr.domains) history[{t, dm.domain_id}] = dm.miou;
    mr.forgetting = forgetting_from_history(history, introduced_at, t);
    mr.save(rc.run_dir + "/metrics_" + std::to_string(t) + ".json");
    report.steps.push_back(std::move(mr));
  }

  write_curves_csv(rc.run_dir + "/curves.csv", report.curves);
  if (!report.eval_points.empty()) {
    std::ostringstream ss;
    ss << "step,iteration,domain,miou\n";
    char buf[160];
    for (const EvalPoint& p : report.eval_points) {
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%s,%.9g\n",
                    static_cast<long long>(p.step), static_cast<long long>(p.iteration),
                    p.domain_id.c_str(), p.miou);
      ss << buf;
    }
    write_text(rc.run_dir + "/eval_curve.csv", ss.str());
  }
  log.save_jsonl(rc.run_dir + "/access_log.jsonl");
  report.audit_report = audit(log, roles, T);
  report.audit_clean = report.audit_report.clean();
  write_text(rc.run_dir + "/audit.json", report.audit_report.json());
  return report;
}

}  // namespace muhdi
