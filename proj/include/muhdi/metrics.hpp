#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "muhdi/losses.hpp"
#include "muhdi/tensor.hpp"

namespace muhdi {

// counts[gt * classes + pred], nonnegative.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int64_t classes)
      : classes_(classes), counts_(static_cast<size_t>(classes * classes), 0) {}

  void accumulate(const LabelMap& pred, const LabelMap& gt);
  void merge(const ConfusionMatrix& other);

  int64_t classes() const { return classes_; }
  int64_t at(int64_t gt, int64_t pred) const { return counts_[gt * classes_ + pred]; }
  int64_t total() const;

 private:
  int64_t classes_ = 0;
  std::vector<int64_t> counts_;
};

// Per-class IoU in percent; classes absent from both sides carry NaN and are
// excluded from the mean.
struct IouResult {
  std::vector<double> per_class;  // percent, NaN when excluded
  double miou = 0.0;              // percent, over included classes
};

IouResult iou_from_confusion(const ConfusionMatrix& cm);

// Argmax decode of a probability map into a label map.
LabelMap argmax_labels(const ProbMap& prob);

struct DomainMetrics {
  std::string domain_id;
  std::vector<double> per_class_iou;
  double miou = 0.0;
};

struct MetricsReport {
  int64_t step = 0;
  std::vector<DomainMetrics> domains;  // evaluated domains, in benchmark order
  double miou_avg = 0.0;
  std::map<std::string, double> forgetting;  // present once a domain is re-evaluated

  std::string json() const;
  static MetricsReport parse(const std::string& text);
  void save(const std::string& path) const;
  static MetricsReport load(const std::string& path);
};

// Computes miou_avg from the domain list (mean of per-domain mIoU).
double miou_avg_of(const std::vector<DomainMetrics>& domains);

// forgetting(d) = mIoU at the step that introduced d − mIoU at the final
// step; positive means the model forgot.
std::map<std::string, double> forgetting_from_history(
    const std::map<std::pair<int64_t, std::string>, double>& history,
    const std::map<std::string, int64_t>& introduced_at, int64_t final_step);

// One ablation row: a method plus its end-of-run aggregates over seeds.
struct AblationRow {
  std::string method;
  bool dd = false, fd = false, multi_head = false;
  double miou_avg = 0.0;                      // mean over seeds
  std::map<std::string, double> forgetting;   // mean over seeds
  int64_t seeds = 0;
};

// Human-readable fixed-width table (percent, one decimal).
std::string format_ablation_table(const std::vector<AblationRow>& rows);
std::string format_step_table(const MetricsReport& rep);

}  // namespace muhdi
