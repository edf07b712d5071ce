#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "muhdi/losses.hpp"
#include "muhdi/rng.hpp"
#include "muhdi/tensor.hpp"

namespace muhdi {

// A procedural domain: the seed fixes scene layout (and therefore labels);
// the shift parameters act on pixels only.
struct DomainSpec {
  std::string domain_id;
  double hue_shift = 0.0;         // degrees in [0, 360)
  double brightness_scale = 1.0;  // positive
  double noise_sigma = 0.0;       // additive, on the [0,1] scale
  double texture_strength = 0.0;  // multiplicative fixed-pattern amplitude
  uint64_t seed = 0;

  void validate() const;
};

struct Sample {
  Tensor image;  // [H, W, 3], values in [0, 1]
  std::optional<LabelMap> label;
  std::string domain_id;
};

// In-memory rendering of one sample (before any file round trip).
struct Rendered {
  std::vector<uint8_t> rgb;    // H*W*3, quantized
  std::vector<uint8_t> label;  // H*W class indices
};

// Pure function of (spec, classes, resolution, index): the benchmark's ground
// truth generator.
Rendered render_sample(const DomainSpec& spec, int64_t classes, int64_t h, int64_t w,
                       int64_t index);

struct DatasetManifest {
  std::string root;  // directory holding this domain
  std::string domain_id;
  DomainSpec spec;
  int64_t classes = 0;
  int64_t height = 0, width = 0;
  int64_t n_train = 0, n_eval = 0;
  bool train_labels = false;
  // Relative paths, in index order.
  std::vector<std::string> train_images, train_label_files;
  std::vector<std::string> eval_images, eval_label_files;
  std::map<std::string, std::string> file_hashes;  // rel path -> 64-bit hex
  std::string pixel_digest;                        // decoded content, platform-stable

  std::string json() const;
  static DatasetManifest parse(const std::string& text, const std::string& root);
  void save(const std::string& path) const;
  static DatasetManifest load(const std::string& path);
};

// Renders a full domain to <out_root>/<domain_id>/... and writes its manifest.
// Labels are stored for eval always, and for train only when train_labels is
// set (the source domain). Resolution must stay divisible by the feature
// downsampling times the largest pooling scale.
DatasetManifest generate_domain(const DomainSpec& spec, int64_t n_train, int64_t n_eval,
                                int64_t classes, int64_t h, int64_t w,
                                const std::string& out_root, bool train_labels,
                                int64_t feature_downsample = 8,
                                int64_t max_pod_scale = 2);

// Re-hashes every file listed by the manifest; true when all match.
bool verify_manifest(const DatasetManifest& m);

// Which domain plays which role in the sequence; target indices are 1-based.
struct DomainRoles {
  std::string source;
  std::vector<std::string> targets;

  // 0 for the source, k>=1 for the k-th target, -1 for unknown ids.
  int64_t target_index(const std::string& id) const;
};

struct AccessRecord {
  int64_t step = 0;
  std::string domain_id;
  std::string split;  // "train" | "eval"
  int64_t count = 0;
};

class AccessLog {
 public:
  void append(const AccessRecord& r) { records_.push_back(r); }
  const std::vector<AccessRecord>& records() const { return records_; }

  void save_jsonl(const std::string& path) const;
  static AccessLog load_jsonl(const std::string& path);

 private:
  std::vector<AccessRecord> records_;
};

enum class Split { train, eval };

// Loads the given sample indices. Train reads are protocol-checked: the
// source is always available, target k only at step k; a forbidden read is
// logged and then refused. Target train samples carry no label.
std::vector<Sample> load_samples(const DatasetManifest& m, const DomainRoles& roles,
                                 Split split, const std::vector<int64_t>& indices,
                                 int64_t step, AccessLog* log);

// Uniformly sampled batch via the caller's generator.
std::vector<Sample> load_batch(const DatasetManifest& m, const DomainRoles& roles,
                               Split split, int64_t size, int64_t step, Rng& rng,
                               AccessLog* log);

struct AuditViolation {
  int64_t step = 0;
  std::string domain_id;
  std::string detail;
};

struct AuditReport {
  int64_t total_steps = 0;
  int64_t train_reads = 0, eval_reads = 0;
  std::vector<AuditViolation> violations;

  bool clean() const { return violations.empty(); }
  std::string json() const;
};

// Train reads at step t must touch only {source, target t}; eval reads are
// unconstrained. Violations are report content, never exceptions.
AuditReport audit(const AccessLog& log, const DomainRoles& roles, int64_t total_steps);

}  // namespace muhdi
