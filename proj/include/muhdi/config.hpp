#pragma once

#include <string>
#include <utility>
#include <vector>

#include "muhdi/data.hpp"
#include "muhdi/trainer.hpp"

namespace muhdi {

// Version string echoed into run directories; bump on behavior changes.
inline constexpr const char* kVersionString = "muhdi 1.0.0";

struct BenchmarkConfig {
  int64_t classes = 4;
  int64_t height = 64, width = 64;
  int64_t n_train = 200, n_eval = 50;
  std::vector<DomainSpec> domains;  // first entry is the labeled source

  void validate() const;
  const std::string& source_id() const { return domains.front().domain_id; }
  std::vector<std::string> target_ids() const;
};

// The single config file driving every subcommand.
struct HarnessConfig {
  BenchmarkConfig benchmark;
  TrainConfig trainer;
  std::string output_dir = "out";
  int64_t eval_every = 0;  // >0: also evaluate seen targets every k iterations

  std::string json() const;
  // Strict: unknown keys are config errors naming the key.
  static HarnessConfig parse(const std::string& text);
  static HarnessConfig load(const std::string& path);

  std::string data_dir() const { return output_dir + "/data"; }
  void validate() const;
};

// Flat dotted-path overrides (e.g. {"trainer.seed", "3"}); values are parsed
// as JSON scalars/arrays, falling back to plain strings. Unknown paths and
// type mismatches are config errors.
HarnessConfig apply_overrides(const HarnessConfig& cfg,
                              const std::vector<std::pair<std::string, std::string>>& kv);

// MUHDI_OUTPUT_ROOT reroots a relative output_dir; absolute paths win.
std::string resolve_output_dir(const std::string& configured);

}  // namespace muhdi
