#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "muhdi/config.hpp"
#include "muhdi/data.hpp"
#include "muhdi/errors.hpp"
#include "muhdi/metrics.hpp"
#include "muhdi/model.hpp"
#include "muhdi/trainer.hpp"

using nlohmann::json;

namespace muhdi {
namespace {

namespace fs = std::filesystem;

// Leftover "--a.b.c value" / "--a.b.c=value" tokens become config overrides.
std::vector<std::pair<std::string, std::string>> pair_overrides(
    std::vector<std::string> extras) {
  // CLI11 hands remaining() backwards-compatible in given order
  std::vector<std::pair<std::string, std::string>> kv;
  for (size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0)
      throw ValidationError("unexpected argument '" + tok + "'");
    tok = tok.substr(2);
    std::string key, value;
    size_t eq = tok.find('=');
    if (eq != std::string::npos) {
      key = tok.substr(0, eq);
      value = tok.substr(eq + 1);
    } else {
      key = tok;
      if (i + 1 >= extras.size())
        throw ValidationError("override '--" + key + "' is missing a value");
      value = extras[++i];
    }
    kv.emplace_back(key, value);
  }
  return kv;
}

HarnessConfig load_config(const std::string& path,
                          const std::vector<std::string>& extras) {
  HarnessConfig cfg = HarnessConfig::load(path);
  cfg = apply_overrides(cfg, pair_overrides(extras));
  cfg.output_dir = resolve_output_dir(cfg.output_dir);
  cfg.validate();
  return cfg;
}

bool manifest_matches(const DatasetManifest& m, const DomainSpec& spec, int64_t n_train,
                      int64_t n_eval, int64_t classes, int64_t h, int64_t w,
                      bool train_labels) {
  return m.spec.domain_id == spec.domain_id && m.spec.hue_shift == spec.hue_shift &&
         m.spec.brightness_scale == spec.brightness_scale &&
         m.spec.noise_sigma == spec.noise_sigma &&
         m.spec.texture_strength == spec.texture_strength && m.spec.seed == spec.seed &&
         m.n_train == n_train && m.n_eval == n_eval && m.classes == classes &&
         m.height == h && m.width == w && m.train_labels == train_labels;
}

int cmd_generate(const HarnessConfig& cfg, bool force) {
  const BenchmarkConfig& b = cfg.benchmark;
  for (size_t i = 0; i < b.domains.size(); ++i) {
    const DomainSpec& spec = b.domains[i];
    const bool train_labels = i == 0;
    const std::string dir = cfg.data_dir() + "/" + spec.domain_id;
    const std::string manifest_path = dir + "/manifest.json";
    if (fs::exists(manifest_path)) {
      bool ok = false;
      try {
        DatasetManifest m = DatasetManifest::load(manifest_path);
        ok = manifest_matches(m, spec, b.n_train, b.n_eval, b.classes, b.height, b.width,
                              train_labels) &&
             verify_manifest(m);
      } catch (const ValidationError&) {
        ok = false;
      }
      if (ok) {
        std::printf("[skip] %-12s up to date at %s\n", spec.domain_id.c_str(),
                    dir.c_str());
        continue;
      }
      if (!force)
        throw ValidationError("existing data at " + dir +
                              " does not match the config; rerun with --force to "
                              "regenerate");
      fs::remove_all(dir);
    }
    DatasetManifest m = generate_domain(spec, b.n_train, b.n_eval, b.classes, b.height,
                                        b.width, cfg.data_dir(), train_labels);
    std::printf("[done] %-12s %lld train / %lld eval -> %s\n", spec.domain_id.c_str(),
                static_cast<long long>(m.n_train), static_cast<long long>(m.n_eval),
                dir.c_str());
  }
  return 0;
}

RunConfig make_run_config(const HarnessConfig& cfg, const std::string& run_dir,
                          const std::string& init_step1) {
  RunConfig rc;
  rc.train = cfg.trainer;
  rc.data_root = cfg.data_dir();
  rc.source_id = cfg.benchmark.source_id();
  rc.target_ids = cfg.benchmark.target_ids();
  rc.eval_every = cfg.eval_every;
  rc.init_step1_from = init_step1;
  rc.run_dir = run_dir.empty()
                   ? cfg.output_dir + "/runs/" + to_string(cfg.trainer.method) +
                         "/seed_" + std::to_string(cfg.trainer.seed)
                   : run_dir;
  return rc;
}

void write_config_echo(const HarnessConfig& cfg, const std::string& run_dir) {
  json echo;
  echo["version"] = kVersionString;
  echo["config"] = json::parse(cfg.json());
  echo["data"] = json::object();
  for (const DomainSpec& d : cfg.benchmark.domains) {
    DatasetManifest m =
        DatasetManifest::load(cfg.data_dir() + "/" + d.domain_id + "/manifest.json");
    echo["data"][d.domain_id] = m.pixel_digest;
  }
  std::ofstream os(run_dir + "/config_echo.json", std::ios::trunc);
  os << echo.dump(2) << "\n";
  if (!os) throw ValidationError("cannot write " + run_dir + "/config_echo.json");
}

int run_one(const HarnessConfig& cfg, const std::string& run_dir,
            const std::string& init_step1, RunReport* out) {
  RunConfig rc = make_run_config(cfg, run_dir, init_step1);
  RunReport rep = run_protocol(rc);
  write_config_echo(cfg, rc.run_dir);
  if (out != nullptr) *out = rep;
  return rep.audit_clean ? 0 : 3;
}

int cmd_train(const HarnessConfig& cfg, const std::string& run_dir,
              const std::string& init_step1) {
  RunReport rep;
  int rc = run_one(cfg, run_dir, init_step1, &rep);
  for (const MetricsReport& mr : rep.steps) std::fputs(format_step_table(mr).c_str(), stdout);
  std::printf("method %s seed %llu: final mIoU-Avg %.1f, audit %s\n",
              to_string(rep.method).c_str(), static_cast<unsigned long long>(rep.seed),
              rep.final_step().miou_avg, rep.audit_clean ? "clean" : "VIOLATED");
  std::printf("run directory: %s\n", rep.run_dir.c_str());
  return rc;
}

int cmd_evaluate(const HarnessConfig& cfg, const std::string& checkpoint, int64_t step,
                 const std::string& out_path) {
  Checkpoint ck = load_checkpoint(checkpoint);
  if (step <= 0) step = ck.model.step_index;
  const std::vector<std::string> targets = cfg.benchmark.target_ids();
  if (step > static_cast<int64_t>(targets.size()))
    throw ValidationError("step " + std::to_string(step) + " exceeds the benchmark's " +
                          std::to_string(targets.size()) + " targets");
  std::vector<DatasetManifest> manifests;
  std::vector<const DatasetManifest*> seen;
  for (int64_t k = 1; k <= step; ++k)
    manifests.push_back(DatasetManifest::load(cfg.data_dir() + "/" +
                                              targets[static_cast<size_t>(k - 1)] +
                                              "/manifest.json"));
  for (const DatasetManifest& m : manifests) seen.push_back(&m);
  DomainRoles roles{cfg.benchmark.source_id(), targets};
  MetricsReport mr;
  mr.step = step;
  mr.domains = evaluate_domains(ck.model, seen, roles, step, 0, nullptr);
  mr.miou_avg = miou_avg_of(mr.domains);
  std::fputs(format_step_table(mr).c_str(), stdout);
  if (!out_path.empty()) mr.save(out_path);
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_ablate(HarnessConfig cfg, const std::string& methods_arg,
               const std::string& seeds_arg, bool share_step1) {
  std::vector<std::string> method_names = split_list(methods_arg);
  if (method_names.empty()) throw ValidationError("the ablation needs at least one method");
  std::vector<Method> methods;
  for (const std::string& m : method_names) methods.push_back(method_from_string(m));
  std::vector<uint64_t> seeds;
  for (const std::string& s : split_list(seeds_arg)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ValidationError("bad seed '" + s + "'");
    }
  }
  if (seeds.empty()) throw ValidationError("the ablation needs at least one seed");

  const std::string abl_dir = cfg.output_dir + "/ablation";
  struct SubRun {
    uint64_t seed = 0;
    std::string run_dir;
    bool failed = false;
    std::string error;
    double miou_avg = 0.0;
    std::map<std::string, double> forgetting;
  };
  std::map<std::string, std::vector<SubRun>> results;
  bool any_failed = false;

  for (uint64_t seed : seeds) {
    std::string step1_ckpt;  // trained by the seed's first method, shared after
    for (Method m : methods) {
      HarnessConfig sub = cfg;
      sub.trainer.method = m;
      sub.trainer.seed = seed;
      SubRun r;
      r.seed = seed;
      r.run_dir = abl_dir + "/" + to_string(m) + "/seed_" + std::to_string(seed);
      std::printf("[run ] %s seed %llu\n", to_string(m).c_str(),
                  static_cast<unsigned long long>(seed));
      std::fflush(stdout);
      try {
        RunReport rep;
        int rc = run_one(sub, r.run_dir, share_step1 ? step1_ckpt : "", &rep);
        if (rc != 0) throw ProtocolViolation("data-access audit failed");
        r.miou_avg = rep.final_step().miou_avg;
        r.forgetting = rep.final_step().forgetting;
        if (share_step1 && step1_ckpt.empty())
          step1_ckpt = r.run_dir + "/checkpoints/step_1.bin";
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
        any_failed = true;
        std::printf("[fail] %s seed %llu: %s\n", to_string(m).c_str(),
                    static_cast<unsigned long long>(seed), e.what());
      }
      results[to_string(m)].push_back(std::move(r));
    }
  }

  // aggregate into the ablation table
  std::vector<AblationRow> rows;
  json summary;
  summary["version"] = kVersionString;
  summary["seeds"] = seeds;
  summary["rows"] = json::array();
  for (Method m : methods) {
    const std::vector<SubRun>& rs = results[to_string(m)];
    MethodMask mask = method_mask(m);
    AblationRow row;
    row.method = to_string(m);
    row.dd = mask.dd;
    row.fd = mask.fd;
    row.multi_head = mask.multi_head;
    bool row_failed = false;
    int64_t ok = 0;
    for (const SubRun& r : rs) {
      if (r.failed) {
        row_failed = true;
        continue;
      }
      ++ok;
      row.miou_avg += r.miou_avg;
      for (const auto& [d, v] : r.forgetting) row.forgetting[d] += v;
    }
    if (ok > 0) {
      row.miou_avg /= static_cast<double>(ok);
      for (auto& [d, v] : row.forgetting) v /= static_cast<double>(ok);
    }
    row.seeds = ok;
    if (row_failed) row.method += " [FAILED]";
    json rj;
    rj["method"] = to_string(m);
    rj["dd"] = mask.dd;
    rj["fd"] = mask.fd;
    rj["multi_head"] = mask.multi_head;
    rj["failed"] = row_failed;
    rj["miou_avg_mean"] = row.miou_avg;
    rj["forgetting_mean"] = row.forgetting;
    rj["per_seed"] = json::array();
    for (const SubRun& r : rs) {
      json sj;
      sj["seed"] = r.seed;
      sj["run_dir"] = r.run_dir;
      sj["failed"] = r.failed;
      if (r.failed) {
        sj["error"] = r.error;
      } else {
        sj["miou_avg"] = r.miou_avg;
        sj["forgetting"] = r.forgetting;
      }
      rj["per_seed"].push_back(std::move(sj));
    }
    summary["rows"].push_back(std::move(rj));
    rows.push_back(std::move(row));
  }

  fs::create_directories(abl_dir);
  std::string table = format_ablation_table(rows);
  {
    std::ofstream os(abl_dir + "/ablation_summary.json", std::ios::trunc);
    os << summary.dump(2) << "\n";
    if (!os) throw ValidationError("cannot write " + abl_dir + "/ablation_summary.json");
  }
  {
    std::ofstream os(abl_dir + "/ablation_table.txt", std::ios::trunc);
    os << table;
    if (!os) throw ValidationError("cannot write " + abl_dir + "/ablation_table.txt");
  }
  std::fputs(table.c_str(), stdout);
  return any_failed ? 1 : 0;
}

int cmd_report(const HarnessConfig& cfg, std::string abl_dir) {
  if (abl_dir.empty()) abl_dir = cfg.output_dir + "/ablation";
  std::ifstream is(abl_dir + "/ablation_summary.json");
  if (!is)
    throw ValidationError("no ablation summary at " + abl_dir +
                          "; run the ablate subcommand first");
  json summary;
  try {
    is >> summary;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad ablation summary: ") + e.what());
  }
  std::vector<AblationRow> rows;
  for (const json& rj : summary.at("rows")) {
    AblationRow row;
    row.method = rj.at("method").get<std::string>();
    if (rj.value("failed", false)) row.method += " [FAILED]";
    row.dd = rj.at("dd").get<bool>();
    row.fd = rj.at("fd").get<bool>();
    row.multi_head = rj.at("multi_head").get<bool>();
    row.miou_avg = rj.at("miou_avg_mean").get<double>();
    for (const auto& [d, v] : rj.at("forgetting_mean").items())
      row.forgetting[d] = v.get<double>();
    int64_t n = 0;
    for (const json& sj : rj.at("per_seed"))
      if (!sj.value("failed", false)) ++n;
    row.seeds = n;
    rows.push_back(std::move(row));
  }
  std::fputs(format_ablation_table(rows).c_str(), stdout);
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Continual adaptation benchmark harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersionString));

  std::string config_path, run_dir, init_step1, checkpoint, out_path, abl_dir;
  std::string methods = "continual_baseline,dd_only,fd_only,dd_fd,muhdi";
  std::string seeds = "0,1,2";
  int64_t step = 0;
  bool force = false, no_share = false;

  CLI::App* gen = app.add_subcommand("generate", "Render the benchmark domains to disk");
  gen->add_option("--config", config_path)->required();
  gen->add_flag("--force", force, "Regenerate domains whose data differs from the config");
  gen->allow_extras();

  CLI::App* train = app.add_subcommand("train", "Run the sequential protocol once");
  train->add_option("--config", config_path)->required();
  train->add_option("--run-dir", run_dir, "Run directory (default: under output_dir)");
  train->add_option("--init-step1", init_step1,
                    "Reuse a step-1 checkpoint instead of training the first step");
  train->allow_extras();

  CLI::App* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on seen targets");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--step", step, "Protocol step (default: the checkpoint's)");
  eval->add_option("--out", out_path, "Write the metrics report here");
  eval->allow_extras();

  CLI::App* abl = app.add_subcommand("ablate", "Train a method x seed grid and aggregate");
  abl->add_option("--config", config_path)->required();
  abl->add_option("--methods", methods, "Comma-separated method list");
  abl->add_option("--seeds", seeds, "Comma-separated seed list");
  abl->add_flag("--no-share-step1", no_share,
                "Train step 1 separately per run instead of reusing the first");
  abl->allow_extras();

  CLI::App* rep = app.add_subcommand("report", "Print the ablation table from a summary");
  rep->add_option("--config", config_path)->required();
  rep->add_option("--ablation-dir", abl_dir, "Summary location (default: under output_dir)");
  rep->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  HarnessConfig cfg = load_config(config_path, sub->remaining());
  if (sub == gen) return cmd_generate(cfg, force);
  if (sub == train) return cmd_train(cfg, run_dir, init_step1);
  if (sub == eval) return cmd_evaluate(cfg, checkpoint, step, out_path);
  if (sub == abl) return cmd_ablate(cfg, methods, seeds, !no_share);
  return cmd_report(cfg, abl_dir);
}

}  // namespace
}  // namespace muhdi

int main(int argc, char** argv) {
  try {
    return muhdi::dispatch(argc, argv);
  } catch (const muhdi::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const muhdi::ProtocolViolation& e) {
    std::fprintf(stderr, "protocol violation: %s\n", e.what());
    return 3;
  } catch (const muhdi::NumericalError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
