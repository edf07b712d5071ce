#include "muhdi/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "muhdi/errors.hpp"

using nlohmann::json;

namespace muhdi {

namespace {

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ValidationError("config section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown config key '" + where + "." + it.key() + "'");
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

DomainSpec parse_domain(const json& j, const std::string& where) {
  check_keys(j, where,
             {"id", "hue_shift", "brightness_scale", "noise_sigma", "texture_strength",
              "seed"});
  DomainSpec d;
  take(j, "id", d.domain_id);
  take(j, "hue_shift", d.hue_shift);
  take(j, "brightness_scale", d.brightness_scale);
  take(j, "noise_sigma", d.noise_sigma);
  take(j, "texture_strength", d.texture_strength);
  take(j, "seed", d.seed);
  if (d.domain_id.empty())
    throw ValidationError("config key '" + where + ".id' must be a non-empty string");
  return d;
}

json domain_json(const DomainSpec& d) {
  return json{{"id", d.domain_id},
              {"hue_shift", d.hue_shift},
              {"brightness_scale", d.brightness_scale},
              {"noise_sigma", d.noise_sigma},
              {"texture_strength", d.texture_strength},
              {"seed", d.seed}};
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (domains.size() < 2)
    throw ValidationError("the benchmark needs one source and at least one target domain");
  std::set<std::string> ids;
  for (const DomainSpec& d : domains) {
    d.validate();
    if (!ids.insert(d.domain_id).second)
      throw ValidationError("duplicate domain id '" + d.domain_id + "'");
  }
  if (classes < 2 || classes > 7)
    throw ValidationError("benchmark.classes must lie in [2, 7]");
  if (n_train < 1 || n_eval < 1)
    throw ValidationError("benchmark sample counts must be positive");
  if (height < 16 || width < 16)
    throw ValidationError("benchmark resolution must be at least 16x16");
}

std::vector<std::string> BenchmarkConfig::target_ids() const {
  std::vector<std::string> out;
  for (size_t i = 1; i < domains.size(); ++i) out.push_back(domains[i].domain_id);
  return out;
}

std::string HarnessConfig::json() const {
  ::json j;
  j["output_dir"] = output_dir;
  j["eval_every"] = eval_every;
  ::json b;
  b["classes"] = benchmark.classes;
  b["height"] = benchmark.height;
  b["width"] = benchmark.width;
  b["n_train"] = benchmark.n_train;
  b["n_eval"] = benchmark.n_eval;
  b["domains"] = ::json::array();
  for (const DomainSpec& d : benchmark.domains) b["domains"].push_back(domain_json(d));
  j["benchmark"] = std::move(b);
  ::json t;
  t["method"] = to_string(trainer.method);
  t["seed"] = trainer.seed;
  t["iterations_per_step"] = trainer.iterations_per_step;
  t["batch_size"] = trainer.batch_size;
  t["lr_seg"] = trainer.lr_seg;
  t["momentum"] = trainer.momentum;
  t["weight_decay"] = trainer.weight_decay;
  t["lr_disc"] = trainer.lr_disc;
  t["weights"] = {{"lambda_adv", trainer.weights.lambda_adv},
                  {"lambda_dd", trainer.weights.lambda_dd},
                  {"lambda_fd", trainer.weights.lambda_fd},
                  {"lambda_prev", trainer.weights.lambda_prev}};
  t["pod_scales"] = trainer.pod_scales;
  t["pod_normalize"] = trainer.pod_normalize;
  t["warm_start_disc"] = trainer.warm_start_disc;
  t["disc_base_width"] = trainer.disc_base_width;
  t["model"] = {{"widths", trainer.model.widths},
                {"strides", trainer.model.strides},
                {"kernel", trainer.model.kernel}};
  j["trainer"] = std::move(t);
  return j.dump(2);
}

HarnessConfig HarnessConfig::parse(const std::string& text) {
  ::json j;
  try {
    j = ::json::parse(text);
  } catch (const ::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"output_dir", "eval_every", "benchmark", "trainer"});
  HarnessConfig c;
  take(j, "output_dir", c.output_dir);
  take(j, "eval_every", c.eval_every);

  if (j.contains("benchmark")) {
    const ::json& b = j.at("benchmark");
    check_keys(b, "benchmark",
               {"classes", "height", "width", "n_train", "n_eval", "domains"});
    take(b, "classes", c.benchmark.classes);
    take(b, "height", c.benchmark.height);
    take(b, "width", c.benchmark.width);
    take(b, "n_train", c.benchmark.n_train);
    take(b, "n_eval", c.benchmark.n_eval);
    if (b.contains("domains")) {
      if (!b.at("domains").is_array())
        throw ValidationError("config key 'benchmark.domains' must be an array");
      size_t k = 0;
      for (const ::json& dj : b.at("domains"))
        c.benchmark.domains.push_back(
            parse_domain(dj, "benchmark.domains[" + std::to_string(k++) + "]"));
    }
  }

  if (j.contains("trainer")) {
    const ::json& t = j.at("trainer");
    check_keys(t, "trainer",
               {"method", "seed", "iterations_per_step", "batch_size", "lr_seg",
                "momentum", "weight_decay", "lr_disc", "weights", "pod_scales",
                "pod_normalize", "warm_start_disc", "disc_base_width", "model"});
    if (t.contains("method")) c.trainer.method = method_from_string(t.at("method").get<std::string>());
    take(t, "seed", c.trainer.seed);
    take(t, "iterations_per_step", c.trainer.iterations_per_step);
    take(t, "batch_size", c.trainer.batch_size);
    take(t, "lr_seg", c.trainer.lr_seg);
    take(t, "momentum", c.trainer.momentum);
    take(t, "weight_decay", c.trainer.weight_decay);
    take(t, "lr_disc", c.trainer.lr_disc);
    if (t.contains("weights")) {
      const ::json& w = t.at("weights");
      check_keys(w, "trainer.weights",
                 {"lambda_adv", "lambda_dd", "lambda_fd", "lambda_prev"});
      take(w, "lambda_adv", c.trainer.weights.lambda_adv);
      take(w, "lambda_dd", c.trainer.weights.lambda_dd);
      take(w, "lambda_fd", c.trainer.weights.lambda_fd);
      take(w, "lambda_prev", c.trainer.weights.lambda_prev);
    }
    take(t, "pod_scales", c.trainer.pod_scales);
    take(t, "pod_normalize", c.trainer.pod_normalize);
    take(t, "warm_start_disc", c.trainer.warm_start_disc);
    take(t, "disc_base_width", c.trainer.disc_base_width);
    if (t.contains("model")) {
      const ::json& m = t.at("model");
      check_keys(m, "trainer.model", {"widths", "strides", "kernel", "classes"});
      take(m, "widths", c.trainer.model.widths);
      take(m, "strides", c.trainer.model.strides);
      take(m, "kernel", c.trainer.model.kernel);
      if (m.contains("classes") && m.at("classes").get<int64_t>() != c.benchmark.classes)
        throw ValidationError(
            "trainer.model.classes contradicts benchmark.classes; drop the former");
    }
  }
  c.trainer.model.classes = c.benchmark.classes;
  return c;
}

HarnessConfig HarnessConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

void HarnessConfig::validate() const {
  benchmark.validate();
  trainer.validate();
  if (trainer.model.classes != benchmark.classes)
    throw ValidationError("trainer.model.classes must equal benchmark.classes");
  if (eval_every < 0) throw ValidationError("eval_every must be non-negative");
  if (output_dir.empty()) throw ValidationError("output_dir must be set");
  // the rendered resolution must survive the feature downsampling and the
  // coarsest pooling scale
  int64_t down = trainer.model.upsample_factor();
  int64_t max_scale = 1;
  for (int64_t s : trainer.pod_scales) max_scale = std::max(max_scale, s);
  if (benchmark.height % (down * max_scale) != 0 ||
      benchmark.width % (down * max_scale) != 0)
    throw ValidationError("benchmark resolution must be divisible by " +
                          std::to_string(down * max_scale));
}

HarnessConfig apply_overrides(const HarnessConfig& cfg,
                              const std::vector<std::pair<std::string, std::string>>& kv) {
  ::json j = ::json::parse(cfg.json());
  for (const auto& [key, value] : kv) {
    std::string pointer = "/";
    for (char ch : key) pointer += ch == '.' ? '/' : ch;
    ::json::json_pointer p(pointer);
    ::json parsed;
    try {
      parsed = ::json::parse(value);
    } catch (const ::json::exception&) {
      parsed = value;  // plain string (e.g. --trainer.method muhdi)
    }
    try {
      // only existing leaves may be overridden; unknown paths are errors
      (void)j.at(p);
      j[p] = parsed;
    } catch (const ::json::exception&) {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  return HarnessConfig::parse(j.dump());
}

std::string resolve_output_dir(const std::string& configured) {
  const char* root = std::getenv("MUHDI_OUTPUT_ROOT");
  if (root == nullptr || *root == '\0') return configured;
  if (!configured.empty() && configured.front() == '/') return configured;
  return std::string(root) + "/" + configured;
}

}  // namespace muhdi
