#include "muhdi/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "muhdi/digest.hpp"
#include "muhdi/errors.hpp"
#include "muhdi/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace muhdi {

namespace {

// --------------------------------------------------------------------------
// Color helpers (arithmetic only)

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
    return;
  }
  double t;
  if (mx == r)
    t = std::fmod((g - b) / d, 6.0);
  else if (mx == g)
    t = (b - r) / d + 2.0;
  else
    t = (r - g) / d + 4.0;
  if (t < 0.0) t += 6.0;
  h = 60.0 * t;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  double c = v * s;
  double hp = h / 60.0;
  double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  int sector = std::min(static_cast<int>(hp), 5);
  double r1 = 0, g1 = 0, b1 = 0;
  switch (sector) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  double m = v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

double hash01(uint64_t x) {
  return static_cast<double>(splitmix64(x) >> 11) * 0x1.0p-53;
}

// --------------------------------------------------------------------------
// Scene geometry. Class k >= 1 owns one shape kind; all tests are arithmetic
// in shape-local rotated coordinates.

constexpr double kPalette[7][3] = {
    {0.50, 0.50, 0.50},  // background
    {0.85, 0.20, 0.20},  // circle
    {0.20, 0.78, 0.25},  // square
    {0.20, 0.30, 0.85},  // triangle
    {0.85, 0.80, 0.20},  // bar
    {0.80, 0.25, 0.80},  // ring
    {0.20, 0.80, 0.80},  // cross
};

bool inside_shape(int cls, double u, double v, double r) {
  switch (cls) {
    case 1:
      return u * u + v * v <= r * r;
    case 2:
      return std::max(std::fabs(u), std::fabs(v)) <= 0.8 * r;
    case 3: {
      // Equilateral triangle, circumradius r: half-plane sign tests.
      const double ax = 0.0, ay = r;
      const double bx = -0.8660254037844386 * r, by = -0.5 * r;
      const double cx = 0.8660254037844386 * r, cy = -0.5 * r;
      double d1 = (bx - ax) * (v - ay) - (by - ay) * (u - ax);
      double d2 = (cx - bx) * (v - by) - (cy - by) * (u - bx);
      double d3 = (ax - cx) * (v - cy) - (ay - cy) * (u - cx);
      bool neg = d1 < 0 || d2 < 0 || d3 < 0;
      bool pos = d1 > 0 || d2 > 0 || d3 > 0;
      return !(neg && pos);
    }
    case 4:
      return std::fabs(u) <= r && std::fabs(v) <= 0.35 * r;
    case 5: {
      double q = u * u + v * v;
      return q <= r * r && q >= 0.3025 * r * r;  // inner radius 0.55 r
    }
    case 6:
      return (std::fabs(u) <= 0.3 * r && std::fabs(v) <= r) ||
             (std::fabs(v) <= 0.3 * r && std::fabs(u) <= r);
    default:
      return false;
  }
}

}  // namespace

void DomainSpec::validate() const {
  if (domain_id.empty() || domain_id.find('/') != std::string::npos)
    throw ValidationError("domain_id must be a non-empty path-safe name");
  if (!(hue_shift >= 0.0 && hue_shift < 360.0))
    throw ValidationError("hue_shift must lie in [0, 360)");
  if (!(brightness_scale > 0.0))
    throw ValidationError("brightness_scale must be positive");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");
  if (!(texture_strength >= 0.0))
    throw ValidationError("texture_strength must be nonnegative");
}

Rendered render_sample(const DomainSpec& spec, int64_t classes, int64_t h, int64_t w,
                       int64_t index) {
  // Layout stream: shift parameters must never touch it, so labels are a
  // function of (seed, index) alone.
  Rng layout(mix_seed(spec.seed, static_cast<uint64_t>(index), 0x7363656eULL));

  std::vector<double> img(static_cast<size_t>(h * w * 3));
  std::vector<uint8_t> lab(static_cast<size_t>(h * w), 0);

  double bg_jitter = 0.95 + 0.1 * layout.uniform();
  for (int64_t i = 0; i < h * w; ++i)
    for (int64_t c = 0; c < 3; ++c) img[i * 3 + c] = kPalette[0][c] * bg_jitter;

  int64_t nshapes = layout.uniform_int(2, 4);
  for (int64_t s = 0; s < nshapes; ++s) {
    int cls = static_cast<int>(layout.uniform_int(1, classes - 1));
    double mx = 0.15 * static_cast<double>(w), my = 0.15 * static_cast<double>(h);
    double cx = layout.uniform(mx, static_cast<double>(w) - mx);
    double cy = layout.uniform(my, static_cast<double>(h) - my);
    double dim = static_cast<double>(std::min(h, w));
    double r = layout.uniform(0.09 * dim, 0.22 * dim);
    // Rotation as a rejection-sampled unit vector.
    double ca = 1.0, sa = 0.0;
    for (;;) {
      double a = layout.uniform(-1.0, 1.0), b = layout.uniform(-1.0, 1.0);
      double n2 = a * a + b * b;
      if (n2 > 0.01 && n2 <= 1.0) {
        double inv = 1.0 / std::sqrt(n2);
        ca = a * inv;
        sa = b * inv;
        break;
      }
    }
    double jitter = 0.9 + 0.2 * layout.uniform();

    int64_t box = static_cast<int64_t>(std::ceil(1.3 * r)) + 1;
    int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(cy) - box);
    int64_t y1 = std::min<int64_t>(h - 1, static_cast<int64_t>(cy) + box);
    int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(cx) - box);
    int64_t x1 = std::min<int64_t>(w - 1, static_cast<int64_t>(cx) + box);
    for (int64_t y = y0; y <= y1; ++y) {
      for (int64_t x = x0; x <= x1; ++x) {
        double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        double u = ca * dx + sa * dy;
        double v = -sa * dx + ca * dy;
        if (!inside_shape(cls, u, v, r)) continue;
        lab[y * w + x] = static_cast<uint8_t>(cls);
        for (int64_t c = 0; c < 3; ++c)
          img[(y * w + x) * 3 + c] = std::min(1.0, kPalette[cls][c] * jitter);
      }
    }
  }

  // Pixel shift pipeline: hue -> brightness -> fixed-pattern texture ->
  // additive noise -> clamp -> quantize. Labels are untouched by design.
  if (spec.hue_shift != 0.0) {
    for (int64_t i = 0; i < h * w; ++i) {
      double hh, ss, vv;
      rgb_to_hsv(img[i * 3], img[i * 3 + 1], img[i * 3 + 2], hh, ss, vv);
      hh = std::fmod(hh + spec.hue_shift, 360.0);
      hsv_to_rgb(hh, ss, vv, img[i * 3], img[i * 3 + 1], img[i * 3 + 2]);
    }
  }
  if (spec.brightness_scale != 1.0)
    for (auto& p : img) p *= spec.brightness_scale;
  if (spec.texture_strength > 0.0) {
    uint64_t tseed = mix_seed(spec.seed, 0x74657874ULL);
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        double t = hash01(mix_seed(tseed, static_cast<uint64_t>(y),
                                   static_cast<uint64_t>(x)));
        double f = 1.0 + spec.texture_strength * (t - 0.5);
        for (int64_t c = 0; c < 3; ++c) img[(y * w + x) * 3 + c] *= f;
      }
  }
  if (spec.noise_sigma > 0.0) {
    Rng noise(mix_seed(spec.seed, static_cast<uint64_t>(index), 0x6e6f6973ULL));
    for (auto& p : img) p += spec.noise_sigma * noise.gauss();
  }

  Rendered out;
  out.rgb.resize(img.size());
  for (size_t i = 0; i < img.size(); ++i) {
    double v = std::min(1.0, std::max(0.0, img[i]));
    out.rgb[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  out.label = std::move(lab);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

std::string DatasetManifest::json() const {
  ::json j;
  j["format_version"] = 1;
  j["domain_id"] = domain_id;
  j["spec"] = {{"domain_id", spec.domain_id},
               {"hue_shift", spec.hue_shift},
               {"brightness_scale", spec.brightness_scale},
               {"noise_sigma", spec.noise_sigma},
               {"texture_strength", spec.texture_strength},
               {"seed", spec.seed}};
  j["classes"] = classes;
  j["resolution"] = {height, width};
  j["n_train"] = n_train;
  j["n_eval"] = n_eval;
  j["train_labels"] = train_labels;
  j["files"] = {{"train_images", train_images},
                {"train_labels", train_label_files},
                {"eval_images", eval_images},
                {"eval_labels", eval_label_files}};
  j["file_hashes"] = file_hashes;
  j["pixel_digest"] = pixel_digest;
  return j.dump(2);
}

DatasetManifest DatasetManifest::parse(const std::string& text, const std::string& root) {
  ::json j;
  try {
    j = ::json::parse(text);
  } catch (const ::json::exception& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    DatasetManifest m;
    m.root = root;
    m.domain_id = j.at("domain_id").get<std::string>();
    const auto& s = j.at("spec");
    m.spec.domain_id = s.at("domain_id").get<std::string>();
    m.spec.hue_shift = s.at("hue_shift").get<double>();
    m.spec.brightness_scale = s.at("brightness_scale").get<double>();
    m.spec.noise_sigma = s.at("noise_sigma").get<double>();
    m.spec.texture_strength = s.at("texture_strength").get<double>();
    m.spec.seed = s.at("seed").get<uint64_t>();
    m.classes = j.at("classes").get<int64_t>();
    m.height = j.at("resolution").at(0).get<int64_t>();
    m.width = j.at("resolution").at(1).get<int64_t>();
    m.n_train = j.at("n_train").get<int64_t>();
    m.n_eval = j.at("n_eval").get<int64_t>();
    m.train_labels = j.at("train_labels").get<bool>();
    const auto& f = j.at("files");
    m.train_images = f.at("train_images").get<std::vector<std::string>>();
    m.train_label_files = f.at("train_labels").get<std::vector<std::string>>();
    m.eval_images = f.at("eval_images").get<std::vector<std::string>>();
    m.eval_label_files = f.at("eval_labels").get<std::vector<std::string>>();
    m.file_hashes = j.at("file_hashes").get<std::map<std::string, std::string>>();
    m.pixel_digest = j.at("pixel_digest").get<std::string>();
    return m;
  } catch (const ::json::exception& e) {
    throw ValidationError(std::string("manifest is missing required fields: ") + e.what());
  }
}

void DatasetManifest::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write manifest: " + path);
  os << json() << "\n";
  os.flush();
  if (!os) throw ValidationError("manifest write failed: " + path);
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open manifest: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), fs::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::string index_name(int64_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05lld.png", static_cast<long long>(i));
  return buf;
}

std::string write_hashed_png(const std::string& root, const std::string& rel,
                             const png::Image8& img,
                             std::map<std::string, std::string>& hashes) {
  std::vector<uint8_t> bytes = png::encode_png(img);
  const std::string path = root + "/" + rel;
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ValidationError("cannot open for writing: " + path);
  size_t wrote = std::fwrite(bytes.data(), 1, bytes.size(), f);
  int rc = std::fclose(f);
  if (wrote != bytes.size() || rc != 0) throw ValidationError("short write: " + path);
  hashes[rel] = hex_digest(fnv1a64(bytes.data(), bytes.size()));
  return rel;
}

}  // namespace

DatasetManifest generate_domain(const DomainSpec& spec, int64_t n_train, int64_t n_eval,
                                int64_t classes, int64_t h, int64_t w,
                                const std::string& out_root, bool train_labels,
                                int64_t feature_downsample, int64_t max_pod_scale) {
  spec.validate();
  if (classes < 2 || classes > 7)
    throw ValidationError("classes must lie in [2, 7]");
  if (n_train < 1 || n_eval < 1)
    throw ValidationError("need at least one train and one eval sample");
  auto divisible = [&](int64_t dim) {
    return dim % feature_downsample == 0 &&
           (dim / feature_downsample) % max_pod_scale == 0;
  };
  if (h < 16 || w < 16 || !divisible(h) || !divisible(w))
    throw ValidationError(
        "resolution must stay divisible by the pooling scales after feature "
        "downsampling");

  DatasetManifest m;
  m.domain_id = spec.domain_id;
  m.root = out_root + "/" + spec.domain_id;
  m.spec = spec;
  m.classes = classes;
  m.height = h;
  m.width = w;
  m.n_train = n_train;
  m.n_eval = n_eval;
  m.train_labels = train_labels;

  fs::create_directories(m.root + "/train/images");
  if (train_labels) fs::create_directories(m.root + "/train/labels");
  fs::create_directories(m.root + "/eval/images");
  fs::create_directories(m.root + "/eval/labels");

  Fnv1a64 pixel_hash;
  auto emit = [&](int64_t index, const std::string& split, bool with_label,
                  std::vector<std::string>& images, std::vector<std::string>& labels,
                  int64_t file_index) {
    Rendered r = render_sample(spec, classes, h, w, index);
    pixel_hash.update(r.rgb.data(), r.rgb.size());
    png::Image8 img{h, w, 3, std::move(r.rgb)};
    images.push_back(write_hashed_png(m.root, split + "/images/" + index_name(file_index),
                                      img, m.file_hashes));
    if (with_label) {
      pixel_hash.update(r.label.data(), r.label.size());
      png::Image8 lab{h, w, 1, std::move(r.label)};
      labels.push_back(write_hashed_png(m.root, split + "/labels/" + index_name(file_index),
                                        lab, m.file_hashes));
    }
  };

  for (int64_t i = 0; i < n_train; ++i)
    emit(i, "train", train_labels, m.train_images, m.train_label_files, i);
  for (int64_t j = 0; j < n_eval; ++j)
    emit(n_train + j, "eval", true, m.eval_images, m.eval_label_files, j);

  m.pixel_digest = hex_digest(pixel_hash.digest());
  m.save(m.root + "/manifest.json");
  return m;
}

bool verify_manifest(const DatasetManifest& m) {
  for (const auto& [rel, want] : m.file_hashes) {
    std::FILE* f = std::fopen((m.root + "/" + rel).c_str(), "rb");
    if (!f) return false;
    std::fseek(f, 0, SEEK_END);
    long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> bytes(size > 0 ? static_cast<size_t>(size) : 0);
    size_t got = std::fread(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (got != bytes.size()) return false;
    if (hex_digest(fnv1a64(bytes.data(), bytes.size())) != want) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Access control

int64_t DomainRoles::target_index(const std::string& id) const {
  if (id == source) return 0;
  for (size_t k = 0; k < targets.size(); ++k)
    if (targets[k] == id) return static_cast<int64_t>(k) + 1;
  return -1;
}

void AccessLog::save_jsonl(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write access log: " + path);
  for (const auto& r : records_) {
    ::json j = {{"step", r.step},
                {"domain_id", r.domain_id},
                {"split", r.split},
                {"count", r.count}};
    os << j.dump() << "\n";
  }
  os.flush();
  if (!os) throw ValidationError("access log write failed: " + path);
}

AccessLog AccessLog::load_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open access log: " + path);
  AccessLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ::json j;
    try {
      j = ::json::parse(line);
    } catch (const ::json::exception& e) {
      throw ValidationError(std::string("access log line is not JSON: ") + e.what());
    }
    log.append({j.at("step").get<int64_t>(), j.at("domain_id").get<std::string>(),
                j.at("split").get<std::string>(), j.at("count").get<int64_t>()});
  }
  return log;
}

namespace {

Tensor image_to_tensor(const png::Image8& img) {
  if (img.channels != 3) throw ValidationError("expected an RGB image");
  Tensor t = Tensor::zeros({img.h, img.w, 3});
  for (size_t i = 0; i < img.pix.size(); ++i)
    t.v[i] = static_cast<double>(img.pix[i]) / 255.0;
  return t;
}

LabelMap label_from_png(const png::Image8& img, int64_t classes) {
  if (img.channels != 1) throw ValidationError("expected a single-channel label map");
  LabelMap lab;
  lab.h = img.h;
  lab.w = img.w;
  lab.y.resize(img.pix.size());
  for (size_t i = 0; i < img.pix.size(); ++i) {
    if (img.pix[i] >= classes)
      throw ValidationError("label map holds a class index out of range");
    lab.y[i] = img.pix[i];
  }
  return lab;
}

}  // namespace

std::vector<Sample> load_samples(const DatasetManifest& m, const DomainRoles& roles,
                                 Split split, const std::vector<int64_t>& indices,
                                 int64_t step, AccessLog* log) {
  const bool train = split == Split::train;
  const int64_t role = roles.target_index(m.domain_id);
  if (log)
    log->append({step, m.domain_id, train ? "train" : "eval",
                 static_cast<int64_t>(indices.size())});
  if (train && role != 0 && role != step)
    throw ProtocolViolation("train access to " + m.domain_id + " at step " +
                            std::to_string(step) + " is forbidden");

  const auto& images = train ? m.train_images : m.eval_images;
  const auto& labels = train ? m.train_label_files : m.eval_label_files;
  const bool with_labels = train ? (role == 0 && m.train_labels) : true;

  std::vector<Sample> out;
  out.reserve(indices.size());
  for (int64_t idx : indices) {
    if (idx < 0 || idx >= static_cast<int64_t>(images.size()))
      throw ValidationError("sample index out of range for " + m.domain_id);
    Sample s;
    s.domain_id = m.domain_id;
    s.image = image_to_tensor(png::read_png(m.root + "/" + images[idx]));
    if (with_labels) {
      if (idx >= static_cast<int64_t>(labels.size()))
        throw ValidationError("label file missing for " + m.domain_id);
      s.label = label_from_png(png::read_png(m.root + "/" + labels[idx]), m.classes);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> load_batch(const DatasetManifest& m, const DomainRoles& roles,
                               Split split, int64_t size, int64_t step, Rng& rng,
                               AccessLog* log) {
  const int64_t n = split == Split::train ? static_cast<int64_t>(m.train_images.size())
                                          : static_cast<int64_t>(m.eval_images.size());
  if (n == 0) throw ValidationError("no samples in the requested split");
  std::vector<int64_t> indices(static_cast<size_t>(size));
  for (auto& i : indices) i = rng.uniform_int(0, n - 1);
  return load_samples(m, roles, split, indices, step, log);
}

// ---------------------------------------------------------------------------
// Audit

AuditReport audit(const AccessLog& log, const DomainRoles& roles, int64_t total_steps) {
  AuditReport rep;
  rep.total_steps = total_steps;
  for (const auto& r : log.records()) {
    if (r.split == "eval") {
      ++rep.eval_reads;
      continue;
    }
    ++rep.train_reads;
    if (r.step < 1 || r.step > total_steps) {
      rep.violations.push_back({r.step, r.domain_id, "step outside the schedule"});
      continue;
    }
    int64_t k = roles.target_index(r.domain_id);
    if (k < 0)
      rep.violations.push_back({r.step, r.domain_id, "unknown domain"});
    else if (k != 0 && k != r.step)
      rep.violations.push_back(
          {r.step, r.domain_id,
           "target " + std::to_string(k) + " read at step " + std::to_string(r.step)});
  }
  return rep;
}

std::string AuditReport::json() const {
  ::json j;
  j["total_steps"] = total_steps;
  j["train_reads"] = train_reads;
  j["eval_reads"] = eval_reads;
  j["clean"] = clean();
  j["violations"] = ::json::array();
  for (const auto& v : violations)
    j["violations"].push_back(
        {{"step", v.step}, {"domain_id", v.domain_id}, {"detail", v.detail}});
  return j.dump(2);
}

}  // namespace muhdi
