#include "muhdi/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "muhdi/errors.hpp"

using nlohmann::json;

namespace muhdi {

void ConfusionMatrix::accumulate(const LabelMap& pred, const LabelMap& gt) {
  if (classes_ <= 0) throw ContractError("confusion matrix has no class count");
  if (pred.h != gt.h || pred.w != gt.w)
    throw ValidationError("prediction and ground truth shapes differ");
  for (size_t i = 0; i < gt.y.size(); ++i) {
    int32_t g = gt.y[i], p = pred.y[i];
    if (g < 0 || g >= classes_ || p < 0 || p >= classes_)
      throw ValidationError("label outside the class range");
    ++counts_[g * classes_ + p];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_)
    throw ValidationError("cannot merge confusion matrices of different sizes");
  for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

int64_t ConfusionMatrix::total() const {
  int64_t t = 0;
  for (int64_t c : counts_) t += c;
  return t;
}

IouResult iou_from_confusion(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("confusion matrix is empty");
  const int64_t C = cm.classes();
  IouResult res;
  res.per_class.assign(static_cast<size_t>(C), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int64_t included = 0;
  for (int64_t c = 0; c < C; ++c) {
    int64_t row = 0, col = 0;
    for (int64_t j = 0; j < C; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    int64_t inter = cm.at(c, c);
    int64_t uni = row + col - inter;
    if (uni == 0) continue;  // absent from both sides: excluded
    double iou = 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
    res.per_class[c] = iou;
    sum += iou;
    ++included;
  }
  if (included == 0) throw ValidationError("every class is absent from both sides");
  res.miou = sum / static_cast<double>(included);
  return res;
}

LabelMap argmax_labels(const ProbMap& prob) {
  if (prob.shape.size() != 3) throw ContractError("argmax expects [H,W,C]");
  const int64_t h = prob.shape[0], w = prob.shape[1], c = prob.shape[2];
  LabelMap lab;
  lab.h = h;
  lab.w = w;
  lab.y.resize(static_cast<size_t>(h * w));
  for (int64_t i = 0; i < h * w; ++i) {
    const double* p = prob.v.data() + i * c;
    int32_t best = 0;
    for (int64_t k = 1; k < c; ++k)
      if (p[k] > p[best]) best = static_cast<int32_t>(k);
    lab.y[i] = best;
  }
  return lab;
}

double miou_avg_of(const std::vector<DomainMetrics>& domains) {
  if (domains.empty()) throw ValidationError("no domains evaluated");
  double s = 0.0;
  for (const auto& d : domains) s += d.miou;
  return s / static_cast<double>(domains.size());
}

std::map<std::string, double> forgetting_from_history(
    const std::map<std::pair<int64_t, std::string>, double>& history,
    const std::map<std::string, int64_t>& introduced_at, int64_t final_step) {
  std::map<std::string, double> out;
  for (const auto& [id, intro] : introduced_at) {
    if (intro >= final_step) continue;  // introduced at the end: nothing to forget yet
    auto at_intro = history.find({intro, id});
    auto at_final = history.find({final_step, id});
    if (at_intro == history.end() || at_final == history.end())
      throw ValidationError("missing evaluation for domain " + id);
    out[id] = at_intro->second - at_final->second;
  }
  return out;
}

std::string MetricsReport::json() const {
  ::json j;
  j["step"] = step;
  j["domains"] = ::json::array();
  for (const auto& d : domains) {
    ::json pc = ::json::array();
    for (double v : d.per_class_iou) {
      if (std::isnan(v))
        pc.push_back(nullptr);
      else
        pc.push_back(v);
    }
    j["domains"].push_back(
        {{"id", d.domain_id}, {"per_class_iou", pc}, {"miou", d.miou}});
  }
  j["miou_avg"] = miou_avg;
  j["forgetting"] = forgetting;
  return j.dump(2);
}

MetricsReport MetricsReport::parse(const std::string& text) {
  ::json j;
  try {
    j = ::json::parse(text);
  } catch (const ::json::exception& e) {
    throw ValidationError(std::string("metrics report is not valid JSON: ") + e.what());
  }
  try {
    MetricsReport rep;
    rep.step = j.at("step").get<int64_t>();
    for (const auto& dj : j.at("domains")) {
      DomainMetrics d;
      d.domain_id = dj.at("id").get<std::string>();
      for (const auto& v : dj.at("per_class_iou"))
        d.per_class_iou.push_back(
            v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      d.miou = dj.at("miou").get<double>();
      rep.domains.push_back(std::move(d));
    }
    rep.miou_avg = j.at("miou_avg").get<double>();
    rep.forgetting = j.at("forgetting").get<std::map<std::string, double>>();
    return rep;
  } catch (const ::json::exception& e) {
    throw ValidationError(std::string("metrics report is missing fields: ") + e.what());
  }
}

void MetricsReport::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write metrics report: " + path);
  os << json() << "\n";
  os.flush();
  if (!os) throw ValidationError("metrics report write failed: " + path);
}

MetricsReport MetricsReport::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open metrics report: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%5.1f", v);
  return buf;
}

}  // namespace

std::string format_step_table(const MetricsReport& rep) {
  std::ostringstream os;
  os << "step " << rep.step << "\n";
  for (const auto& d : rep.domains) {
    os << "  " << d.domain_id << ": mIoU " << pct(d.miou) << " [";
    for (size_t c = 0; c < d.per_class_iou.size(); ++c) {
      if (c) os << " ";
      if (std::isnan(d.per_class_iou[c]))
        os << "  n/a";
      else
        os << pct(d.per_class_iou[c]);
    }
    os << "]";
    auto f = rep.forgetting.find(d.domain_id);
    if (f != rep.forgetting.end()) os << "  forgetting " << pct(f->second);
    os << "\n";
  }
  os << "  mIoU-Avg " << pct(rep.miou_avg) << "\n";
  return os.str();
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "method               DD  FD  MH | mIoU-Avg | forgetting\n";
  os << "---------------------------------------------------------\n";
  for (const auto& r : rows) {
    char line[64];
    std::snprintf(line, sizeof line, "%-20s %-3s %-3s %-3s | %8s |", r.method.c_str(),
                  r.dd ? "x" : "-", r.fd ? "x" : "-", r.multi_head ? "x" : "-",
                  pct(r.miou_avg).c_str());
    os << line;
    for (const auto& [id, f] : r.forgetting) os << " " << id << " " << pct(f);
    os << "  (seeds " << r.seeds << ")\n";
  }
  return os.str();
}

}  // namespace muhdi
