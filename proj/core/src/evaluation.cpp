#include "contraforge/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "contraforge/error.hpp"

namespace contraforge {

namespace {

std::optional<Ratio> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return Ratio{num, den};
}

nlohmann::json metric_json(const std::optional<Ratio>& r) {
  if (!r) return nullptr;
  return {{"value", r->value()},
          {"rounded", r->rounded(3)},
          {"num", r->num},
          {"den", r->den}};
}

std::string cell(const std::optional<Ratio>& r) {
  if (!r) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", r->rounded(3) * 100.0);
  return buf;
}

}  // namespace

double Ratio::rounded(int decimals) const {
  if (den == 0) throw PreconditionError("ratio with zero denominator");
  std::uint64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  // floor((num * scale) / den + 1/2) on integers.
  const auto scaled = (2 * num * scale + den) / (2 * den);
  return static_cast<double>(scaled) / static_cast<double>(scale);
}

double round_half_up(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(x * scale + 0.5 + 1e-9) / scale;
}

ConfusionMatrix confusion(const std::map<std::string, int>& predictions,
                          const std::map<std::string, int>& gold) {
  ConfusionMatrix m;
  for (const auto& [key, truth] : gold) {
    auto it = predictions.find(key);
    const int pred = it == predictions.end() ? 0 : it->second;
    if (pred == 1 && truth == 1) ++m.tp;
    else if (pred == 1) ++m.fp;
    else if (truth == 1) ++m.fn;
    else ++m.tn;
  }
  return m;
}

Metrics metrics(const ConfusionMatrix& m) {
  if (m.total() == 0) throw PreconditionError("metrics of an empty confusion matrix");
  Metrics r;
  r.accuracy = ratio(m.tp + m.tn, m.total());
  r.precision = ratio(m.tp, m.tp + m.fp);
  r.recall = ratio(m.tp, m.tp + m.fn);
  // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); it is 0/0 when P or R is, or when
  // both are zero.
  if (r.precision && r.recall && m.tp > 0) r.f1 = Ratio{2 * m.tp, 2 * m.tp + m.fp + m.fn};
  return r;
}

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::Nli: return "nli";
    case Detector::Llm: return "llm";
    case Detector::Hybrid: return "hybrid";
  }
  return "hybrid";
}

int detector_label(const CandidatePair& p, Detector d) {
  switch (d) {
    case Detector::Nli: return p.nli_label == NliLabel::Contradiction ? 1 : 0;
    case Detector::Llm: return p.llm_label.value_or(0);
    case Detector::Hybrid: return p.hybrid_label.value_or(0);
  }
  return 0;
}

std::map<std::string, int> detector_predictions(const std::vector<CandidatePair>& pairs,
                                                Detector d, const std::vector<GoldItem>& gold) {
  std::map<std::string, std::string> owner;  // pair key or alias -> gold key
  for (const auto& g : gold) {
    owner.emplace(g.key, g.key);
    for (const auto& a : g.aliases) owner.emplace(a, g.key);
  }
  std::map<std::string, int> out;
  for (const auto& p : pairs) {
    auto it = owner.find(p.key);
    if (it == owner.end()) continue;
    int& slot = out[it->second];
    slot = std::max(slot, detector_label(p, d));
  }
  return out;
}

std::vector<EvalReport> evaluate_detectors(const std::vector<std::vector<CandidatePair>>& mined,
                                           const std::vector<GoldItem>& gold) {
  std::string unlabeled;
  for (const auto& g : gold) {
    if (!g.human_label) unlabeled += (unlabeled.empty() ? "" : ", ") + g.key;
  }
  if (!unlabeled.empty()) throw ValidationError("gold items without human_label: " + unlabeled);

  std::vector<CandidatePair> all;
  for (const auto& m : mined) all.insert(all.end(), m.begin(), m.end());

  std::set<Mode> modes;
  for (const auto& g : gold) modes.insert(g.mode);

  std::vector<EvalReport> reports;
  for (Mode mode : modes) {
    std::vector<GoldItem> subset;
    std::map<std::string, int> truth;
    for (const auto& g : gold) {
      if (g.mode != mode) continue;
      subset.push_back(g);
      truth[g.key] = *g.human_label;
    }
    for (Detector d : {Detector::Nli, Detector::Llm, Detector::Hybrid}) {
      EvalReport r;
      r.detector = d;
      r.mode = mode;
      const auto preds = detector_predictions(all, d, subset);
      r.matrix = confusion(preds, truth);
      r.metrics = metrics(r.matrix);
      for (const auto& g : subset) {
        if (!g.sources.contains(Source::Injected) || !g.ctype) continue;
        auto& t = r.per_type[*g.ctype];
        ++t.injected;
        auto it = preds.find(g.key);
        if (it != preds.end() && it->second == 1) ++t.recovered;
      }
      for (auto& [type, t] : r.per_type) t.recall = ratio(t.recovered, t.injected);
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["detector"] = std::string(to_string(r.detector));
  j["mode"] = std::string(to_string(r.mode));
  j["matrix"] = {{"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"fn", r.matrix.fn}, {"tn", r.matrix.tn}};
  j["accuracy"] = metric_json(r.metrics.accuracy);
  j["precision"] = metric_json(r.metrics.precision);
  j["recall"] = metric_json(r.metrics.recall);
  j["f1"] = metric_json(r.metrics.f1);
  nlohmann::json per_type = nlohmann::json::object();
  for (const auto& [type, t] : r.per_type) {
    per_type[std::string(to_string(type))] = {
        {"injected", t.injected}, {"recovered", t.recovered}, {"recall", metric_json(t.recall)}};
  }
  j["per_type"] = per_type;
  return j;
}

std::string render_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-9s %-7s %7s %7s %7s %7s %6s\n", "mode", "detector", "A",
                "P", "R", "F1", "n");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-9s %-7s %7s %7s %7s %7s %6llu\n",
                  std::string(to_string(r.mode)).c_str(),
                  std::string(to_string(r.detector)).c_str(), cell(r.metrics.accuracy).c_str(),
                  cell(r.metrics.precision).c_str(), cell(r.metrics.recall).c_str(),
                  cell(r.metrics.f1).c_str(), static_cast<unsigned long long>(r.matrix.total()));
    out += line;
  }
  return out;
}

}  // namespace contraforge
