#include "contraforge/annotation.hpp"

#include <algorithm>

#include "contraforge/error.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

namespace {

bool either_contains(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return false;
  return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
}

Timestamp now_ms() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

}  // namespace

std::string chunk_context(std::string_view body, std::string_view chunk, std::size_t radius) {
  const auto sentences = segment_sentences(body);
  const std::string c = normalize_text(chunk);
  std::vector<std::string> norm;
  norm.reserve(sentences.size());
  for (const auto& s : sentences) norm.push_back(normalize_text(s.text));
  std::size_t first = sentences.size();
  for (std::size_t i = 0; i < norm.size(); ++i) {
    if (either_contains(norm[i], c)) {
      first = i;
      break;
    }
  }
  if (first == sentences.size()) return c;
  std::size_t last = first;
  while (last + 1 < norm.size() && c.find(norm[last + 1]) != std::string::npos) ++last;
  const std::size_t lo = first >= radius ? first - radius : 0;
  const std::size_t hi = std::min(norm.size() - 1, last + radius);
  std::string out;
  for (std::size_t i = lo; i <= hi; ++i) out += (out.empty() ? "" : " ") + norm[i];
  return out;
}

bool matches_injected(const CandidatePair& p, const ContradictionRecord& r) {
  if (p.mode != r.mode) return false;
  const std::string a = normalize_text(p.doc1_chunk);
  const std::string b = normalize_text(p.doc2_chunk);
  const std::string t = normalize_text(r.target_statement);
  const std::string c = normalize_text(r.contradiction_statement);
  if (r.mode == Mode::Pairwise) {
    return p.doc1 == r.source_doc && p.doc2 == r.host_doc && either_contains(a, t) &&
           either_contains(b, c);
  }
  if (p.doc1 != r.host_doc || p.doc2 != r.host_doc) return false;
  return (either_contains(a, t) && either_contains(b, c)) ||
         (either_contains(a, c) && either_contains(b, t));
}

std::vector<GoldItem> build_gold_union(const std::vector<std::vector<CandidatePair>>& detectors,
                                       const std::vector<ContradictionRecord>& injected,
                                       const std::vector<Document>& docs) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  const auto context = [&](const std::string& doc, const std::string& chunk) {
    auto it = by_id.find(doc);
    return it == by_id.end() ? normalize_text(chunk) : chunk_context(it->second->body, chunk);
  };

  std::map<std::string, GoldItem> items;
  std::vector<std::pair<const ContradictionRecord*, std::string>> injected_keys;
  for (const auto& r : injected) {
    GoldItem g;
    g.mode = r.mode;
    g.doc1 = r.source_doc;
    g.doc2 = r.host_doc;
    g.doc1_chunk = normalize_text(r.target_statement);
    g.doc2_chunk = normalize_text(r.contradiction_statement);
    g.key = pair_key(g.doc1_chunk, g.doc2_chunk, g.mode);
    if (g.mode == Mode::Self && g.doc2_chunk < g.doc1_chunk) std::swap(g.doc1_chunk, g.doc2_chunk);
    g.ctype = r.ctype;
    g.sources.insert(Source::Injected);
    g.context1 = context(g.doc1, g.doc1_chunk);
    g.context2 = context(g.doc2, g.doc2_chunk);
    injected_keys.emplace_back(&r, g.key);
    auto [it, fresh] = items.try_emplace(g.key, std::move(g));
    if (!fresh && !it->second.ctype) it->second.ctype = r.ctype;
  }

  for (const auto& detector : detectors) {
    for (const auto& p : detector) {
      std::set<Source> flagged;
      for (Source s : p.source) {
        if (s != Source::Injected) flagged.insert(s);
      }
      if (flagged.empty() && !p.error) continue;

      GoldItem* target = nullptr;
      if (auto it = items.find(p.key); it != items.end()) {
        target = &it->second;
      } else {
        for (const auto& [r, key] : injected_keys) {
          if (matches_injected(p, *r)) {
            target = &items.at(key);
            if (std::find(target->aliases.begin(), target->aliases.end(), p.key) ==
                target->aliases.end()) {
              target->aliases.push_back(p.key);
            }
            break;
          }
        }
      }
      if (!target) {
        GoldItem g;
        g.key = p.key;
        g.mode = p.mode;
        g.doc1 = p.doc1;
        g.doc2 = p.doc2;
        g.doc1_chunk = normalize_text(p.doc1_chunk);
        g.doc2_chunk = normalize_text(p.doc2_chunk);
        g.context1 = context(g.doc1, g.doc1_chunk);
        g.context2 = context(g.doc2, g.doc2_chunk);
        target = &items.emplace(g.key, std::move(g)).first->second;
      }
      target->sources.insert(flagged.begin(), flagged.end());
      if (p.error) target->unresolved = true;
    }
  }

  std::vector<GoldItem> out;
  out.reserve(items.size());
  for (auto& [key, g] : items) {
    std::sort(g.aliases.begin(), g.aliases.end());
    out.push_back(std::move(g));
  }
  return out;
}

AnnotationService::AnnotationService(std::vector<GoldItem> gold, std::filesystem::path log_path,
                                     ServiceConfig cfg, std::set<std::string> documents,
                                     Clock clock)
    : gold_(std::move(gold)),
      cfg_(std::move(cfg)),
      documents_(std::move(documents)),
      clock_(clock ? std::move(clock) : Clock(now_ms)) {
  std::sort(gold_.begin(), gold_.end(),
            [](const GoldItem& a, const GoldItem& b) { return a.key < b.key; });
  for (std::size_t i = 0; i < gold_.size(); ++i) index_[gold_[i].key] = i;
  if (std::filesystem::exists(log_path)) records_ = load_values<AnnotationRecord>(log_path);
  log_ = std::make_unique<RecordLog>(std::move(log_path));
}

void AnnotationService::require_annotator(const std::string& id) const {
  if (id.empty()) throw PreconditionError("annotator id is required");
  if (!cfg_.annotators.empty() && !cfg_.annotators.contains(id) && !cfg_.smes.contains(id)) {
    throw NotFound("unknown annotator '" + id + "'");
  }
}

const GoldItem& AnnotationService::require_item(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw NotFound("unknown item '" + key + "'");
  return gold_[it->second];
}

AnnotationRecord AnnotationService::append(AnnotationRecord r) {
  if (auto problem = check(r); !problem.empty()) throw PreconditionError(problem);
  log_->append(Record(r));
  records_.push_back(r);
  return r;
}

std::optional<GoldItem> AnnotationService::next_item(const std::string& annotator) const {
  require_annotator(annotator);
  std::lock_guard lock(mu_);
  std::set<std::string> done;
  for (const auto& r : records_) {
    if (r.annotator == annotator && r.kind == AnnotationKind::PairLabel) done.insert(r.subject);
  }
  for (const auto& g : gold_) {
    if (!done.contains(g.key)) return consolidate(g);
  }
  return std::nullopt;
}

AnnotationRecord AnnotationService::submit_label(const std::string& annotator,
                                                 const std::string& key, int label) {
  require_annotator(annotator);
  require_item(key);
  if (label != 0 && label != 1) throw PreconditionError("label must be 0 or 1");
  std::lock_guard lock(mu_);
  AnnotationRecord r;
  r.annotator = annotator;
  r.subject = key;
  r.kind = AnnotationKind::PairLabel;
  r.label = label;
  r.timestamp = clock_();
  return append(std::move(r));
}

AnnotationRecord AnnotationService::adjudicate(const std::string& sme, const std::string& key,
                                               int label) {
  if (!cfg_.smes.contains(sme)) throw PermissionDenied("'" + sme + "' is not a subject matter expert");
  require_item(key);
  if (label != 0 && label != 1) throw PreconditionError("label must be 0 or 1");
  std::lock_guard lock(mu_);
  if (labels_of(key).sme_label) throw PreconditionError("item '" + key + "' is already adjudicated");
  AnnotationRecord r;
  r.annotator = sme;
  r.subject = key;
  r.kind = AnnotationKind::Adjudication;
  r.label = label;
  r.timestamp = clock_();
  return append(std::move(r));
}

AnnotationRecord AnnotationService::record_doc_review(const std::string& annotator,
                                                      const std::string& doc_id,
                                                      const LikertScores& likert,
                                                      std::optional<bool> detected) {
  require_annotator(annotator);
  if (!documents_.empty() && !documents_.contains(doc_id)) {
    throw NotFound("unknown document '" + doc_id + "'");
  }
  std::lock_guard lock(mu_);
  AnnotationRecord r;
  r.annotator = annotator;
  r.subject = doc_id;
  r.kind = AnnotationKind::DocReview;
  r.likert = likert;
  r.detected_contradiction = detected;
  r.timestamp = clock_();
  return append(std::move(r));
}

ItemLabels AnnotationService::labels_of(const std::string& key) const {
  ItemLabels out;
  std::map<std::string, Timestamp> when;
  for (const auto& r : records_) {
    if (r.subject != key || !r.label) continue;
    if (r.kind == AnnotationKind::Adjudication) {
      if (!out.sme_label) out.sme_label = *r.label;  // first decision is final
      continue;
    }
    if (r.kind != AnnotationKind::PairLabel) continue;
    auto it = when.find(r.annotator);
    if (it == when.end() || r.timestamp >= it->second) {
      when[r.annotator] = r.timestamp;
      out.by_annotator[r.annotator] = *r.label;
    }
  }
  if (!out.by_annotator.empty()) {
    std::size_t ones = 0;
    for (const auto& [a, l] : out.by_annotator) ones += l == 1 ? 1 : 0;
    const std::size_t n = out.by_annotator.size();
    out.agreement = static_cast<double>(std::max(ones, n - ones)) / static_cast<double>(n);
  }
  return out;
}

GoldItem AnnotationService::consolidate(const GoldItem& g) const {
  GoldItem out = g;
  const auto labels = labels_of(g.key);
  out.human_label.reset();
  out.adjudicated = false;
  if (labels.sme_label) {
    out.human_label = labels.sme_label;
    out.adjudicated = true;
  } else if (!labels.by_annotator.empty() && labels.agreement >= cfg_.threshold) {
    std::size_t ones = 0;
    for (const auto& [a, l] : labels.by_annotator) ones += l == 1 ? 1 : 0;
    out.human_label = 2 * ones > labels.by_annotator.size() ? 1 : 0;
  }
  return out;
}

std::optional<GoldItem> AnnotationService::item(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return consolidate(gold_[it->second]);
}

std::optional<ItemLabels> AnnotationService::item_labels(const std::string& key) const {
  std::lock_guard lock(mu_);
  if (!index_.contains(key)) return std::nullopt;
  return labels_of(key);
}

std::vector<GoldItem> AnnotationService::consolidated() const {
  std::lock_guard lock(mu_);
  std::vector<GoldItem> out;
  out.reserve(gold_.size());
  for (const auto& g : gold_) out.push_back(consolidate(g));
  return out;
}

std::vector<GoldItem> AnnotationService::adjudication_queue() const {
  std::lock_guard lock(mu_);
  std::vector<GoldItem> out;
  for (const auto& g : gold_) {
    const auto labels = labels_of(g.key);
    if (labels.sme_label) continue;
    const bool split = !labels.by_annotator.empty() && labels.agreement < cfg_.threshold;
    if (split || g.unresolved) out.push_back(consolidate(g));
  }
  return out;
}

LabelMatrix AnnotationService::label_matrix(std::optional<Mode> mode) const {
  std::lock_guard lock(mu_);
  std::vector<const GoldItem*> items;
  for (const auto& g : gold_) {
    if (!mode || g.mode == *mode) items.push_back(&g);
  }
  std::set<std::string> annotators;
  std::vector<ItemLabels> labels;
  for (const auto* g : items) {
    labels.push_back(labels_of(g->key));
    for (const auto& [a, l] : labels.back().by_annotator) annotators.insert(a);
  }
  LabelMatrix m;
  for (const auto& a : annotators) {
    std::vector<std::optional<int>> row(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto it = labels[i].by_annotator.find(a);
      if (it != labels[i].by_annotator.end()) row[i] = it->second;
    }
    m.push_back(std::move(row));
  }
  return m;
}

AgreementReport AnnotationService::iaa(std::optional<Mode> mode) const {
  return agreement_report(label_matrix(mode));
}

ReviewSummary AnnotationService::review_summary() const {
  std::lock_guard lock(mu_);
  std::map<std::pair<std::string, std::string>, const AnnotationRecord*> latest;
  for (const auto& r : records_) {
    if (r.kind != AnnotationKind::DocReview || !r.likert) continue;
    auto& slot = latest[{r.annotator, r.subject}];
    if (!slot || r.timestamp >= slot->timestamp) slot = &r;
  }
  ReviewSummary s;
  std::size_t flagged = 0;
  std::size_t detected = 0;
  for (const auto& [k, r] : latest) {
    ++s.n_reviews;
    s.fluency += r->likert->fluency;
    s.specificity += r->likert->specificity;
    s.coherence += r->likert->coherence;
    s.legitimacy += r->likert->legitimacy;
    if (r->detected_contradiction) {
      ++flagged;
      detected += *r->detected_contradiction ? 1 : 0;
    }
  }
  if (s.n_reviews) {
    const double n = static_cast<double>(s.n_reviews);
    s.fluency /= n;
    s.specificity /= n;
    s.coherence /= n;
    s.legitimacy /= n;
  }
  if (flagged) s.detection_rate = static_cast<double>(detected) / static_cast<double>(flagged);
  return s;
}

std::vector<AnnotationRecord> AnnotationService::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

}  // namespace contraforge
