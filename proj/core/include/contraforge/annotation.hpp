#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "contraforge/agreement.hpp"
#include "contraforge/corpus.hpp"
#include "contraforge/error.hpp"
#include "contraforge/record_log.hpp"

namespace contraforge {

/// Sentences around `chunk` in `body` (radius on each side), or the chunk
/// itself when it cannot be located.
std::string chunk_context(std::string_view body, std::string_view chunk, std::size_t radius = 2);

/// Does a mined chunk pair stand for the injected record? Chunks match a
/// statement when either normalized text contains the other. Pairwise
/// records match in document order only (doc1 = source, doc2 = host);
/// self records in either order.
bool matches_injected(const CandidatePair& p, const ContradictionRecord& r);

/// Union of detector outputs and injected ground truth, keyed by pair key.
/// Only pairs some detector flagged (or that ended unresolved) enter. A
/// detector pair matching an injected record by containment is merged into
/// that record's item and listed in `aliases`. Contexts come from `docs`
/// when the document is known. Output is sorted by key.
std::vector<GoldItem> build_gold_union(const std::vector<std::vector<CandidatePair>>& detectors,
                                       const std::vector<ContradictionRecord>& injected,
                                       const std::vector<Document>& docs = {});

struct ServiceConfig {
  // Registered annotators; empty means anyone may label.
  std::set<std::string> annotators;
  std::set<std::string> smes;
  double threshold = 0.9;
};

struct ReviewSummary {
  std::size_t n_reviews = 0;
  double fluency = 0.0;
  double specificity = 0.0;
  double coherence = 0.0;
  double legitimacy = 0.0;
  std::optional<double> detection_rate;  // over reviews carrying the flag
};

/// Per-item view derived from the label log.
struct ItemLabels {
  std::map<std::string, int> by_annotator;  // latest label per annotator
  std::optional<int> sme_label;
  double agreement = 0.0;  // majority share; 0 without labels
};

/// Human-in-the-loop labeling over a fixed gold candidate set. Labels are
/// appended to a record log; every consolidated view is recomputed from the
/// log on read. Thread-safe.
class AnnotationService {
 public:
  using Clock = std::function<Timestamp()>;

  AnnotationService(std::vector<GoldItem> gold, std::filesystem::path log_path,
                    ServiceConfig cfg = {}, std::set<std::string> documents = {},
                    Clock clock = {});

  std::optional<GoldItem> next_item(const std::string& annotator) const;
  AnnotationRecord submit_label(const std::string& annotator, const std::string& key, int label);
  /// Terminal SME decision. Throws PermissionDenied for non-SMEs.
  AnnotationRecord adjudicate(const std::string& sme, const std::string& key, int label);
  AnnotationRecord record_doc_review(const std::string& annotator, const std::string& doc_id,
                                     const LikertScores& likert, std::optional<bool> detected);

  std::optional<GoldItem> item(const std::string& key) const;
  std::optional<ItemLabels> item_labels(const std::string& key) const;
  std::vector<GoldItem> consolidated() const;
  std::vector<GoldItem> adjudication_queue() const;
  LabelMatrix label_matrix(std::optional<Mode> mode = {}) const;
  /// Throws PreconditionError when nothing is co-labeled.
  AgreementReport iaa(std::optional<Mode> mode = {}) const;
  ReviewSummary review_summary() const;

  const ServiceConfig& config() const { return cfg_; }
  std::vector<AnnotationRecord> records() const;

 private:
  void require_annotator(const std::string& id) const;
  const GoldItem& require_item(const std::string& key) const;
  AnnotationRecord append(AnnotationRecord r);
  ItemLabels labels_of(const std::string& key) const;  // caller holds mu_
  GoldItem consolidate(const GoldItem& g) const;       // caller holds mu_

  std::vector<GoldItem> gold_;
  std::map<std::string, std::size_t> index_;
  ServiceConfig cfg_;
  std::set<std::string> documents_;
  Clock clock_;
  mutable std::mutex mu_;
  std::vector<AnnotationRecord> records_;
  std::unique_ptr<RecordLog> log_;
};

class PermissionDenied : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotFound : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace contraforge
