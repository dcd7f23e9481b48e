#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace contraforge {

enum class Mode { Self, Pairwise };

/// The six contradiction categories a generator may inject.
enum class ContradictionType {
  Temporal,
  Numerical,
  Authority,
  Process,
  PolicyReversal,
  Specificity,
};

inline constexpr ContradictionType kAllContradictionTypes[] = {
    ContradictionType::Temporal,  ContradictionType::Numerical,
    ContradictionType::Authority, ContradictionType::Process,
    ContradictionType::PolicyReversal, ContradictionType::Specificity,
};

enum class NliLabel { Contradiction, Neutral, Entailment };

/// Which stage surfaced a candidate pair.
enum class Source { Nli, Llm, Hybrid, Injected };

enum class AnnotationKind { PairLabel, DocReview, Adjudication };

std::string_view to_string(Mode m);
std::string_view to_string(ContradictionType t);
std::string_view to_string(NliLabel l);
std::string_view to_string(Source s);
std::string_view to_string(AnnotationKind k);

// Parsers accept the canonical spellings above, case-insensitively; the
// contradiction-type parser also accepts "Policy Reversal"/"policy_reversal".
std::optional<Mode> parse_mode(std::string_view s);
std::optional<ContradictionType> parse_contradiction_type(std::string_view s);
std::optional<NliLabel> parse_nli_label(std::string_view s);
std::optional<Source> parse_source(std::string_view s);
std::optional<AnnotationKind> parse_annotation_kind(std::string_view s);

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view iso);
std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view iso);

struct OrganizationProfile {
  std::string name;
  std::string description;
  std::vector<std::string> locations;
};

struct DomainTree {
  struct Domain {
    std::string name;
    std::vector<std::string> subdomains;
  };
  std::vector<Domain> domains;

  const Domain* find(std::string_view name) const;
  bool contains(std::string_view domain, std::string_view subdomain) const;
};

struct DocumentMetadata {
  std::string title;
  std::string topic;
  Date date{};
  std::string department;
  std::string location;
  std::string doc_type;
  std::string authority_level;
};

struct Document {
  std::string id;
  DocumentMetadata metadata;
  std::string domain;
  std::string subdomain;
  std::string body;
  double ppl_base = 0.0;
  std::optional<double> ppl_final;
  std::vector<std::string> people_meta;
  std::vector<std::string> doc_meta;
  // Generation attempts spent before the fluency gate accepted this body.
  int gen_attempts = 1;
  // Set when the metadata trailer sections were missing after a reprompt.
  bool trailer_warning = false;
};

struct ContradictionRecord {
  std::string id;
  Mode mode = Mode::Self;
  // Absent when the generator did not declare a recognizable type.
  std::optional<ContradictionType> ctype;
  std::string target_statement;
  std::string contradiction_statement;
  std::string source_doc;
  std::string host_doc;
  double delta_rel = 0.0;
};

/// A mined chunk pair with the outputs of every detector stage it reached.
struct CandidatePair {
  std::string key;
  Mode mode = Mode::Self;
  std::string doc1;
  std::string doc2;
  std::string doc1_chunk;
  std::string doc2_chunk;
  double similarity = 0.0;
  std::optional<NliLabel> nli_label;
  std::optional<double> p_nli;
  bool forwarded = false;
  std::optional<int> llm_label;
  std::optional<double> p_llm;
  std::optional<std::string> llm_reasoning;
  std::optional<double> s_hybrid;
  std::optional<int> hybrid_label;
  std::set<Source> source;
  // Provider failure or unparseable judge answer; such pairs are unresolved.
  std::optional<std::string> error;
};

struct LikertScores {
  int fluency = 0;
  int specificity = 0;
  int coherence = 0;
  int legitimacy = 0;
};

struct AnnotationRecord {
  std::string annotator;
  std::string subject;  // pair key or document id
  AnnotationKind kind = AnnotationKind::PairLabel;
  std::optional<int> label;
  std::optional<LikertScores> likert;
  std::optional<bool> detected_contradiction;
  Timestamp timestamp{};
};

/// One entry of the unified gold candidate set.
struct GoldItem {
  std::string key;
  Mode mode = Mode::Self;
  std::string doc1;
  std::string doc2;
  std::string doc1_chunk;
  std::string doc2_chunk;
  std::string context1;
  std::string context2;
  std::set<Source> sources;
  std::optional<int> human_label;
  bool adjudicated = false;
  // Type of the injected contradiction this item stands for, if any.
  std::optional<ContradictionType> ctype;
  // Keys of detector pairs consolidated into this item by containment.
  std::vector<std::string> aliases;
  // Some detector pair behind this item ended without a usable verdict.
  bool unresolved = false;
};

/// Canonical key of a chunk pair: SHA-256 over the normalized chunks. Self
/// pairs are unordered, pairwise pairs keep document order.
std::string pair_key(std::string_view chunk1, std::string_view chunk2, Mode mode);

// Invariant checks. Each returns an empty string when the value is valid,
// otherwise a description of the first violated invariant.
std::string check(const OrganizationProfile& p);
std::string check(const DomainTree& t);
std::string check(const DocumentMetadata& m);
std::string check(const Document& d);
std::string check(const ContradictionRecord& r, const Document* source = nullptr);
std::string check(const CandidatePair& p);
std::string check(const AnnotationRecord& r);

}  // namespace contraforge
