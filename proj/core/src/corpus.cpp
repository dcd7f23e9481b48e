#include "contraforge/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "contraforge/text.hpp"

namespace contraforge {

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool in_likert_range(int v) { return v >= 1 && v <= 5; }

}  // namespace

std::string_view to_string(Mode m) {
  return m == Mode::Self ? "self" : "pairwise";
}

std::string_view to_string(ContradictionType t) {
  switch (t) {
    case ContradictionType::Temporal: return "Temporal";
    case ContradictionType::Numerical: return "Numerical";
    case ContradictionType::Authority: return "Authority";
    case ContradictionType::Process: return "Process";
    case ContradictionType::PolicyReversal: return "PolicyReversal";
    case ContradictionType::Specificity: return "Specificity";
  }
  return "Unspecified";
}

std::string_view to_string(NliLabel l) {
  switch (l) {
    case NliLabel::Contradiction: return "contradiction";
    case NliLabel::Neutral: return "neutral";
    case NliLabel::Entailment: return "entailment";
  }
  return "neutral";
}

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Nli: return "nli";
    case Source::Llm: return "llm";
    case Source::Hybrid: return "hybrid";
    case Source::Injected: return "injected";
  }
  return "nli";
}

std::string_view to_string(AnnotationKind k) {
  switch (k) {
    case AnnotationKind::PairLabel: return "PairLabel";
    case AnnotationKind::DocReview: return "DocReview";
    case AnnotationKind::Adjudication: return "Adjudication";
  }
  return "PairLabel";
}

std::optional<Mode> parse_mode(std::string_view s) {
  const std::string k = squash(s);
  if (k == "self") return Mode::Self;
  if (k == "pairwise" || k == "pair") return Mode::Pairwise;
  return std::nullopt;
}

std::optional<ContradictionType> parse_contradiction_type(std::string_view s) {
  const std::string k = squash(s);
  for (auto t : kAllContradictionTypes) {
    if (squash(to_string(t)) == k) return t;
  }
  return std::nullopt;
}

std::optional<NliLabel> parse_nli_label(std::string_view s) {
  const std::string k = squash(s);
  if (k == "contradiction") return NliLabel::Contradiction;
  if (k == "neutral") return NliLabel::Neutral;
  if (k == "entailment") return NliLabel::Entailment;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view s) {
  const std::string k = squash(s);
  if (k == "nli") return Source::Nli;
  if (k == "llm") return Source::Llm;
  if (k == "hybrid") return Source::Hybrid;
  if (k == "injected") return Source::Injected;
  return std::nullopt;
}

std::optional<AnnotationKind> parse_annotation_kind(std::string_view s) {
  const std::string k = squash(s);
  if (k == "pairlabel") return AnnotationKind::PairLabel;
  if (k == "docreview") return AnnotationKind::DocReview;
  if (k == "adjudication") return AnnotationKind::Adjudication;
  return std::nullopt;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<Date> parse_date(std::string_view iso) {
  const std::string s = trim(iso);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    return std::nullopt;
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss tod{t - day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%03dZ", format_date(ymd).c_str(),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()),
                static_cast<int>(tod.subseconds().count()));
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view iso) {
  using namespace std::chrono;
  const std::string s = trim(iso);
  if (s.size() < 20 || s.back() != 'Z') return std::nullopt;
  const auto date = parse_date(std::string_view(s).substr(0, 10));
  if (!date || s[10] != 'T') return std::nullopt;
  int hh = 0;
  int mm = 0;
  int ss = 0;
  int ms = 0;
  const std::string clock = s.substr(11, s.size() - 12);
  if (std::sscanf(clock.c_str(), "%2d:%2d:%2d.%3d", &hh, &mm, &ss, &ms) < 3) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 60 || ms < 0 || ms > 999) return std::nullopt;
  return Timestamp{sys_days{*date}} + hours{hh} + minutes{mm} + seconds{ss} +
         milliseconds{ms};
}

const DomainTree::Domain* DomainTree::find(std::string_view name) const {
  auto it = std::find_if(domains.begin(), domains.end(),
                         [&](const Domain& d) { return d.name == name; });
  return it == domains.end() ? nullptr : &*it;
}

bool DomainTree::contains(std::string_view domain, std::string_view subdomain) const {
  const Domain* d = find(domain);
  return d && std::find(d->subdomains.begin(), d->subdomains.end(), subdomain) !=
                  d->subdomains.end();
}

std::string pair_key(std::string_view chunk1, std::string_view chunk2, Mode mode) {
  std::string a = normalize_text(chunk1);
  std::string b = normalize_text(chunk2);
  if (mode == Mode::Self && b < a) std::swap(a, b);
  std::string material;
  material.reserve(a.size() + b.size() + 1);
  material += a;
  material.push_back('\x1f');
  material += b;
  return sha256_hex(material);
}

std::string check(const OrganizationProfile& p) {
  if (trim(p.description).empty()) return "organization description is empty";
  if (trim(p.name).empty()) return "organization name is empty";
  return {};
}

std::string check(const DomainTree& t) {
  if (t.domains.empty()) return "domain tree has no domains";
  std::set<std::string> seen;
  for (const auto& d : t.domains) {
    if (trim(d.name).empty()) return "domain with empty name";
    if (!seen.insert(d.name).second) return "duplicate domain '" + d.name + "'";
  }
  return {};
}

std::string check(const DocumentMetadata& m) {
  const std::pair<const char*, const std::string*> fields[] = {
      {"title", &m.title},         {"topic", &m.topic},
      {"department", &m.department}, {"location", &m.location},
      {"doc_type", &m.doc_type},   {"authority_level", &m.authority_level}};
  for (const auto& [name, value] : fields) {
    if (trim(*value).empty()) return std::string("metadata field '") + name + "' is empty";
  }
  if (!m.date.ok()) return "metadata date is not a valid calendar date";
  return {};
}

std::string check(const Document& d) {
  if (d.id.empty()) return "document id is empty";
  if (trim(d.body).empty()) return "document body is empty";
  if (d.ppl_base != 0.0 && !(d.ppl_base > 1.0)) return "ppl_base must exceed 1";
  if (d.ppl_final && !(*d.ppl_final > 0.0)) return "ppl_final must be positive";
  return check(d.metadata);
}

std::string check(const ContradictionRecord& r, const Document* source) {
  if (r.mode == Mode::Self && r.host_doc != r.source_doc) {
    return "self contradiction must be hosted by its source document";
  }
  if (r.mode == Mode::Pairwise && r.host_doc == r.source_doc) {
    return "pairwise contradiction must be hosted by a different document";
  }
  if (trim(r.target_statement).empty() || trim(r.contradiction_statement).empty()) {
    return "contradiction record has an empty statement";
  }
  if (source && !normalized_contains(source->body, r.target_statement)) {
    return "target statement is not contained in source document " + r.source_doc;
  }
  return {};
}

std::string check(const CandidatePair& p) {
  if (p.hybrid_label && !p.s_hybrid) {
    // Non-forwarded pairs are finalized as 0 without a hybrid score.
    if (p.forwarded || *p.hybrid_label != 0) return "hybrid_label present without s_hybrid";
  }
  if (p.s_hybrid && !(p.nli_label && p.p_nli && p.llm_label && p.p_llm)) {
    return "s_hybrid present without all stage outputs";
  }
  if (p.similarity < -1.0 - 1e-9 || p.similarity > 1.0 + 1e-9) return "similarity out of range";
  if (p.key != pair_key(p.doc1_chunk, p.doc2_chunk, p.mode)) return "pair key mismatch";
  return {};
}

std::string check(const AnnotationRecord& r) {
  if (r.annotator.empty()) return "annotation without annotator";
  if ((r.kind == AnnotationKind::PairLabel || r.kind == AnnotationKind::Adjudication) &&
      !r.label) {
    return "pair label record without label";
  }
  if (r.label && *r.label != 0 && *r.label != 1) return "label must be 0 or 1";
  if (r.kind == AnnotationKind::DocReview && !r.likert) return "doc review without likert";
  if (r.likert) {
    const auto& l = *r.likert;
    if (!in_likert_range(l.fluency) || !in_likert_range(l.specificity) ||
        !in_likert_range(l.coherence) || !in_likert_range(l.legitimacy)) {
      return "likert ratings must be within 1..5";
    }
  }
  return {};
}

}  // namespace contraforge
