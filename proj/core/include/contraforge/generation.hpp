#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contraforge/corpus.hpp"
#include "contraforge/error.hpp"
#include "contraforge/prompts.hpp"
#include "contraforge/providers.hpp"

namespace contraforge {

struct FluencyReport {
  double ppl = 0.0;
  std::size_t token_count = 0;
  bool accepted = false;
  int attempts = 1;
};

struct GenerationConfig {
  double ppl_cap = 22.0;
  int max_attempts = 5;
  Date window_start{std::chrono::year{2024}, std::chrono::January, std::chrono::day{1}};
  Date window_end{std::chrono::year{2024}, std::chrono::December, std::chrono::day{31}};
  std::size_t paragraph_min = 4;
};

/// The fluency gate rejected every attempt.
class GateExhausted : public ValidationError {
 public:
  explicit GateExhausted(std::vector<FluencyReport> reports)
      : ValidationError("fluency gate rejected " + std::to_string(reports.size()) + " attempts"),
        reports_(std::move(reports)) {}
  const std::vector<FluencyReport>& reports() const { return reports_; }

 private:
  std::vector<FluencyReport> reports_;
};

/// exp(-(1/N) * sum(logprobs)). Throws PreconditionError on an empty list or
/// a positive value.
double perplexity(std::span<const double> logprobs);

/// Day in [cfg.window_start, cfg.window_end] drawn from `seed`.
Date sample_date(std::uint64_t seed, const GenerationConfig& cfg);

/// Parses a "Field: value" metadata block. Returns the fields that were
/// missing or invalid in `missing`.
DocumentMetadata parse_metadata(std::string_view text, const GenerationConfig& cfg,
                                std::vector<std::string>& missing);

DocumentMetadata generate_metadata(ChatProvider& chat, const OrganizationProfile& profile,
                                   const DomainTree& tree, const std::string& domain,
                                   const std::string& subdomain, std::uint64_t seed,
                                   const GenerationConfig& cfg = {},
                                   const PromptSet& prompts = PromptSet::builtin());

/// Body and metadata trailers of a generated document.
struct DocumentParts {
  std::string body;
  std::vector<std::string> people_meta;
  std::vector<std::string> doc_meta;
  bool has_people = false;
  bool has_docs = false;
};

DocumentParts split_trailers(std::string_view text);

/// Joins parts back into the layout the prompts ask for.
std::string join_trailers(const std::string& body, const std::vector<std::string>& people,
                          const std::vector<std::string>& docs);

std::string base_document_prompt(const DocumentMetadata& meta, const OrganizationProfile& profile,
                                 const std::string& domain, const std::string& subdomain,
                                 const PromptSet& prompts = PromptSet::builtin());

/// One base document (no fluency gate). Bodies with fewer than
/// cfg.paragraph_min paragraphs are regenerated, up to cfg.max_attempts
/// calls. Missing trailers trigger one reprompt; if still missing the lists
/// stay empty and trailer_warning is set. `addendum` is appended to the
/// rendered prompt.
Document generate_base_document(ChatProvider& chat, const DocumentMetadata& meta,
                                const OrganizationProfile& profile, const std::string& domain,
                                const std::string& subdomain, const GenerationConfig& cfg = {},
                                const PromptSet& prompts = PromptSet::builtin(),
                                const std::string& addendum = {});

/// The cap is inclusive.
inline bool fluency_accepts(double ppl, const GenerationConfig& cfg = {}) { return ppl <= cfg.ppl_cap; }

/// Scores the body. accepted = fluency_accepts(ppl).
FluencyReport fluency_gate(LogprobProvider& lm, const Document& doc,
                           const GenerationConfig& cfg = {}, int attempt = 1);

/// generate_base_document + fluency_gate, regenerating rejected drafts up to
/// cfg.max_attempts. Sets ppl_base and gen_attempts. Throws GateExhausted.
Document generate_gated_document(ChatProvider& chat, LogprobProvider& lm,
                                 const DocumentMetadata& meta, const OrganizationProfile& profile,
                                 const std::string& domain, const std::string& subdomain,
                                 const GenerationConfig& cfg = {},
                                 const PromptSet& prompts = PromptSet::builtin(),
                                 const std::string& addendum = {});

/// "doc-" + 16 hex digits of SHA-256 over title and body.
std::string document_id(const DocumentMetadata& meta, std::string_view body);

}  // namespace contraforge
