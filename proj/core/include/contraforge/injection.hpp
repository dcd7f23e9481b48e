#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contraforge/corpus.hpp"
#include "contraforge/error.hpp"
#include "contraforge/generation.hpp"
#include "contraforge/prompts.hpp"
#include "contraforge/providers.hpp"

namespace contraforge {

enum class InjectionRule { SelfEachDoc, InterleavePairs, None };

std::string_view to_string(InjectionRule r);
std::optional<InjectionRule> parse_injection_rule(std::string_view s);

struct InjectionPolicy {
  std::map<std::string, InjectionRule> rules;  // domain -> rule

  /// The per-domain rules used for the default five-domain corpus.
  static InjectionPolicy defaults();
  /// Throws ConfigError if a domain has no rule.
  InjectionRule rule_for(const std::string& domain) const;
};

struct DeltaGate {
  double delta_self_max = 0.05;
  double delta_pair_max = 0.075;
  double ppl_cap = 22.0;
};

class TargetNotInDocument : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class HedgeWordViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class BlendLostTarget : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class BlendLostContradiction : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class TargetLeak : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class ContradictionAbsent : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Words a contradiction statement may not contain (whole word, any case).
const std::vector<std::string>& hedge_blocklist();
/// Blocklisted words found in `text`, in blocklist order.
std::vector<std::string> hedge_words_in(std::string_view text);

/// Asks for the most specific sentence of `doc` and checks it occurs in the
/// body (normalized). One reprompt, then TargetNotInDocument.
std::string select_target(ChatProvider& chat, const Document& doc,
                          const PromptSet& prompts = PromptSet::builtin());

struct GeneratedContradiction {
  std::string statement;
  std::optional<ContradictionType> ctype;  // nullopt when undeclared
};

/// Parses "TYPE: ...\nCONTRADICTION: ..." answers. A bare sentence is taken
/// as the statement with no type.
GeneratedContradiction parse_contradiction_answer(std::string_view text);

/// Few-shot block rendered from (type, target, contradiction) examples.
struct FewShotExample {
  ContradictionType ctype;
  std::string target;
  std::string contradiction;
};
std::string render_few_shot(const std::vector<FewShotExample>& examples);
/// The Table-1-style example per type used when no file is configured.
const std::vector<FewShotExample>& default_few_shot();

/// Generates a 1-2 sentence hedge-free contradiction of `target`. One
/// regeneration on a violation, then HedgeWordViolation (or
/// ValidationError for a sentence-count violation).
GeneratedContradiction generate_contradiction(ChatProvider& chat, const std::string& target,
                                              const Document& doc,
                                              const std::vector<FewShotExample>& few_shot,
                                              const PromptSet& prompts = PromptSet::builtin());

/// True when the longest common substring of the normalized texts covers
/// at least `ratio` of the normalized contradiction.
bool contradiction_present(std::string_view body, std::string_view contradiction,
                           double ratio = 0.6);

/// Rewrites `doc` with the contradiction blended in. The result keeps the
/// id, metadata and ppl_base of `doc`; body and trailers are replaced.
Document blend_self(ChatProvider& chat, const Document& doc, const std::string& target,
                    const std::string& contradiction,
                    const PromptSet& prompts = PromptSet::builtin());

struct PairwiseResult {
  Document d2;
  ContradictionRecord record;
  double ppl_draft = 0.0;  // d2 baseline, generated without the contradiction
};

/// Generates sibling document d2 from meta2 (department and domain forced
/// to d1's) stating `contradiction` and omitting `target`. The delta
/// baseline is `baseline_ppl` when given (the perplexity of a d2 draft
/// without the contradiction), otherwise such a draft is generated and
/// scored here.
PairwiseResult embed_pairwise(ChatProvider& chat, LogprobProvider& lm,
                              const OrganizationProfile& profile, const Document& d1,
                              const std::string& target, const std::string& contradiction,
                              DocumentMetadata meta2, std::optional<double> baseline_ppl = {},
                              const GenerationConfig& gen = {},
                              const PromptSet& prompts = PromptSet::builtin());

/// (ppl_contr - ppl_base) / ppl_base. Throws PreconditionError for base <= 0.
double delta_rel(double ppl_base, double ppl_contr);

struct GateVerdict {
  bool pass = true;
  std::vector<std::string> violations;  // "delta_self", "delta_pair", "ppl_cap"
};

GateVerdict validate_injection(double ppl_base, double ppl_contr, Mode mode,
                               const DeltaGate& gate = {});

struct InjectionPlan {
  Mode mode = Mode::Self;
  std::string source;  // doc id holding the target
  std::string host;    // doc id receiving the contradiction
};

/// Plans per domain in document order. `docs` may mix domains; relative
/// order within a domain is kept.
std::vector<InjectionPlan> schedule_corpus(const std::vector<Document>& docs,
                                           const InjectionPolicy& policy);

struct InjectionConfig {
  DeltaGate gate;
  GenerationConfig gen;
  std::vector<FewShotExample> few_shot = default_few_shot();
};

struct InjectionOutcome {
  Document host;  // updated host (blended for self, replacement d2 for pairwise)
  ContradictionRecord record;
  int attempts = 1;
};

/// Runs one plan end to end: target selection, contradiction, blend or
/// embed, gate. Gate failures regenerate from the blend/embed step within
/// gen.max_attempts; exhaustion raises ValidationError. Pairwise hosts are
/// rewritten from their own metadata (domain and department taken from the
/// source).
InjectionOutcome execute_plan(const Providers& providers, const OrganizationProfile& profile,
                              const InjectionPlan& plan, const Document& source,
                              const Document& host, const InjectionConfig& cfg = {},
                              const PromptSet& prompts = PromptSet::builtin());

/// Stable record id derived from the plan and statements.
std::string contradiction_id(Mode mode, const std::string& source, const std::string& host,
                             const std::string& target, const std::string& contradiction);

}  // namespace contraforge
