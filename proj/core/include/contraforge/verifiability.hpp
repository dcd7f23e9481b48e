#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contraforge/corpus.hpp"
#include "contraforge/prompts.hpp"
#include "contraforge/providers.hpp"

namespace contraforge {

enum class Verifiability { RetrievalVerifiable, RetrievalResistant };

std::string_view to_string(Verifiability v);
std::optional<Verifiability> parse_verifiability(std::string_view s);

struct VerifiabilityVerdict {
  Verifiability category = Verifiability::RetrievalResistant;
  std::string justification;
  double confidence = 0.5;
};

std::optional<VerifiabilityVerdict> parse_verifiability_response(std::string_view text);

/// Rubric call on a confirmed contradiction (human_label = 1). Reprompts
/// once on an unparseable answer, then throws JudgeParseError.
VerifiabilityVerdict classify_verifiability(ChatProvider& chat, const GoldItem& pair,
                                            const PromptSet& prompts = PromptSet::builtin());

/// One output line: the verdict or the error for a confirmed pair.
struct VerifiabilityRecord {
  std::string key;
  std::optional<VerifiabilityVerdict> verdict;
  std::optional<std::string> error;
};

struct VerifiabilityReport {
  std::vector<VerifiabilityRecord> records;
  std::size_t verifiable = 0;
  std::size_t resistant = 0;
  std::size_t errors = 0;
};

/// Classifies every confirmed item of `gold`; parse and provider failures
/// become error records.
VerifiabilityReport classify_all(ChatProvider& chat, const std::vector<GoldItem>& gold,
                                 const PromptSet& prompts = PromptSet::builtin());

nlohmann::json to_json(const VerifiabilityRecord& r);

}  // namespace contraforge
