#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contraforge/corpus.hpp"
#include "contraforge/prompts.hpp"
#include "contraforge/providers.hpp"

namespace contraforge {

enum class PairingPolicy { SameDomain, AllPairs };

std::string_view to_string(PairingPolicy p);
std::optional<PairingPolicy> parse_pairing_policy(std::string_view s);

struct MiningConfig {
  std::size_t k = 5;
  double theta_s = 0.55;
  double theta_conf = 0.7;
  double tau = 0.5;
  std::size_t min_words = 10;
  PairingPolicy pairing = PairingPolicy::SameDomain;
  unsigned workers = 4;
};

/// Throws ConfigError when a field is out of range.
void validate(const MiningConfig& cfg);

/// Drops chunks that are short, bulleted in raw form, or nothing but
/// numbers, dates and enumerators. Order is kept.
std::vector<std::string> filter_chunks(const std::vector<std::string>& chunks,
                                       std::size_t min_words);

/// A chunk with its precomputed unit embedding.
struct EmbeddedChunk {
  std::string doc;
  std::string text;
  const Embedding* vec = nullptr;
};

/// Top-k pairing over precomputed embeddings. For each src chunk keeps its
/// k most similar dst chunks with similarity >= theta_s (ties: lower dst
/// index first), skipping Self pairs of identical normalized text and
/// collapsing dst chunks with equal pair keys. Pairs are deduplicated by
/// key across src chunks; output is ordered by src index, then descending
/// similarity.
std::vector<CandidatePair> top_k_pairs(std::span<const EmbeddedChunk> src,
                                       std::span<const EmbeddedChunk> dst, Mode mode,
                                       const MiningConfig& cfg);

/// Embeds src and dst once and runs top_k_pairs.
std::vector<CandidatePair> candidate_pairs(EmbeddingProvider& embedder,
                                           const std::vector<std::string>& src,
                                           const std::vector<std::string>& dst, Mode mode,
                                           const MiningConfig& cfg,
                                           const std::string& doc1 = {},
                                           const std::string& doc2 = {});

/// Fills the NLI verdict (doc1_chunk is the premise) and the forwarding
/// decision. Non-forwarded pairs are final with hybrid_label 0.
CandidatePair nli_stage(CandidatePair pair, NliProvider& nli, const MiningConfig& cfg);

struct HybridScore {
  double s = 0.0;
  int label = 0;
  double w_nli = 0.5;
  double w_llm = 0.5;
};

/// Confidence-weighted vote of two binary labels; label = s > tau. Equal
/// weights when both confidences are zero. Throws PreconditionError for
/// out-of-range inputs.
HybridScore hybrid_score(int l_nli, double p_nli, int l_llm, double p_llm, double tau = 0.5);

/// Runs judge and hybrid on a forwarded pair; records failures in `error`.
CandidatePair judge_stage(CandidatePair pair, ChatProvider& chat, const MiningConfig& cfg,
                          const PromptSet& prompts = PromptSet::builtin());

/// Recomputes `source` from the stage outputs.
void assign_sources(CandidatePair& p);

struct MiningStats {
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::size_t candidates = 0;
  std::size_t forwarded = 0;
  std::size_t judged = 0;
  std::size_t flagged = 0;  // hybrid_label == 1
  std::size_t unresolved = 0;
};

struct MiningResult {
  std::vector<CandidatePair> pairs;  // sorted by key
  MiningStats stats;
};

/// Sentence chunks of a body that survive filter_chunks.
std::vector<std::string> mining_chunks(const std::string& body, std::size_t min_words);

/// The whole mining agent over a corpus for one mode. Provider failures are
/// kept per pair and never abort the run.
MiningResult mine(const std::vector<Document>& corpus, Mode mode, const Providers& providers,
                  const MiningConfig& cfg = {}, const PromptSet& prompts = PromptSet::builtin());

}  // namespace contraforge
