#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "contraforge/providers.hpp"

namespace contraforge::mock {

/// Stable 64-bit FNV-1a hash; the mocks derive every "random" choice from it.
std::uint64_t fnv1a(std::string_view s);

/// SHA-256 of the request's system and user text.
std::string prompt_hash(const ChatRequest& req);

/// Chat mock answering from a prompt-hash table, falling back to a rule
/// function (or an error when there is none).
class TableChat : public ChatProvider {
 public:
  using Rule = std::function<std::string(const ChatRequest&)>;

  explicit TableChat(std::map<std::string, std::string> by_hash = {}, Rule fallback = {});

  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "mock-table-chat"; }

 private:
  std::map<std::string, std::string> by_hash_;
  Rule fallback_;
};

/// Returns the scripted answers in order, repeating the last one. Records
/// every request it sees.
class ScriptedChat : public ChatProvider {
 public:
  explicit ScriptedChat(std::vector<std::string> answers);

  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "mock-scripted-chat"; }

  std::vector<ChatRequest> requests() const;
  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> answers_;
  std::vector<ChatRequest> seen_;
};

/// Decorator counting calls to another chat provider.
class CountingChat : public ChatProvider {
 public:
  explicit CountingChat(std::shared_ptr<ChatProvider> inner) : inner_(std::move(inner)) {}
  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return inner_->id(); }
  std::size_t calls() const { return calls_.load(); }
  /// Calls whose prompt was the contradiction-judge prompt.
  std::size_t judge_calls() const { return judge_calls_.load(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> judge_calls_{0};
};

/// A deterministic stand-in for the generation/judging LLM. It recognizes
/// every prompt template shipped with the library and answers with
/// well-formed, hedge-free text derived from hashes of the prompt content:
/// metadata blocks, five-paragraph documents with trailers, target
/// selection, digit-shifting contradictions, blends, judge and
/// verifiability verdicts.
class PipelineChat : public ChatProvider {
 public:
  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "mock-pipeline-chat"; }
};

/// Bag-of-tokens embedding: lowercase alphanumeric tokens hashed into
/// `dim` buckets with their counts, then L2-normalized. A text with no
/// tokens maps to bucket 0.
class HashingEmbedder : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 1024) : dim_(dim) {}

  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string id() const override { return "mock-hashing-embedder-" + std::to_string(dim_); }

  std::size_t bucket(std::string_view token) const;
  static std::vector<std::string> tokens(std::string_view text);

 private:
  std::size_t dim_;
};

/// Rule-based NLI:
///   hypothesis == "NOT " + premise -> (contradiction, 0.95)
///   hypothesis == premise          -> (entailment, 0.99)
///   otherwise                      -> (neutral, 0.60)
/// Comparisons use normalized text.
class RuleNli : public NliProvider {
 public:
  NliVerdict classify(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override { return "mock-rule-nli"; }
};

/// RuleNli that additionally knows a list of contradicting statement pairs
/// and labels any chunk pair matching one of them (by normalized
/// containment, either orientation) as (contradiction, 0.95).
class ColludingNli : public NliProvider {
 public:
  explicit ColludingNli(std::vector<std::pair<std::string, std::string>> known_pairs);

  NliVerdict classify(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override { return "mock-colluding-nli"; }

 private:
  std::vector<std::pair<std::string, std::string>> known_;
  RuleNli rules_;
};

/// Uniform language model over `vocab` symbols: every whitespace token gets
/// log-probability -ln(vocab).
class UniformLogprobs : public LogprobProvider {
 public:
  explicit UniformLogprobs(double vocab, std::size_t max_segment_bytes = 1u << 20)
      : vocab_(vocab), max_segment_(max_segment_bytes) {}

  std::vector<double> token_logprobs(std::string_view text) override;
  std::size_t max_segment_bytes() const override { return max_segment_; }
  std::string id() const override;

 private:
  double vocab_;
  std::size_t max_segment_;
};

/// Log-probabilities from a caller-supplied function of the text.
class FunctionLogprobs : public LogprobProvider {
 public:
  using Fn = std::function<std::vector<double>(std::string_view)>;
  explicit FunctionLogprobs(Fn fn, std::size_t max_segment_bytes = 1u << 20)
      : fn_(std::move(fn)), max_segment_(max_segment_bytes) {}

  std::vector<double> token_logprobs(std::string_view text) override;
  std::size_t max_segment_bytes() const override { return max_segment_; }
  std::string id() const override { return "mock-function-logprobs"; }

 private:
  Fn fn_;
  std::size_t max_segment_;
};

/// Mock counterparts of every capability; `nli` is RuleNli.
Providers make_mock_providers(double vocab = 18.0);

/// The transformation PipelineChat applies to build a contradiction: month
/// names rotate by three and non-year numbers change value.
std::string shift_facts(std::string_view sentence);

/// Sentence with digits and month names masked; two sentences with equal
/// skeletons differ only in dates and figures.
std::string fact_skeleton(std::string_view sentence);

}  // namespace contraforge::mock
