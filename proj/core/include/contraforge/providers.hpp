#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "contraforge/corpus.hpp"
#include "contraforge/error.hpp"
#include "contraforge/prompts.hpp"

namespace contraforge {

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  double temperature = 0.7;
  int max_tokens = 1024;
};

struct NliVerdict {
  NliLabel label = NliLabel::Neutral;
  double confidence = 0.0;
};

struct JudgeVerdict {
  int contradiction = 0;
  std::string reasoning;
  double confidence = 0.5;
};

using Embedding = std::vector<double>;

/// Chat-completion capability. Implementations must be safe for concurrent
/// calls.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Returns the first completion's message content verbatim.
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One L2-normalized vector per input, all of the same dimension.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
  virtual std::string id() const = 0;
};

class NliProvider {
 public:
  virtual ~NliProvider() = default;
  virtual NliVerdict classify(std::string_view premise, std::string_view hypothesis) = 0;
  virtual std::string id() const = 0;
};

class LogprobProvider {
 public:
  virtual ~LogprobProvider() = default;
  /// Natural-log token probabilities, one per token after the first
  /// (context-free) position. Every value is <= 0.
  virtual std::vector<double> token_logprobs(std::string_view text) = 0;
  /// Longest text, in bytes, the backend scores in one call.
  virtual std::size_t max_segment_bytes() const { return 1u << 20; }
  virtual std::string id() const = 0;
};

/// The full set of model-backed capabilities a pipeline run needs.
struct Providers {
  std::shared_ptr<ChatProvider> chat;
  std::shared_ptr<EmbeddingProvider> embedder;
  std::shared_ptr<NliProvider> nli;
  std::shared_ptr<LogprobProvider> logprobs;
};

/// Bounds the number of in-flight external requests.
class RequestLimiter {
 public:
  explicit RequestLimiter(std::ptrdiff_t max_in_flight = 8);

  class Permit {
   public:
    explicit Permit(RequestLimiter& l) : limiter_(&l) { limiter_->sem_.acquire(); }
    ~Permit() {
      if (limiter_) limiter_->sem_.release();
    }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    RequestLimiter* limiter_;
  };

  Permit acquire() { return Permit(*this); }
  std::ptrdiff_t capacity() const { return capacity_; }

  /// Process-wide limiter shared by every HTTP provider.
  static RequestLimiter& global();
  static void configure_global(std::ptrdiff_t max_in_flight);

 private:
  std::counting_semaphore<4096> sem_;
  std::ptrdiff_t capacity_;
};

/// Raised when a structured LLM answer stays unparseable after a reprompt.
class JudgeParseError : public ValidationError {
 public:
  JudgeParseError(const std::string& what, std::string raw)
      : ValidationError(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

/// Finds the first balanced JSON object in `text`, tolerating surrounding
/// prose and Markdown code fences.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

/// Asks the chat model whether two sentences contradict using the judge
/// prompt. Reprompts once on an unparseable answer, then throws
/// JudgeParseError carrying the last raw answer. A missing confidence is
/// read as 0.5.
JudgeVerdict judge_contradiction(ChatProvider& chat, std::string_view s1, std::string_view s2,
                                 const PromptSet& prompts = PromptSet::builtin());

/// Parses one judge answer; nullopt if it does not hold a usable verdict.
std::optional<JudgeVerdict> parse_judge_response(std::string_view text);

/// Scores a document that may exceed the backend window: splits at paragraph
/// boundaries into segments of at most max_segment_bytes(), scores each and
/// concatenates the token log-probabilities (a token-weighted combination).
std::vector<double> document_logprobs(LogprobProvider& provider, std::string_view text);

/// Dot product of two unit vectors (no clamping).
double cosine(const Embedding& a, const Embedding& b);

/// Scales `v` to unit L2 norm; throws ProviderError for a zero vector.
void l2_normalize(Embedding& v);

}  // namespace contraforge
