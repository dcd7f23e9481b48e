#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "contraforge/providers.hpp"

namespace contraforge {

/// Body could be fetched but not decoded; names the missing or mistyped field.
class DecodeError : public ProviderError {
 public:
  DecodeError(const std::string& field, const std::string& detail)
      : ProviderError("cannot decode response field '" + field + "': " + detail),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds base_delay{500};
  // Each delay is scaled by a uniform factor in [1, 1 + jitter).
  double jitter = 0.5;
  // Test hook; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct HttpEndpoint {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string model;
  // Bearer token; when absent CONTRAFORGE_API_KEY is read at request time.
  std::optional<std::string> api_key;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
};

/// JSON-over-HTTP POST with bearer auth, the global request limiter and
/// retries on network errors, 429 and 5xx. Other non-2xx statuses fail at
/// once.
class JsonTransport {
 public:
  explicit JsonTransport(HttpEndpoint endpoint);
  ~JsonTransport();

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const HttpEndpoint& endpoint() const { return endpoint_; }
  /// Attempts made by the most recent post() on this thread.
  static int last_attempts();

 private:
  HttpEndpoint endpoint_;
  std::string origin_;
  std::string prefix_;
};

/// OpenAI-compatible chat completions.
class OpenAiChat : public ChatProvider {
 public:
  explicit OpenAiChat(HttpEndpoint endpoint) : http_(std::move(endpoint)) {}
  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "openai-chat:" + http_.endpoint().model; }

 private:
  JsonTransport http_;
};

/// OpenAI-compatible embeddings; vectors are re-normalized locally.
class OpenAiEmbedder : public EmbeddingProvider {
 public:
  explicit OpenAiEmbedder(HttpEndpoint endpoint) : http_(std::move(endpoint)) {}
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string id() const override { return "openai-embeddings:" + http_.endpoint().model; }

 private:
  JsonTransport http_;
};

/// Token log-probabilities from a legacy completions endpoint that supports
/// echo=true with max_tokens=0 (as vLLM and similar servers do for causal
/// LMs such as GPT-2).
class CompletionLogprobs : public LogprobProvider {
 public:
  CompletionLogprobs(HttpEndpoint endpoint, std::size_t max_segment_bytes)
      : http_(std::move(endpoint)), max_segment_(max_segment_bytes) {}
  std::vector<double> token_logprobs(std::string_view text) override;
  std::size_t max_segment_bytes() const override { return max_segment_; }
  std::string id() const override { return "completion-logprobs:" + http_.endpoint().model; }

 private:
  JsonTransport http_;
  std::size_t max_segment_;
};

/// NLI classifier service: POST {base}/nli {model, premise, hypothesis}
/// answering {label, confidence}.
class HttpNli : public NliProvider {
 public:
  explicit HttpNli(HttpEndpoint endpoint) : http_(std::move(endpoint)) {}
  NliVerdict classify(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override { return "http-nli:" + http_.endpoint().model; }

 private:
  JsonTransport http_;
};

}  // namespace contraforge
