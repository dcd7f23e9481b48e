#include <httplib.h>

#include "contraforge/http_providers.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "contraforge/text.hpp"

namespace contraforge {

namespace {

thread_local int t_last_attempts = 0;

bool transient(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::chrono::milliseconds backoff(const RetryPolicy& p, int retry) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double scale = std::ldexp(1.0, retry) * (1.0 + p.jitter * u(rng));
  return std::chrono::milliseconds(
      static_cast<long long>(static_cast<double>(p.base_delay.count()) * scale));
}

const nlohmann::json& field(const nlohmann::json& j, const std::string& path,
                            const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw DecodeError(path, "missing");
  return j.at(key);
}

}  // namespace

JsonTransport::JsonTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  const std::string& url = endpoint_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint url needs a scheme: '" + url + "'");
  }
  const auto path_at = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_at);
  prefix_ = path_at == std::string::npos ? std::string() : url.substr(path_at);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

JsonTransport::~JsonTransport() = default;

int JsonTransport::last_attempts() { return t_last_attempts; }

nlohmann::json JsonTransport::post(const std::string& path, const nlohmann::json& body) const {
  std::string key;
  if (endpoint_.api_key) {
    key = *endpoint_.api_key;
  } else if (const char* env = std::getenv("CONTRAFORGE_API_KEY")) {
    key = env;
  }
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  const std::string payload = body.dump();
  const std::string target = prefix_ + path;
  const auto sleep = endpoint_.retry.sleep
                         ? endpoint_.retry.sleep
                         : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  t_last_attempts = 0;
  std::string last_problem;
  for (int attempt = 0; attempt <= endpoint_.retry.max_retries; ++attempt) {
    if (attempt > 0) sleep(backoff(endpoint_.retry, attempt - 1));
    ++t_last_attempts;
    httplib::Result res;
    {
      auto permit = RequestLimiter::global().acquire();
      httplib::Client client(origin_);
      client.set_connection_timeout(std::chrono::seconds(10));
      client.set_read_timeout(endpoint_.timeout);
      client.set_write_timeout(endpoint_.timeout);
      res = client.Post(target, headers, payload, "application/json");
    }
    if (!res) {
      last_problem = "network error: " + httplib::to_string(res.error());
      spdlog::warn("POST {}{} failed ({}), attempt {}", origin_, target, last_problem,
                   attempt + 1);
      continue;
    }
    if (transient(res->status)) {
      last_problem = "HTTP " + std::to_string(res->status);
      spdlog::warn("POST {}{} returned {}, attempt {}", origin_, target, res->status,
                   attempt + 1);
      continue;
    }
    if (res->status < 200 || res->status > 299) {
      throw ProviderError("POST " + target + " returned HTTP " + std::to_string(res->status) +
                          ": " + res->body.substr(0, 300));
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw DecodeError("<body>", "not valid JSON");
    return parsed;
  }
  throw ProviderError("POST " + target + " gave up after " + std::to_string(t_last_attempts) +
                      " attempts: " + last_problem);
}

std::string OpenAiChat::complete(const ChatRequest& request) {
  if (request.user.empty()) throw PreconditionError("chat request needs user text");
  nlohmann::json messages = nlohmann::json::array();
  if (request.system) messages.push_back({{"role", "system"}, {"content", *request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  const nlohmann::json body = {{"model", http_.endpoint().model},
                               {"messages", messages},
                               {"temperature", request.temperature},
                               {"max_tokens", request.max_tokens}};
  const auto res = http_.post("/chat/completions", body);
  const auto& choices = field(res, "choices", "choices");
  if (!choices.is_array() || choices.empty()) throw DecodeError("choices", "empty or not a list");
  const auto& message = field(choices[0], "choices[0].message", "message");
  const auto& content = field(message, "choices[0].message.content", "content");
  if (!content.is_string()) throw DecodeError("choices[0].message.content", "not a string");
  auto text = content.get<std::string>();
  if (trim(text).empty()) throw ProviderError("empty completion");
  return text;
}

std::vector<Embedding> OpenAiEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw PreconditionError("embed needs at least one text");
  const nlohmann::json body = {{"model", http_.endpoint().model},
                               {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto res = http_.post("/embeddings", body);
  const auto& data = field(res, "data", "data");
  if (!data.is_array() || data.size() != texts.size()) {
    throw DecodeError("data", "expected " + std::to_string(texts.size()) + " entries");
  }
  std::vector<Embedding> out(texts.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string name = "data[" + std::to_string(i) + "].embedding";
    const auto& e = field(data[i], name, "embedding");
    if (!e.is_array() || e.empty()) throw DecodeError(name, "not a numeric list");
    std::size_t slot = i;
    if (data[i].contains("index") && data[i]["index"].is_number_unsigned()) {
      slot = data[i]["index"].get<std::size_t>();
      if (slot >= out.size()) throw DecodeError("data[" + std::to_string(i) + "].index", "out of range");
    }
    out[slot] = e.get<Embedding>();
    if (out[slot].size() != out[0].size() && !out[0].empty()) {
      throw ProviderError("embedding dimension mismatch");
    }
    l2_normalize(out[slot]);
  }
  return out;
}

std::vector<double> CompletionLogprobs::token_logprobs(std::string_view text) {
  if (trim(text).empty()) throw PreconditionError("token_logprobs needs a non-empty text");
  const nlohmann::json body = {{"model", http_.endpoint().model},
                               {"prompt", std::string(text)},
                               {"max_tokens", 0},
                               {"echo", true},
                               {"logprobs", 0}};
  const auto res = http_.post("/completions", body);
  const auto& choices = field(res, "choices", "choices");
  if (!choices.is_array() || choices.empty()) throw DecodeError("choices", "empty or not a list");
  const auto& lp = field(choices[0], "choices[0].logprobs", "logprobs");
  const auto& tok = field(lp, "choices[0].logprobs.token_logprobs", "token_logprobs");
  if (!tok.is_array()) throw DecodeError("choices[0].logprobs.token_logprobs", "not a list");
  std::vector<double> out;
  for (const auto& v : tok) {
    if (v.is_null()) continue;  // the first token has no context
    if (!v.is_number()) throw DecodeError("choices[0].logprobs.token_logprobs", "non-numeric");
    out.push_back(std::min(0.0, v.get<double>()));
  }
  if (out.empty()) throw ProviderError("text too short to score");
  return out;
}

NliVerdict HttpNli::classify(std::string_view premise, std::string_view hypothesis) {
  if (trim(premise).empty() || trim(hypothesis).empty()) {
    throw PreconditionError("nli_classify needs non-empty premise and hypothesis");
  }
  const nlohmann::json body = {{"model", http_.endpoint().model},
                               {"premise", std::string(premise)},
                               {"hypothesis", std::string(hypothesis)}};
  const auto res = http_.post("/nli", body);
  const auto& label = field(res, "label", "label");
  if (!label.is_string()) throw DecodeError("label", "not a string");
  auto parsed = parse_nli_label(label.get<std::string>());
  if (!parsed) throw DecodeError("label", "unknown label '" + label.get<std::string>() + "'");
  const auto& conf = field(res, "confidence", "confidence");
  if (!conf.is_number()) throw DecodeError("confidence", "not a number");
  const double c = conf.get<double>();
  if (!(c >= 0.0 && c <= 1.0)) throw DecodeError("confidence", "outside [0,1]");
  return {*parsed, c};
}

}  // namespace contraforge
