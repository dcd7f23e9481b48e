#include "contraforge/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include <spdlog/spdlog.h>

#include "contraforge/text.hpp"

namespace contraforge {

namespace {

std::mutex g_limiter_mu;
std::unique_ptr<RequestLimiter> g_limiter;

std::optional<int> read_bool_label(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) {
    const auto n = v.get<long long>();
    if (n == 0 || n == 1) return static_cast<int>(n);
    return std::nullopt;
  }
  if (v.is_string()) {
    const auto s = to_lower_ascii(trim(v.get<std::string>()));
    if (s == "true" || s == "yes" || s == "1") return 1;
    if (s == "false" || s == "no" || s == "0") return 0;
  }
  return std::nullopt;
}

std::optional<double> read_unit_interval(const nlohmann::json& v) {
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    char* end = nullptr;
    const std::string s = v.get<std::string>();
    x = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (!(x >= 0.0 && x <= 1.0)) return std::nullopt;
  return x;
}

void pack_segments(std::string_view text, std::size_t limit, std::vector<std::string>& out) {
  // Paragraphs first, then sentences, then a hard cut at whitespace.
  std::vector<std::string> pieces = split_paragraphs(text);
  std::string sep = "\n\n";
  if (pieces.size() <= 1) {
    pieces.clear();
    for (auto& c : segment_sentences(text)) pieces.push_back(c.text);
    sep = " ";
  }
  if (pieces.size() <= 1) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t len = std::min(limit, text.size() - pos);
      if (pos + len < text.size()) {
        const auto ws = text.rfind(' ', pos + len);
        if (ws != std::string_view::npos && ws > pos) len = ws - pos;
      }
      std::string piece = trim(text.substr(pos, len));
      if (!piece.empty()) out.push_back(std::move(piece));
      pos += std::max<std::size_t>(len, 1);
    }
    return;
  }
  std::string current;
  for (auto& p : pieces) {
    if (p.size() > limit) {
      if (!current.empty()) out.push_back(std::exchange(current, {}));
      pack_segments(p, limit, out);
      continue;
    }
    if (!current.empty() && current.size() + sep.size() + p.size() > limit) {
      out.push_back(std::exchange(current, {}));
    }
    if (!current.empty()) current += sep;
    current += p;
  }
  if (!current.empty()) out.push_back(std::move(current));
}

}  // namespace

RequestLimiter::RequestLimiter(std::ptrdiff_t max_in_flight)
    : sem_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 4096)),
      capacity_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 4096)) {}

RequestLimiter& RequestLimiter::global() {
  std::lock_guard lock(g_limiter_mu);
  if (!g_limiter) g_limiter = std::make_unique<RequestLimiter>(8);
  return *g_limiter;
}

void RequestLimiter::configure_global(std::ptrdiff_t max_in_flight) {
  std::lock_guard lock(g_limiter_mu);
  // Replacing a limiter with permits outstanding would be unsafe; only
  // configure before providers are used.
  g_limiter = std::make_unique<RequestLimiter>(max_in_flight);
}

std::optional<JudgeVerdict> parse_judge_response(std::string_view text) {
  auto obj = extract_json_object(text);
  if (!obj || !obj->contains("contradiction")) return std::nullopt;
  auto label = read_bool_label((*obj)["contradiction"]);
  if (!label) return std::nullopt;
  JudgeVerdict v;
  v.contradiction = *label;
  if (!obj->contains("reasoning") || !(*obj)["reasoning"].is_string()) return std::nullopt;
  v.reasoning = trim((*obj)["reasoning"].get<std::string>());
  if (v.reasoning.empty()) return std::nullopt;
  if (obj->contains("confidence") && !(*obj)["confidence"].is_null()) {
    auto c = read_unit_interval((*obj)["confidence"]);
    if (!c) return std::nullopt;
    v.confidence = *c;
  } else {
    v.confidence = 0.5;
  }
  return v;
}

JudgeVerdict judge_contradiction(ChatProvider& chat, std::string_view s1, std::string_view s2,
                                 const PromptSet& prompts) {
  if (trim(s1).empty() || trim(s2).empty()) {
    throw PreconditionError("judge_contradiction needs two non-empty sentences");
  }
  ChatRequest req;
  req.user = render_template(prompts.get("judge"),
                             {{"sentence1", std::string(s1)}, {"sentence2", std::string(s2)}});
  req.temperature = 0.0;
  req.max_tokens = 300;
  std::string raw = chat.complete(req);
  if (auto v = parse_judge_response(raw)) return *v;

  req.user += prompts.get("reprompt_structured");
  raw = chat.complete(req);
  if (auto v = parse_judge_response(raw)) return *v;
  throw JudgeParseError("judge answer is not a usable verdict object", raw);
}

std::vector<double> document_logprobs(LogprobProvider& provider, std::string_view text) {
  if (trim(text).empty()) throw PreconditionError("cannot score an empty text");
  const std::size_t limit = std::max<std::size_t>(provider.max_segment_bytes(), 1);
  if (text.size() <= limit) return provider.token_logprobs(text);
  std::vector<std::string> segments;
  pack_segments(text, limit, segments);
  spdlog::debug("scoring {} bytes in {} segments", text.size(), segments.size());
  std::vector<double> all;
  for (const auto& seg : segments) {
    auto lp = provider.token_logprobs(seg);
    all.insert(all.end(), lp.begin(), lp.end());
  }
  return all;
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw ProviderError("embedding dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot;
}

void l2_normalize(Embedding& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (!(sq > 0.0)) throw ProviderError("cannot normalize a zero embedding");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

}  // namespace contraforge
