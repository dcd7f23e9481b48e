#include "contraforge/verifiability.hpp"

#include "contraforge/text.hpp"

namespace contraforge {

std::string_view to_string(Verifiability v) {
  return v == Verifiability::RetrievalVerifiable ? "retrieval-verifiable" : "retrieval-resistant";
}

std::optional<Verifiability> parse_verifiability(std::string_view s) {
  std::string k;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (k == "retrievalverifiable" || k == "verifiable") return Verifiability::RetrievalVerifiable;
  if (k == "retrievalresistant" || k == "resistant") return Verifiability::RetrievalResistant;
  return std::nullopt;
}

std::optional<VerifiabilityVerdict> parse_verifiability_response(std::string_view text) {
  auto obj = extract_json_object(text);
  if (!obj) return std::nullopt;
  const auto& j = *obj;
  if (!j.contains("category") || !j["category"].is_string()) return std::nullopt;
  auto cat = parse_verifiability(j["category"].get<std::string>());
  if (!cat) return std::nullopt;
  if (!j.contains("justification") || !j["justification"].is_string()) return std::nullopt;
  VerifiabilityVerdict v;
  v.category = *cat;
  v.justification = trim(j["justification"].get<std::string>());
  if (v.justification.empty()) return std::nullopt;
  if (j.contains("confidence") && !j["confidence"].is_null()) {
    if (!j["confidence"].is_number()) return std::nullopt;
    v.confidence = j["confidence"].get<double>();
    if (!(v.confidence >= 0.0 && v.confidence <= 1.0)) return std::nullopt;
  }
  return v;
}

VerifiabilityVerdict classify_verifiability(ChatProvider& chat, const GoldItem& pair,
                                            const PromptSet& prompts) {
  if (pair.human_label != 1) {
    throw PreconditionError("verifiability needs a confirmed contradiction (human_label = 1)");
  }
  ChatRequest req;
  req.user = render_template(prompts.get("verifiability"),
                             {{"sentence1", pair.doc1_chunk},
                              {"context1", pair.context1.empty() ? pair.doc1_chunk : pair.context1},
                              {"sentence2", pair.doc2_chunk},
                              {"context2", pair.context2.empty() ? pair.doc2_chunk : pair.context2}});
  req.temperature = 0.0;
  req.max_tokens = 300;
  std::string raw = chat.complete(req);
  if (auto v = parse_verifiability_response(raw)) return *v;
  req.user += prompts.get("reprompt_structured");
  raw = chat.complete(req);
  if (auto v = parse_verifiability_response(raw)) return *v;
  throw JudgeParseError("verifiability answer is not a usable verdict object", raw);
}

VerifiabilityReport classify_all(ChatProvider& chat, const std::vector<GoldItem>& gold,
                                 const PromptSet& prompts) {
  VerifiabilityReport rep;
  for (const auto& g : gold) {
    if (g.human_label != 1) continue;
    VerifiabilityRecord r;
    r.key = g.key;
    try {
      r.verdict = classify_verifiability(chat, g, prompts);
      (r.verdict->category == Verifiability::RetrievalVerifiable ? rep.verifiable : rep.resistant)++;
    } catch (const JudgeParseError& e) {
      r.error = e.what();
      ++rep.errors;
    } catch (const ProviderError& e) {
      r.error = e.what();
      ++rep.errors;
    }
    rep.records.push_back(std::move(r));
  }
  return rep;
}

nlohmann::json to_json(const VerifiabilityRecord& r) {
  nlohmann::json j;
  j["kind"] = "verifiability";
  j["key"] = r.key;
  if (r.verdict) {
    j["category"] = std::string(to_string(r.verdict->category));
    j["justification"] = r.verdict->justification;
    j["confidence"] = r.verdict->confidence;
  }
  if (r.error) j["error"] = *r.error;
  return j;
}

}  // namespace contraforge
