#include "contraforge/generation.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "contraforge/text.hpp"

namespace contraforge {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string canonical_key(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    if (c == '*' || c == '#' || c == '`') continue;
    out.push_back(c == '_' ? ' ' : c);
  }
  return to_lower_ascii(normalize_text(out));
}

enum class Trailer { None, People, Docs };

// Header check after stripping markdown emphasis; the rest of the line (after
// the colon) is returned as inline content.
Trailer trailer_header(std::string_view line, std::string& inline_rest) {
  std::string s;
  for (char c : line) {
    if (c != '*' && c != '#') s.push_back(c);
  }
  s = normalize_text(s);
  std::string upper = s;
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto [name, kind] : {std::pair{std::string_view("NEW PEOPLE META DATA"), Trailer::People},
                            std::pair{std::string_view("NEW DOCUMENT META DATA"), Trailer::Docs}}) {
    if (upper.starts_with(name)) {
      std::string rest = trim(std::string_view(s).substr(name.size()));
      if (!rest.empty() && rest.front() == ':') rest = trim(std::string_view(rest).substr(1));
      if (!rest.empty() && upper.size() > name.size() && upper[name.size()] != ':') continue;
      inline_rest = rest;
      return kind;
    }
  }
  return Trailer::None;
}

}  // namespace

double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty()) throw PreconditionError("perplexity of an empty token list");
  double sum = 0.0;
  for (double lp : logprobs) {
    if (!(lp <= 0.0)) throw PreconditionError("log-probabilities must be <= 0");
    sum += lp;
  }
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

Date sample_date(std::uint64_t seed, const GenerationConfig& cfg) {
  const std::chrono::sys_days a{cfg.window_start};
  const std::chrono::sys_days b{cfg.window_end};
  if (b < a) throw ConfigError("date window end precedes its start");
  const auto span = static_cast<std::uint64_t>((b - a).count()) + 1;
  std::mt19937_64 rng(seed);
  return Date{a + std::chrono::days{static_cast<long>(rng() % span)}};
}

DocumentMetadata parse_metadata(std::string_view text, const GenerationConfig& cfg,
                                std::vector<std::string>& missing) {
  std::map<std::string, std::string> fields;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = canonical_key(line.substr(0, colon));
    std::string value = normalize_text(line.substr(colon + 1));
    while (!value.empty() && value.front() == '*') value.erase(0, 1);
    value = trim(value);
    if (key == "doc type" || key == "type") key = "document type";
    if (key == "authority") key = "authority level";
    if (!key.empty() && !value.empty() && !fields.contains(key)) fields[key] = value;
  }
  DocumentMetadata m;
  missing.clear();
  const auto take = [&](const char* key, std::string& dst) {
    auto it = fields.find(key);
    if (it == fields.end()) {
      missing.emplace_back(key);
    } else {
      dst = it->second;
    }
  };
  take("title", m.title);
  take("topic", m.topic);
  take("department", m.department);
  take("location", m.location);
  take("document type", m.doc_type);
  take("authority level", m.authority_level);
  auto d = fields.contains("date") ? parse_date(fields["date"].substr(0, 10)) : std::nullopt;
  if (d && std::chrono::sys_days{*d} >= std::chrono::sys_days{cfg.window_start} &&
      std::chrono::sys_days{*d} <= std::chrono::sys_days{cfg.window_end}) {
    m.date = *d;
  } else {
    missing.emplace_back("date");
  }
  return m;
}

DocumentMetadata generate_metadata(ChatProvider& chat, const OrganizationProfile& profile,
                                   const DomainTree& tree, const std::string& domain,
                                   const std::string& subdomain, std::uint64_t seed,
                                   const GenerationConfig& cfg, const PromptSet& prompts) {
  if (!tree.contains(domain, subdomain)) {
    throw PreconditionError("unknown domain/subdomain '" + domain + "/" + subdomain + "'");
  }
  ChatRequest req;
  req.user = render_template(prompts.get("metadata"),
                             {{"company", profile.name},
                              {"profile", profile.description},
                              {"locations", join(profile.locations, "; ")},
                              {"domain", domain},
                              {"subdomain", subdomain},
                              {"date", format_date(sample_date(seed, cfg))}});
  req.max_tokens = 400;
  std::vector<std::string> missing;
  auto meta = parse_metadata(chat.complete(req), cfg, missing);
  if (missing.empty()) return meta;

  spdlog::info("metadata answer lacked {}; reprompting", join(missing, ", "));
  req.user += "\n\nYour previous answer lacked these fields: " + join(missing, ", ") +
              ". Return all seven fields.";
  meta = parse_metadata(chat.complete(req), cfg, missing);
  if (!missing.empty()) {
    throw ValidationError("metadata still missing after reprompt: " + join(missing, ", "));
  }
  return meta;
}

DocumentParts split_trailers(std::string_view text) {
  DocumentParts parts;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string body;
  Trailer section = Trailer::None;
  bool seen_header = false;
  while (std::getline(in, line)) {
    std::string rest;
    const Trailer h = trailer_header(line, rest);
    if (h != Trailer::None) {
      seen_header = true;
      section = h;
      (h == Trailer::People ? parts.has_people : parts.has_docs) = true;
      if (!rest.empty()) (h == Trailer::People ? parts.people_meta : parts.doc_meta).push_back(rest);
      continue;
    }
    if (!seen_header) {
      body += line;
      body += '\n';
      continue;
    }
    const std::string item = normalize_text(line);
    if (item.empty()) continue;
    (section == Trailer::People ? parts.people_meta : parts.doc_meta).push_back(item);
  }
  parts.body = trim(body);
  return parts;
}

std::string join_trailers(const std::string& body, const std::vector<std::string>& people,
                          const std::vector<std::string>& docs) {
  std::string out = trim(body) + "\n\nNEW PEOPLE META DATA:\n";
  for (const auto& p : people) out += "- " + p + "\n";
  out += "\nNEW DOCUMENT META DATA:\n";
  for (const auto& d : docs) out += "- " + d + "\n";
  return out;
}

std::string base_document_prompt(const DocumentMetadata& meta, const OrganizationProfile& profile,
                                 const std::string& domain, const std::string& subdomain,
                                 const PromptSet& prompts) {
  return render_template(prompts.get("base_document"),
                         {{"company", profile.name},
                          {"domain", domain},
                          {"topic", meta.topic},
                          {"phrase", subdomain},
                          {"doc_type", meta.doc_type},
                          {"date", format_date(meta.date)},
                          {"department", meta.department},
                          {"locations", meta.location}});
}

std::string document_id(const DocumentMetadata& meta, std::string_view body) {
  return "doc-" + sha256_hex(meta.title + "\n" + std::string(body)).substr(0, 16);
}

Document generate_base_document(ChatProvider& chat, const DocumentMetadata& meta,
                                const OrganizationProfile& profile, const std::string& domain,
                                const std::string& subdomain, const GenerationConfig& cfg,
                                const PromptSet& prompts, const std::string& addendum) {
  ChatRequest req;
  req.user = base_document_prompt(meta, profile, domain, subdomain, prompts) + addendum;
  req.max_tokens = 2000;

  std::optional<DocumentParts> parts;
  for (int attempt = 1; attempt <= std::max(1, cfg.max_attempts); ++attempt) {
    auto candidate = split_trailers(chat.complete(req));
    const auto n = split_paragraphs(candidate.body).size();
    if (n >= cfg.paragraph_min) {
      parts = std::move(candidate);
      break;
    }
    spdlog::info("draft has {} paragraphs (< {}), regenerating", n, cfg.paragraph_min);
  }
  if (!parts) {
    throw ValidationError("no draft reached " + std::to_string(cfg.paragraph_min) +
                          " paragraphs in " + std::to_string(cfg.max_attempts) + " attempts");
  }

  Document doc;
  if (!(parts->has_people && parts->has_docs)) {
    ChatRequest again = req;
    again.user +=
        "\n\nYour previous answer omitted the closing sections. End the document with the "
        "NEW PEOPLE META DATA and NEW DOCUMENT META DATA sections.";
    auto retry = split_trailers(chat.complete(again));
    if (retry.has_people && retry.has_docs &&
        split_paragraphs(retry.body).size() >= cfg.paragraph_min) {
      parts = std::move(retry);
    } else {
      spdlog::warn("document for '{}' lacks metadata trailers after reprompt", meta.title);
      doc.trailer_warning = true;
      parts->people_meta.clear();
      parts->doc_meta.clear();
    }
  }
  doc.metadata = meta;
  doc.domain = domain;
  doc.subdomain = subdomain;
  doc.body = std::move(parts->body);
  doc.people_meta = std::move(parts->people_meta);
  doc.doc_meta = std::move(parts->doc_meta);
  doc.id = document_id(meta, doc.body);
  return doc;
}

FluencyReport fluency_gate(LogprobProvider& lm, const Document& doc, const GenerationConfig& cfg,
                           int attempt) {
  const auto lps = document_logprobs(lm, doc.body);
  FluencyReport r;
  r.ppl = perplexity(lps);
  r.token_count = lps.size();
  r.accepted = fluency_accepts(r.ppl, cfg);
  r.attempts = attempt;
  return r;
}

Document generate_gated_document(ChatProvider& chat, LogprobProvider& lm,
                                 const DocumentMetadata& meta, const OrganizationProfile& profile,
                                 const std::string& domain, const std::string& subdomain,
                                 const GenerationConfig& cfg, const PromptSet& prompts,
                                 const std::string& addendum) {
  std::vector<FluencyReport> reports;
  for (int attempt = 1; attempt <= std::max(1, cfg.max_attempts); ++attempt) {
    Document doc = generate_base_document(chat, meta, profile, domain, subdomain, cfg, prompts,
                                          addendum);
    auto report = fluency_gate(lm, doc, cfg, attempt);
    reports.push_back(report);
    if (report.accepted) {
      doc.ppl_base = report.ppl;
      doc.gen_attempts = attempt;
      return doc;
    }
    spdlog::info("draft '{}' rejected: ppl {:.3f} > {}", meta.title, report.ppl, cfg.ppl_cap);
  }
  throw GateExhausted(std::move(reports));
}

}  // namespace contraforge
