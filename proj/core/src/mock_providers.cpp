#include "contraforge/mock_providers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "contraforge/text.hpp"

namespace contraforge::mock {

namespace {

constexpr std::array<std::string_view, 12> kMonths = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

constexpr std::array<std::string_view, 12> kNames = {
    "Priya Deshmukh", "Mei Lin Tan",   "Tomasz Nowak",    "Amara Okafor",
    "Kenji Watanabe", "Lucia Ferreira", "Omar Haddad",    "Ingrid Solberg",
    "Rahul Menon",    "Chiara Bianchi", "Kwame Mensah",   "Sofia Lindqvist"};

constexpr std::array<std::string_view, 6> kRoles = {
    "Senior Counsel",          "Compliance Manager", "Director of Legal Operations",
    "Policy Analyst",          "Contracts Administrator", "Risk Officer"};

constexpr std::array<std::string_view, 4> kPortals = {"LegalDesk", "ComplianceHub",
                                                       "PolicyPoint", "VendorGate"};

constexpr std::array<std::string_view, 8> kTopicNouns = {
    "approval workflow",     "retention schedule", "escalation rules",
    "audit readiness plan",  "vendor obligations", "training requirements",
    "reporting calendar",    "access controls"};

constexpr std::array<std::string_view, 5> kDocTypes = {
    "policy memo", "directive", "agreement", "compliance notice", "procedure manual"};

constexpr std::array<std::string_view, 4> kAuthority = {
    "board-approved", "executive", "departmental", "regional"};

struct SplitMix {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

std::optional<std::string> between(std::string_view text, std::string_view open,
                                   std::string_view close) {
  const auto a = text.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const auto start = a + open.size();
  const auto b = close.empty() ? text.size() : text.find(close, start);
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(start, b - start));
}

std::string line_value(std::string_view text, std::string_view label) {
  auto v = between(text, label, "\n");
  return v ? trim(*v) : std::string{};
}

std::string long_date(const std::string& iso, int add_days = 0) {
  auto d = parse_date(iso);
  if (!d) return iso;
  const Date shifted{std::chrono::sys_days{*d} + std::chrono::days{add_days}};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s %u, %d",
                std::string(kMonths[static_cast<unsigned>(shifted.month()) - 1]).c_str(),
                static_cast<unsigned>(shifted.day()), static_cast<int>(shifted.year()));
  return buf;
}

std::string iso_shift(const std::string& iso, int add_days) {
  auto d = parse_date(iso);
  if (!d) return iso;
  return format_date(Date{std::chrono::sys_days{*d} + std::chrono::days{add_days}});
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ';') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::string fenced(const std::string& json_text) { return "```json\n" + json_text + "\n```"; }

struct DocFields {
  std::string company;
  std::string domain;
  std::string topic;
  std::string phrase;
  std::string doc_type;
  std::string date;
  std::string department;
  std::vector<std::string> locations;
};

std::string compose_document(const DocFields& f, const std::optional<std::string>& embed,
                             const std::optional<std::string>& omit) {
  SplitMix rng{fnv1a(f.topic + "|" + f.doc_type + "|" + f.date + "|" + f.department)};
  const std::string location =
      f.locations.empty() ? std::string("headquarters")
                          : f.locations[rng.below(f.locations.size())];
  const std::string portal(kPortals[rng.below(kPortals.size())]);
  const std::size_t n1 = rng.below(kNames.size());
  const std::size_t n2 = (n1 + 1 + rng.below(kNames.size() - 1)) % kNames.size();
  const std::string name1(kNames[n1]);
  const std::string name2(kNames[n2]);
  const std::string role1(kRoles[rng.below(kRoles.size())]);
  const std::string role2(kRoles[rng.below(kRoles.size())]);
  const auto num = [&](std::uint64_t lo, std::uint64_t span) {
    return std::to_string(lo + rng.below(span));
  };
  const std::string days = num(3, 12);
  const std::string hours = num(12, 60);
  const std::string ext = num(2100, 7000);
  const std::string months = num(2, 10);
  const std::string breach_hours = num(24, 48);
  const std::string years = num(3, 8);
  const std::string lower_phrase = to_lower_ascii(f.phrase);
  const std::string t = f.topic;
  const std::string dt = f.doc_type;

  std::vector<std::vector<std::string>> paragraphs = {
      {"The " + t + " " + dt + " takes effect on " + long_date(f.date) +
           " and binds every employee of " + f.company + " assigned to the " + location +
           " office.",
       "This " + dt + " is issued by the " + f.department +
           " and replaces all earlier guidance on " + lower_phrase + "."},
      {"All requests under the " + t + " " + dt + " are submitted through the " + portal +
           " portal within " + days + " business days of the triggering event.",
       "The " + f.department + " acknowledges each " + t + " submission within " + hours +
           " hours and logs it in the central compliance register."},
      {name1 + ", " + role1 + ", is the primary contact for the " + t +
           " program and answers queries at extension " + ext + ".",
       "Reviews of " + t + " obligations take place every " + months + " months at the " +
           location + " office with the legal review board."},
      {"Any breach of the " + t + " " + dt + " is reported to the " + f.department +
           " within " + breach_hours + " hours of discovery.",
       "Records connected to the " + t + " program are retained for " + years +
           " years in the secure archive at the " + location + " office."},
      {"External partners receive a written copy of the " + t + " " + dt + " before " +
           long_date(f.date, 30) + " as part of onboarding.",
       "Escalations from external partners go to " + name2 + ", " + role2 + ", through the " +
           f.department + " mailbox."},
  };

  if (omit) {
    const std::string banned = normalize_text(*omit);
    for (auto& p : paragraphs) {
      std::erase_if(p, [&](const std::string& s) {
        const std::string n = normalize_text(s);
        return n == banned || n.find(banned) != std::string::npos;
      });
    }
    std::erase_if(paragraphs, [](const auto& p) { return p.empty(); });
  }
  if (embed) paragraphs.insert(paragraphs.begin() + 2, {trim(*embed)});

  std::ostringstream out;
  for (const auto& p : paragraphs) {
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << p[i];
    out << "\n\n";
  }
  out << "NEW PEOPLE META DATA:\n"
      << "- " << name1 << ", " << role1 << ", " << f.department << "\n"
      << "- " << name2 << ", " << role2 << ", " << f.department << "\n\n"
      << "NEW DOCUMENT META DATA:\n"
      << "- " << t << " " << dt << " (" << f.date << ")\n"
      << "- " << portal << " submission form (" << iso_shift(f.date, 30) << ")\n";
  return out.str();
}

std::string answer_metadata(const std::string& prompt) {
  const std::string company = line_value(prompt, "Organization: ");
  const std::string domain = line_value(prompt, "Legal domain: ");
  const std::string subdomain = line_value(prompt, "Subdomain: ");
  const std::string date = line_value(prompt, "Document date: ");
  const auto locations = split_list(line_value(prompt, "Operating locations: "));
  SplitMix rng{fnv1a(prompt)};
  const std::string noun(kTopicNouns[rng.below(kTopicNouns.size())]);
  const std::string doc_type(kDocTypes[rng.below(kDocTypes.size())]);
  std::ostringstream out;
  out << "Title: " << subdomain << " " << noun << " " << doc_type << "\n"
      << "Topic: " << subdomain << " " << noun << "\n"
      << "Date: " << date << "\n"
      << "Department: " << domain << " Office, " << company << "\n"
      << "Location: "
      << (locations.empty() ? std::string("Headquarters")
                            : locations[rng.below(locations.size())])
      << "\n"
      << "Document Type: " << doc_type << "\n"
      << "Authority Level: " << kAuthority[rng.below(kAuthority.size())] << "\n";
  return out.str();
}

std::string answer_base_document(const std::string& prompt) {
  DocFields f;
  f.company = between(prompt, "paragraphs) for ", " in the domain of ").value_or("the company");
  f.domain = between(prompt, " in the domain of ", ".\n").value_or("");
  f.topic = between(prompt, "The topic is '", "', related to '").value_or("policy");
  f.phrase = between(prompt, "', related to '", "'.").value_or(f.topic);
  f.doc_type = between(prompt, "Use the format of a ", ". Structure").value_or("policy memo");
  f.date = between(prompt, "close to ", " and associate").value_or("2024-01-01");
  f.department =
      between(prompt, "contact info for ", ". The content should create specific sub-locations")
          .value_or("Legal Department");
  f.locations = split_list(between(prompt, "sub-locations within ", ".\n").value_or(""));
  auto embed = between(prompt, "as an established policy of this document: \"", "\"\n");
  auto omit = between(prompt, "this statement from a related document: \"", "");
  if (omit) {
    *omit = trim(*omit);
    if (!omit->empty() && omit->back() == '"') omit->pop_back();
  }
  return compose_document(f, embed, omit);
}

std::string answer_identify(const std::string& prompt) {
  const auto doc = between(prompt, "DOCUMENT:\n", "").value_or(prompt);
  for (const auto& c : segment_sentences(doc)) {
    if (std::any_of(c.text.begin(), c.text.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      return c.text;
    }
  }
  auto chunks = segment_sentences(doc);
  return chunks.empty() ? std::string() : chunks.front().text;
}

std::string answer_contradiction(const std::string& prompt) {
  const std::string target =
      trim(between(prompt, "TARGET STATEMENT:\n\n", "\n\nORIGINAL DOCUMENT:").value_or(""));
  const bool has_month = std::any_of(kMonths.begin(), kMonths.end(), [&](auto m) {
    return contains_word_ci(target, m);
  });
  const bool has_digit = std::any_of(target.begin(), target.end(), [](char ch) {
    return std::isdigit(static_cast<unsigned char>(ch));
  });
  std::string type = has_month ? "Temporal" : has_digit ? "Numerical" : "Policy Reversal";
  std::string statement = shift_facts(target);
  if (statement == target) statement = "The requirement that " + target + " is revoked.";
  return "TYPE: " + type + "\nCONTRADICTION: " + statement + "\n";
}

std::string answer_blend(const std::string& prompt) {
  const std::string base =
      between(prompt, "DOCUMENT:\n\n", "\n\nORIGINAL TARGET STATEMENT:").value_or("");
  const std::string contradiction =
      trim(between(prompt, "CONTRADICTION PARAGRAPH:\n\n", "\n\nReturn ONLY the final")
               .value_or(""));
  const auto trailer_at = base.find("NEW PEOPLE META DATA");
  const std::string body = base.substr(0, trailer_at);
  const std::string trailer =
      trailer_at == std::string::npos ? std::string() : base.substr(trailer_at);
  auto paragraphs = split_paragraphs(body);
  const std::size_t at = paragraphs.size() >= 2 ? paragraphs.size() - 1 : paragraphs.size();
  paragraphs.insert(paragraphs.begin() + static_cast<std::ptrdiff_t>(at), contradiction);
  std::string out;
  for (const auto& p : paragraphs) out += p + "\n\n";
  return out + trailer;
}

std::string answer_judge(const std::string& prompt) {
  const std::string s1 = between(prompt, "Sentence 1: \"", "\"\nSentence 2: \"").value_or("");
  const std::string s2 = between(prompt, "\"\nSentence 2: \"", "\"\n").value_or("");
  const bool conflict = !s1.empty() && fact_skeleton(s1) == fact_skeleton(s2) &&
                        normalize_text(s1) != normalize_text(s2);
  nlohmann::json j;
  j["contradiction"] = conflict;
  j["reasoning"] = conflict
                       ? "Both sentences state the same obligation with different dates or figures."
                       : "The sentences address different aspects of the document without conflict.";
  j["confidence"] = conflict ? 0.9 : 0.7;
  return fenced(j.dump());
}

std::string answer_verifiability(const std::string& prompt) {
  static constexpr std::array<std::string_view, 5> kEvidenceWords = {
      "statute", "statutory", "regulation", "law", "act"};
  const std::string material =
      between(prompt, "Statement 1: ", "Could a retrieval system").value_or("");
  const bool verifiable = std::any_of(kEvidenceWords.begin(), kEvidenceWords.end(),
                                      [&](auto w) { return contains_word_ci(material, w); });
  nlohmann::json j;
  j["category"] = verifiable ? "retrieval-verifiable" : "retrieval-resistant";
  j["justification"] = verifiable
                           ? "A governing public statute or regulation settles which statement holds."
                           : "No public authoritative source governs this internal choice.";
  j["confidence"] = verifiable ? 0.8 : 0.7;
  return fenced(j.dump());
}

}  // namespace

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string prompt_hash(const ChatRequest& req) {
  return sha256_hex(req.system.value_or("") + "\x1f" + req.user);
}

std::string shift_facts(std::string_view sentence) {
  std::string out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    const auto c = static_cast<unsigned char>(sentence[i]);
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < sentence.size() && std::isdigit(static_cast<unsigned char>(sentence[j]))) ++j;
      const std::string digits(sentence.substr(i, j - i));
      const unsigned long long n = std::stoull(digits.size() > 18 ? digits.substr(0, 18) : digits);
      if (digits.size() == 4 && n >= 1900 && n <= 2099) {
        out += digits;
      } else if (n <= 31) {
        out += std::to_string((n + 12) % 28 + 1);
      } else {
        out += std::to_string(n * 2);
      }
      i = j;
      continue;
    }
    if (std::isalpha(c)) {
      std::size_t j = i;
      while (j < sentence.size() && std::isalpha(static_cast<unsigned char>(sentence[j]))) ++j;
      const std::string_view word = sentence.substr(i, j - i);
      auto it = std::find(kMonths.begin(), kMonths.end(), word);
      if (it != kMonths.end()) {
        auto m = (static_cast<std::size_t>(it - kMonths.begin()) + 3) % 12;
        if (kMonths[m] == "May") m = (m + 1) % 12;  // "may" is a hedge word
        out += kMonths[m];
      } else {
        out += word;
      }
      i = j;
      continue;
    }
    out.push_back(sentence[i]);
    ++i;
  }
  return out;
}

std::string fact_skeleton(std::string_view sentence) {
  std::string out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    const auto c = static_cast<unsigned char>(sentence[i]);
    if (std::isdigit(c)) {
      while (i < sentence.size() && std::isdigit(static_cast<unsigned char>(sentence[i]))) ++i;
      out.push_back('#');
      continue;
    }
    if (std::isalpha(c)) {
      std::size_t j = i;
      while (j < sentence.size() && std::isalpha(static_cast<unsigned char>(sentence[j]))) ++j;
      const std::string_view word = sentence.substr(i, j - i);
      out += std::find(kMonths.begin(), kMonths.end(), word) != kMonths.end()
                 ? std::string("@")
                 : to_lower_ascii(word);
      i = j;
      continue;
    }
    out.push_back(sentence[i]);
    ++i;
  }
  return normalize_text(out);
}

TableChat::TableChat(std::map<std::string, std::string> by_hash, Rule fallback)
    : by_hash_(std::move(by_hash)), fallback_(std::move(fallback)) {}

std::string TableChat::complete(const ChatRequest& request) {
  auto it = by_hash_.find(prompt_hash(request));
  if (it != by_hash_.end()) return it->second;
  if (fallback_) return fallback_(request);
  throw ProviderError("mock chat has no answer for prompt " + prompt_hash(request));
}

ScriptedChat::ScriptedChat(std::vector<std::string> answers) : answers_(std::move(answers)) {}

std::string ScriptedChat::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  seen_.push_back(request);
  if (answers_.empty()) throw ProviderError("scripted chat has no answers");
  const std::size_t i = std::min(seen_.size() - 1, answers_.size() - 1);
  return answers_[i];
}

std::vector<ChatRequest> ScriptedChat::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

std::size_t ScriptedChat::calls() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::string CountingChat::complete(const ChatRequest& request) {
  ++calls_;
  if (request.user.starts_with("You are an expert at detecting logical contradictions")) {
    ++judge_calls_;
  }
  return inner_->complete(request);
}

std::string PipelineChat::complete(const ChatRequest& request) {
  const std::string& p = request.user;
  if (p.find("Return ONLY the final, blended document") != std::string::npos) {
    return answer_blend(p);
  }
  if (p.find("DIRECTLY CONTRADICTS") != std::string::npos) return answer_contradiction(p);
  if (p.find("identify the most important/specific statement") != std::string::npos) {
    return answer_identify(p);
  }
  if (p.starts_with("You are an expert at detecting logical contradictions")) {
    return answer_judge(p);
  }
  if (p.find("Could a retrieval system") != std::string::npos) return answer_verifiability(p);
  if (p.find("Return exactly these seven fields") != std::string::npos) {
    return answer_metadata(p);
  }
  if (p.find("Generate a professional, coherent business document") != std::string::npos) {
    return answer_base_document(p);
  }
  return "Acknowledged.";
}

std::vector<std::string> HashingEmbedder::tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t HashingEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(fnv1a(token) % dim_);
}

std::vector<Embedding> HashingEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw PreconditionError("embed needs at least one text");
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    Embedding v(dim_, 0.0);
    const auto toks = tokens(t);
    if (toks.empty()) v[0] = 1.0;
    for (const auto& tok : toks) v[bucket(tok)] += 1.0;
    l2_normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

NliVerdict RuleNli::classify(std::string_view premise, std::string_view hypothesis) {
  if (trim(premise).empty() || trim(hypothesis).empty()) {
    throw PreconditionError("nli_classify needs non-empty premise and hypothesis");
  }
  const std::string p = normalize_text(premise);
  const std::string h = normalize_text(hypothesis);
  if (h == "NOT " + p) return {NliLabel::Contradiction, 0.95};
  if (h == p) return {NliLabel::Entailment, 0.99};
  return {NliLabel::Neutral, 0.60};
}

ColludingNli::ColludingNli(std::vector<std::pair<std::string, std::string>> known_pairs) {
  for (auto& [a, b] : known_pairs) known_.emplace_back(normalize_text(a), normalize_text(b));
}

NliVerdict ColludingNli::classify(std::string_view premise, std::string_view hypothesis) {
  const std::string p = normalize_text(premise);
  const std::string h = normalize_text(hypothesis);
  const auto matches = [](const std::string& chunk, const std::string& statement) {
    if (chunk.empty() || statement.empty()) return false;
    return statement.find(chunk) != std::string::npos || chunk.find(statement) != std::string::npos;
  };
  for (const auto& [a, b] : known_) {
    if ((matches(p, a) && matches(h, b)) || (matches(p, b) && matches(h, a))) {
      return {NliLabel::Contradiction, 0.95};
    }
  }
  return rules_.classify(premise, hypothesis);
}

std::vector<double> UniformLogprobs::token_logprobs(std::string_view text) {
  const std::size_t n = word_count(text);
  if (n == 0) throw PreconditionError("token_logprobs needs a non-empty text");
  return std::vector<double>(n, -std::log(vocab_));
}

std::string UniformLogprobs::id() const {
  std::ostringstream s;
  s << "mock-uniform-logprobs-v" << vocab_;
  return s.str();
}

std::vector<double> FunctionLogprobs::token_logprobs(std::string_view text) {
  if (trim(text).empty()) throw PreconditionError("token_logprobs needs a non-empty text");
  return fn_(text);
}

Providers make_mock_providers(double vocab) {
  Providers p;
  p.chat = std::make_shared<PipelineChat>();
  p.embedder = std::make_shared<HashingEmbedder>(1024);
  p.nli = std::make_shared<RuleNli>();
  p.logprobs = std::make_shared<UniformLogprobs>(vocab);
  return p;
}

}  // namespace contraforge::mock
