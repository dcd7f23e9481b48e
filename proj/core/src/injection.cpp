#include "contraforge/injection.hpp"

#include <sstream>

#include <spdlog/spdlog.h>

#include "contraforge/text.hpp"

namespace contraforge {

namespace {

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  const auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s = trim(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
      return true;
    }
    return false;
  };
  while (strip_pair("\"", "\"") || strip_pair("\xE2\x80\x9C", "\xE2\x80\x9D") ||
         strip_pair("**", "**")) {
  }
  return s;
}

double score_body(LogprobProvider& lm, const std::string& body) {
  Document tmp;
  tmp.body = body;
  return fluency_gate(lm, tmp).ppl;
}

}  // namespace

std::string_view to_string(InjectionRule r) {
  switch (r) {
    case InjectionRule::SelfEachDoc: return "SelfEachDoc";
    case InjectionRule::InterleavePairs: return "InterleavePairs";
    case InjectionRule::None: return "None";
  }
  return "None";
}

std::optional<InjectionRule> parse_injection_rule(std::string_view s) {
  std::string k;
  for (char c : s) {
    if (c != '_' && c != '-' && c != ' ') k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "selfeachdoc" || k == "self") return InjectionRule::SelfEachDoc;
  if (k == "interleavepairs" || k == "interleave" || k == "pairwise") {
    return InjectionRule::InterleavePairs;
  }
  if (k == "none") return InjectionRule::None;
  return std::nullopt;
}

InjectionPolicy InjectionPolicy::defaults() {
  InjectionPolicy p;
  p.rules = {
      {"Contract Law", InjectionRule::InterleavePairs},
      {"Internal Policy and Governance", InjectionRule::InterleavePairs},
      {"Compliance and Regulation", InjectionRule::InterleavePairs},
      {"Dispute Resolution and Litigation", InjectionRule::SelfEachDoc},
      {"Terms and Service Management", InjectionRule::SelfEachDoc},
  };
  return p;
}

InjectionRule InjectionPolicy::rule_for(const std::string& domain) const {
  auto it = rules.find(domain);
  if (it == rules.end()) throw ConfigError("no injection policy for domain '" + domain + "'");
  return it->second;
}

const std::vector<std::string>& hedge_blocklist() {
  static const std::vector<std::string> words = {
      "however", "while", "although", "but",     "may",      "might",
      "could",   "sometimes", "certain", "extended", "flexibility"};
  return words;
}

std::vector<std::string> hedge_words_in(std::string_view text) {
  std::vector<std::string> hits;
  for (const auto& w : hedge_blocklist()) {
    if (contains_word_ci(text, w)) hits.push_back(w);
  }
  return hits;
}

std::string select_target(ChatProvider& chat, const Document& doc, const PromptSet& prompts) {
  ChatRequest req;
  req.user = render_template(prompts.get("identify_statement"), {{"document_text", doc.body}});
  req.temperature = 0.0;
  req.max_tokens = 300;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string answer = strip_quotes(chat.complete(req));
    if (!answer.empty() && normalized_contains(doc.body, answer)) return normalize_text(answer);
    spdlog::info("selected target not found in {} (attempt {})", doc.id, attempt + 1);
    if (attempt == 0) {
      req.user += "\n\nYour previous answer was not a sentence copied from the document. Copy one "
                  "sentence from the document exactly.";
    }
  }
  throw TargetNotInDocument("selected statement does not occur in document " + doc.id);
}

GeneratedContradiction parse_contradiction_answer(std::string_view text) {
  GeneratedContradiction out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string statement;
  bool in_statement = false;
  std::vector<std::string> loose;
  while (std::getline(in, line)) {
    std::string clean;
    for (char c : line) {
      if (c != '*' && c != '#') clean.push_back(c);
    }
    clean = trim(clean);
    const std::string up = upper_ascii(clean);
    if (up.starts_with("TYPE:")) {
      const std::string value = trim(std::string_view(clean).substr(5));
      out.ctype = parse_contradiction_type(value);
      in_statement = false;
      continue;
    }
    if (up.starts_with("CONTRADICTION:")) {
      statement = trim(std::string_view(clean).substr(14));
      in_statement = true;
      continue;
    }
    if (in_statement) {
      if (!clean.empty()) statement += (statement.empty() ? "" : " ") + clean;
    } else if (!clean.empty()) {
      loose.push_back(clean);
    }
  }
  if (statement.empty()) {
    for (const auto& l : loose) statement += (statement.empty() ? "" : " ") + l;
  }
  out.statement = normalize_text(strip_quotes(statement));
  return out;
}

const std::vector<FewShotExample>& default_few_shot() {
  static const std::vector<FewShotExample> examples = {
      {ContradictionType::Temporal, "Starts Jan 15", "Starts end of Q1"},
      {ContradictionType::Numerical, "$12M surplus", "$5M deficit"},
      {ContradictionType::Authority, "Issued by Compliance Office", "Issued by Strategy Unit"},
      {ContradictionType::Process, "Submit via HR portal", "Submit through admins"},
      {ContradictionType::PolicyReversal, "Remote work mandatory", "Remote work not permitted"},
      {ContradictionType::Specificity, "Applies globally", "Applies only to APAC"},
  };
  return examples;
}

std::string render_few_shot(const std::vector<FewShotExample>& examples) {
  std::string out;
  for (const auto& e : examples) {
    std::string type(to_string(e.ctype));
    if (e.ctype == ContradictionType::PolicyReversal) type = "Policy Reversal";
    out += "Type: " + type + "\nTarget: \"" + e.target + "\"\nContradiction: \"" +
           e.contradiction + "\"\n\n";
  }
  return trim(out);
}

GeneratedContradiction generate_contradiction(ChatProvider& chat, const std::string& target,
                                              const Document& doc,
                                              const std::vector<FewShotExample>& few_shot,
                                              const PromptSet& prompts) {
  if (!normalized_contains(doc.body, target)) {
    throw PreconditionError("target statement is not part of document " + doc.id);
  }
  ChatRequest req;
  req.user = render_template(prompts.get("generate_contradiction"),
                             {{"few_shot_examples", render_few_shot(few_shot)},
                              {"target_statement", target},
                              {"document_text", doc.body}}) +
             prompts.get("contradiction_format");
  req.max_tokens = 300;

  std::string problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto g = parse_contradiction_answer(chat.complete(req));
    const auto hedges = hedge_words_in(g.statement);
    const auto sentences = segment_sentences(g.statement).size();
    if (g.statement.empty() || sentences < 1 || sentences > 2) {
      problem = "contradiction must be 1 or 2 sentences, got " + std::to_string(sentences);
    } else if (!hedges.empty()) {
      problem = "contradiction uses hedge word '" + hedges.front() + "'";
    } else if (normalize_text(g.statement) == normalize_text(target)) {
      problem = "contradiction repeats the target";
    } else {
      if (!g.ctype) spdlog::warn("contradiction for {} declared no known type", doc.id);
      return g;
    }
    spdlog::info("{} (attempt {})", problem, attempt + 1);
  }
  if (problem.find("hedge") != std::string::npos) throw HedgeWordViolation(problem);
  throw ValidationError(problem);
}

bool contradiction_present(std::string_view body, std::string_view contradiction, double ratio) {
  const std::string c = normalize_text(contradiction);
  if (c.empty()) return false;
  const std::string b = normalize_text(body);
  if (b.find(c) != std::string::npos) return true;
  return static_cast<double>(longest_common_substring(b, c)) >=
         ratio * static_cast<double>(c.size());
}

Document blend_self(ChatProvider& chat, const Document& doc, const std::string& target,
                    const std::string& contradiction, const PromptSet& prompts) {
  if (!normalized_contains(doc.body, target)) {
    throw PreconditionError("target statement is not part of document " + doc.id);
  }
  ChatRequest req;
  req.user = render_template(
      prompts.get("blend_contradiction"),
      {{"base_content", join_trailers(doc.body, doc.people_meta, doc.doc_meta)},
       {"target_statement", target},
       {"contradiction_paragraph", contradiction}});
  req.max_tokens = 2500;
  auto parts = split_trailers(chat.complete(req));
  if (!normalized_contains(parts.body, target)) {
    throw BlendLostTarget("blend of " + doc.id + " dropped the target statement");
  }
  if (!contradiction_present(parts.body, contradiction)) {
    throw BlendLostContradiction("blend of " + doc.id + " lost the contradiction");
  }
  Document out = doc;
  out.body = std::move(parts.body);
  if (parts.has_people) out.people_meta = std::move(parts.people_meta);
  if (parts.has_docs) out.doc_meta = std::move(parts.doc_meta);
  return out;
}

PairwiseResult embed_pairwise(ChatProvider& chat, LogprobProvider& lm,
                              const OrganizationProfile& profile, const Document& d1,
                              const std::string& target, const std::string& contradiction,
                              DocumentMetadata meta2, std::optional<double> baseline_ppl,
                              const GenerationConfig& gen, const PromptSet& prompts) {
  if (!normalized_contains(d1.body, target)) {
    throw PreconditionError("target statement is not part of document " + d1.id);
  }
  meta2.department = d1.metadata.department;
  PairwiseResult r;
  if (baseline_ppl) {
    r.ppl_draft = *baseline_ppl;
  } else {
    const Document draft =
        generate_base_document(chat, meta2, profile, d1.domain, d1.subdomain, gen, prompts);
    r.ppl_draft = fluency_gate(lm, draft, gen).ppl;
  }
  const std::string addendum =
      render_template(prompts.get("embed_pairwise"), {{"contradiction_statement", contradiction},
                                                      {"target_statement", target}});
  r.d2 = generate_base_document(chat, meta2, profile, d1.domain, d1.subdomain, gen, prompts,
                                addendum);
  if (normalized_contains(r.d2.body, target)) {
    throw TargetLeak("sibling document repeats the target statement of " + d1.id);
  }
  if (!contradiction_present(r.d2.body, contradiction)) {
    throw ContradictionAbsent("sibling document does not state the contradiction");
  }
  const double ppl = score_body(lm, r.d2.body);
  r.d2.ppl_base = r.ppl_draft;
  r.d2.ppl_final = ppl;

  r.record.mode = Mode::Pairwise;
  r.record.target_statement = target;
  r.record.contradiction_statement = contradiction;
  r.record.source_doc = d1.id;
  r.record.host_doc = r.d2.id;
  r.record.delta_rel = delta_rel(r.ppl_draft, ppl);
  r.record.id = contradiction_id(Mode::Pairwise, d1.id, r.d2.id, target, contradiction);
  return r;
}

double delta_rel(double ppl_base, double ppl_contr) {
  if (!(ppl_base > 0.0)) throw PreconditionError("baseline perplexity must be positive");
  return (ppl_contr - ppl_base) / ppl_base;
}

GateVerdict validate_injection(double ppl_base, double ppl_contr, Mode mode,
                               const DeltaGate& gate) {
  if (!(ppl_base > 0.0) || !(ppl_contr > 0.0)) {
    throw PreconditionError("perplexities must be positive");
  }
  GateVerdict v;
  const double d = delta_rel(ppl_base, ppl_contr);
  if (mode == Mode::Self && !(d <= gate.delta_self_max)) v.violations.emplace_back("delta_self");
  if (mode == Mode::Pairwise && !(d <= gate.delta_pair_max)) {
    v.violations.emplace_back("delta_pair");
  }
  if (!(ppl_contr <= gate.ppl_cap)) v.violations.emplace_back("ppl_cap");
  v.pass = v.violations.empty();
  return v;
}

std::vector<InjectionPlan> schedule_corpus(const std::vector<Document>& docs,
                                           const InjectionPolicy& policy) {
  std::vector<std::string> domain_order;
  std::map<std::string, std::vector<const Document*>> by_domain;
  for (const auto& d : docs) {
    auto [it, fresh] = by_domain.try_emplace(d.domain);
    if (fresh) domain_order.push_back(d.domain);
    it->second.push_back(&d);
  }
  std::vector<InjectionPlan> plans;
  for (const auto& domain : domain_order) {
    const auto& group = by_domain[domain];
    switch (policy.rule_for(domain)) {
      case InjectionRule::SelfEachDoc:
        for (const auto* d : group) plans.push_back({Mode::Self, d->id, d->id});
        break;
      case InjectionRule::InterleavePairs:
        for (std::size_t i = 0; i + 1 < group.size(); i += 2) {
          plans.push_back({Mode::Pairwise, group[i]->id, group[i + 1]->id});
        }
        break;
      case InjectionRule::None:
        break;
    }
  }
  return plans;
}

std::string contradiction_id(Mode mode, const std::string& source, const std::string& host,
                             const std::string& target, const std::string& contradiction) {
  const std::string material = std::string(to_string(mode)) + '\x1f' + source + '\x1f' + host +
                               '\x1f' + normalize_text(target) + '\x1f' +
                               normalize_text(contradiction);
  return "ctr-" + sha256_hex(material).substr(0, 16);
}

InjectionOutcome execute_plan(const Providers& providers, const OrganizationProfile& profile,
                              const InjectionPlan& plan, const Document& source,
                              const Document& host, const InjectionConfig& cfg,
                              const PromptSet& prompts) {
  auto& chat = *providers.chat;
  auto& lm = *providers.logprobs;
  const std::string target = select_target(chat, source, prompts);
  const auto generated = generate_contradiction(chat, target, source, cfg.few_shot, prompts);

  std::string last_problem;
  const int budget = std::max(1, cfg.gen.max_attempts);
  for (int attempt = 1; attempt <= budget; ++attempt) {
    try {
      InjectionOutcome out;
      out.attempts = attempt;
      double base = 0.0;
      double contr = 0.0;
      if (plan.mode == Mode::Self) {
        out.host = blend_self(chat, source, target, generated.statement, prompts);
        base = source.ppl_base > 0.0 ? source.ppl_base : fluency_gate(lm, source, cfg.gen).ppl;
        contr = score_body(lm, out.host.body);
        out.host.ppl_base = base;
        out.host.ppl_final = contr;
        out.record.mode = Mode::Self;
        out.record.source_doc = source.id;
        out.record.host_doc = source.id;
        out.record.target_statement = target;
        out.record.contradiction_statement = generated.statement;
        out.record.delta_rel = delta_rel(base, contr);
      } else {
        DocumentMetadata meta2 = host.metadata;
        std::optional<double> baseline;
        if (host.ppl_base > 0.0) baseline = host.ppl_base;
        auto pr = embed_pairwise(chat, lm, profile, source, target, generated.statement, meta2,
                                 baseline, cfg.gen, prompts);
        // The sibling replaces the host slot and keeps its id.
        pr.d2.id = host.id;
        pr.d2.domain = source.domain;
        pr.d2.subdomain = host.subdomain;
        out.host = std::move(pr.d2);
        out.record = std::move(pr.record);
        out.record.host_doc = host.id;
        base = out.host.ppl_base;
        contr = *out.host.ppl_final;
      }
      out.record.ctype = generated.ctype;
      out.record.id = contradiction_id(plan.mode, out.record.source_doc, out.record.host_doc,
                                       target, generated.statement);
      const auto verdict = validate_injection(base, contr, plan.mode, cfg.gate);
      if (verdict.pass) return out;
      last_problem = "gate failed (";
      for (std::size_t i = 0; i < verdict.violations.size(); ++i) {
        last_problem += (i ? ", " : "") + verdict.violations[i];
      }
      last_problem += ")";
    } catch (const BlendLostTarget& e) {
      last_problem = e.what();
    } catch (const BlendLostContradiction& e) {
      last_problem = e.what();
    } catch (const TargetLeak& e) {
      last_problem = e.what();
    } catch (const ContradictionAbsent& e) {
      last_problem = e.what();
    }
    spdlog::info("injection {} -> {} attempt {}: {}", plan.source, plan.host, attempt,
                 last_problem);
  }
  throw ValidationError("injection " + plan.source + " -> " + plan.host + " failed after " +
                        std::to_string(budget) + " attempts: " + last_problem);
}

}  // namespace contraforge
