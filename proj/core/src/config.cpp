#include "contraforge/config.hpp"

#include <fstream>
#include <set>

#include "contraforge/fixtures.hpp"
#include "contraforge/mock_providers.hpp"
#include "contraforge/record_log.hpp"

namespace contraforge {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw ConfigError("unknown config key '" + where + "." + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("not valid JSON: " + path.string());
  return j;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Date read_date(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError("'" + where + "' must be an ISO date string");
  auto d = parse_date(v.get<std::string>());
  if (!d) throw ConfigError("'" + where + "' is not an ISO date");
  return *d;
}

EndpointConfig read_endpoint(const json& j, const std::string& where) {
  only_keys(j, where, {"base_url", "model", "max_segment_bytes"});
  EndpointConfig e;
  read(j, "base_url", e.base_url, where);
  read(j, "model", e.model, where);
  read(j, "max_segment_bytes", e.max_segment_bytes, where);
  if (e.base_url.empty() || e.model.empty()) {
    throw ConfigError("'" + where + "' needs base_url and model");
  }
  return e;
}

json endpoint_json(const std::optional<EndpointConfig>& e) {
  if (!e) return nullptr;
  return {{"base_url", e->base_url}, {"model", e->model}, {"max_segment_bytes", e->max_segment_bytes}};
}

}  // namespace

const std::vector<std::string>& all_stages() {
  static const std::vector<std::string> stages = {"generate", "inject",   "mine",         "unify",
                                                  "annotate", "evaluate", "verifiability"};
  return stages;
}

std::vector<DocumentSlot> PipelineConfig::slots() const {
  if (!plan.empty()) return plan;
  std::vector<DocumentSlot> out;
  if (domains.domains.empty()) return out;
  const std::size_t n_domains = domains.domains.size();
  for (std::size_t i = 0; i < documents; ++i) {
    const auto& d = domains.domains[i % n_domains];
    const std::size_t round = i / n_domains;
    out.push_back({d.name, d.subdomains.empty() ? d.name : d.subdomains[round % d.subdomains.size()]});
  }
  return out;
}

PromptSet PipelineConfig::prompts() const {
  PromptSet p;
  for (const auto& [name, path] : prompt_overrides) p.load_override(name, path);
  return p;
}

namespace {

std::vector<FewShotExample> parse_few_shot(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("few-shot examples must be a list: " + where);
  std::vector<FewShotExample> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("type") || !e.contains("target") ||
        !e.contains("contradiction")) {
      throw ConfigError("few-shot entries need type, target and contradiction");
    }
    auto t = parse_contradiction_type(e["type"].get<std::string>());
    if (!t) throw ConfigError("unknown contradiction type in few-shot file");
    out.push_back({*t, e["target"].get<std::string>(), e["contradiction"].get<std::string>()});
  }
  return out;
}

}  // namespace

std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path) {
  return parse_few_shot(read_json_file(path), path.string());
}

PipelineConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  only_keys(j, "config",
            {"seed", "documents", "plan", "profile", "profile_path", "domains", "domains_path",
             "generation", "injection", "mining", "annotation", "simulated_annotators",
             "providers", "prompts", "stages", "workers"});
  PipelineConfig c;
  read(j, "seed", c.seed, "config");
  read(j, "documents", c.documents, "config");
  read(j, "workers", c.workers, "config");
  if (c.workers == 0) throw ConfigError("workers must be >= 1");

  const auto fixture_dir = default_fixtures_dir();
  try {
    if (j.contains("profile")) {
      c.profile = j["profile"].get<OrganizationProfile>();
    } else {
      std::filesystem::path p = j.contains("profile_path")
                                    ? resolve(base_dir, j["profile_path"].get<std::string>())
                                    : fixture_dir / "profile.json";
      c.profile = read_json_file(p).get<OrganizationProfile>();
    }
    if (j.contains("domains")) {
      c.domains = j["domains"].get<DomainTree>();
    } else {
      std::filesystem::path p = j.contains("domains_path")
                                    ? resolve(base_dir, j["domains_path"].get<std::string>())
                                    : fixture_dir / "domains.json";
      c.domains = read_json_file(p).get<DomainTree>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad profile or domain tree: ") + e.what());
  }
  if (auto p = check(c.profile); !p.empty()) throw ConfigError("profile: " + p);
  if (auto p = check(c.domains); !p.empty()) throw ConfigError("domains: " + p);

  if (j.contains("plan")) {
    if (!j["plan"].is_array()) throw ConfigError("'plan' must be a list");
    for (const auto& s : j["plan"]) {
      only_keys(s, "plan[]", {"domain", "subdomain"});
      DocumentSlot slot;
      read(s, "domain", slot.domain, "plan[]");
      read(s, "subdomain", slot.subdomain, "plan[]");
      if (!c.domains.contains(slot.domain, slot.subdomain)) {
        throw ConfigError("plan names unknown domain/subdomain " + slot.domain + "/" + slot.subdomain);
      }
      c.plan.push_back(std::move(slot));
    }
  }

  if (j.contains("generation")) {
    const auto& g = j["generation"];
    only_keys(g, "generation", {"ppl_cap", "max_attempts", "date_window", "paragraph_min"});
    read(g, "ppl_cap", c.generation.ppl_cap, "generation");
    read(g, "max_attempts", c.generation.max_attempts, "generation");
    read(g, "paragraph_min", c.generation.paragraph_min, "generation");
    if (g.contains("date_window")) {
      const auto& w = g["date_window"];
      if (!w.is_array() || w.size() != 2) throw ConfigError("date_window must be [start, end]");
      c.generation.window_start = read_date(w[0], "generation.date_window[0]");
      c.generation.window_end = read_date(w[1], "generation.date_window[1]");
      if (std::chrono::sys_days{c.generation.window_end} <
          std::chrono::sys_days{c.generation.window_start}) {
        throw ConfigError("date_window end precedes start");
      }
    }
    if (c.generation.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  }
  c.gate.ppl_cap = c.generation.ppl_cap;

  c.policy = InjectionPolicy::defaults();
  if (j.contains("injection")) {
    const auto& in = j["injection"];
    only_keys(in, "injection",
              {"delta_self_max", "delta_pair_max", "policy", "few_shot", "few_shot_path"});
    if (in.contains("few_shot") && in.contains("few_shot_path")) {
      throw ConfigError("injection takes few_shot or few_shot_path, not both");
    }
    read(in, "delta_self_max", c.gate.delta_self_max, "injection");
    read(in, "delta_pair_max", c.gate.delta_pair_max, "injection");
    if (in.contains("policy")) {
      if (!in["policy"].is_object()) throw ConfigError("injection.policy must map domain -> rule");
      for (const auto& [domain, rule] : in["policy"].items()) {
        auto r = rule.is_string() ? parse_injection_rule(rule.get<std::string>()) : std::nullopt;
        if (!r) throw ConfigError("unknown injection rule for '" + domain + "'");
        c.policy.rules[domain] = *r;
      }
    }
    if (in.contains("few_shot")) c.few_shot = parse_few_shot(in["few_shot"], "injection.few_shot");
    if (in.contains("few_shot_path")) {
      c.few_shot = load_few_shot(resolve(base_dir, in["few_shot_path"].get<std::string>()));
    }
  }
  if (!(c.gate.delta_self_max > 0.0 && c.gate.delta_self_max <= c.gate.delta_pair_max)) {
    throw ConfigError("need 0 < delta_self_max <= delta_pair_max");
  }
  for (const auto& d : c.domains.domains) c.policy.rule_for(d.name);

  if (j.contains("mining")) {
    const auto& m = j["mining"];
    only_keys(m, "mining",
              {"k", "theta_s", "theta_conf", "tau", "min_words", "pairing_policy", "workers"});
    read(m, "k", c.mining.k, "mining");
    read(m, "theta_s", c.mining.theta_s, "mining");
    read(m, "theta_conf", c.mining.theta_conf, "mining");
    read(m, "tau", c.mining.tau, "mining");
    read(m, "min_words", c.mining.min_words, "mining");
    read(m, "workers", c.mining.workers, "mining");
    if (m.contains("pairing_policy")) {
      auto p = parse_pairing_policy(m["pairing_policy"].get<std::string>());
      if (!p) throw ConfigError("pairing_policy must be same_domain or all_pairs");
      c.mining.pairing = *p;
    }
  }
  validate(c.mining);

  if (j.contains("annotation")) {
    const auto& a = j["annotation"];
    only_keys(a, "annotation", {"annotators", "smes", "threshold"});
    read(a, "annotators", c.annotation.annotators, "annotation");
    read(a, "smes", c.annotation.smes, "annotation");
    read(a, "threshold", c.annotation.threshold, "annotation");
    if (!(c.annotation.threshold >= 0.0 && c.annotation.threshold <= 1.0)) {
      throw ConfigError("annotation.threshold must lie in [0,1]");
    }
  }
  read(j, "simulated_annotators", c.simulated_annotators, "config");

  if (j.contains("providers")) {
    const auto& p = j["providers"];
    only_keys(p, "providers", {"mock", "mock_vocab", "max_in_flight", "retries", "base_delay_ms",
                               "chat", "embeddings", "nli", "logprobs"});
    read(p, "mock", c.providers.mock, "providers");
    read(p, "mock_vocab", c.providers.mock_vocab, "providers");
    read(p, "max_in_flight", c.providers.max_in_flight, "providers");
    read(p, "retries", c.providers.retries, "providers");
    read(p, "base_delay_ms", c.providers.base_delay_ms, "providers");
    // null marks an endpoint as unset, as in the config snapshot.
    const auto endpoint = [&](const char* name, std::optional<EndpointConfig>& out) {
      if (p.contains(name) && !p[name].is_null()) {
        out = read_endpoint(p[name], std::string("providers.") + name);
      }
    };
    endpoint("chat", c.providers.chat);
    endpoint("embeddings", c.providers.embeddings);
    endpoint("nli", c.providers.nli);
    endpoint("logprobs", c.providers.logprobs);
    if (c.providers.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  }

  if (j.contains("prompts")) {
    if (!j["prompts"].is_object()) throw ConfigError("'prompts' must map name -> file");
    const auto known = PromptSet::builtin().names();
    for (const auto& [name, path] : j["prompts"].items()) {
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("unknown prompt '" + name + "'");
      }
      c.prompt_overrides[name] = resolve(base_dir, path.get<std::string>());
    }
  }

  if (j.contains("stages")) {
    c.stages.clear();
    read(j, "stages", c.stages, "config");
    for (const auto& s : c.stages) {
      if (std::find(all_stages().begin(), all_stages().end(), s) == all_stages().end()) {
        throw ConfigError("unknown stage '" + s + "'");
      }
    }
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json_file(path), path.parent_path());
}

json config_snapshot(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["documents"] = c.slots().size();
  json plan = json::array();
  for (const auto& s : c.slots()) plan.push_back({{"domain", s.domain}, {"subdomain", s.subdomain}});
  j["plan"] = plan;
  j["profile"] = c.profile;
  j["domains"] = c.domains;
  j["generation"] = {{"ppl_cap", c.generation.ppl_cap},
                     {"max_attempts", c.generation.max_attempts},
                     {"paragraph_min", c.generation.paragraph_min},
                     {"date_window",
                      {format_date(c.generation.window_start), format_date(c.generation.window_end)}}};
  json policy = json::object();
  for (const auto& [d, r] : c.policy.rules) policy[d] = std::string(to_string(r));
  json few = json::array();
  for (const auto& e : c.few_shot) {
    few.push_back({{"type", std::string(to_string(e.ctype))},
                   {"target", e.target},
                   {"contradiction", e.contradiction}});
  }
  j["injection"] = {{"delta_self_max", c.gate.delta_self_max},
                    {"delta_pair_max", c.gate.delta_pair_max},
                    {"policy", policy},
                    {"few_shot", few}};
  j["mining"] = {{"k", c.mining.k},
                 {"theta_s", c.mining.theta_s},
                 {"theta_conf", c.mining.theta_conf},
                 {"tau", c.mining.tau},
                 {"min_words", c.mining.min_words},
                 {"pairing_policy", std::string(to_string(c.mining.pairing))},
                 {"workers", c.mining.workers}};
  j["annotation"] = {{"annotators", c.annotation.annotators},
                     {"smes", c.annotation.smes},
                     {"threshold", c.annotation.threshold}};
  j["simulated_annotators"] = c.simulated_annotators;
  j["providers"] = {{"mock", c.providers.mock},
                    {"mock_vocab", c.providers.mock_vocab},
                    {"max_in_flight", c.providers.max_in_flight},
                    {"retries", c.providers.retries},
                    {"base_delay_ms", c.providers.base_delay_ms},
                    {"chat", endpoint_json(c.providers.chat)},
                    {"embeddings", endpoint_json(c.providers.embeddings)},
                    {"nli", endpoint_json(c.providers.nli)},
                    {"logprobs", endpoint_json(c.providers.logprobs)}};
  json prompts = json::object();
  for (const auto& [name, path] : c.prompt_overrides) prompts[name] = path.string();
  j["prompts"] = prompts;
  j["stages"] = c.stages;
  j["workers"] = c.workers;
  return j;
}

Providers make_providers(const ProviderConfig& cfg) {
  RequestLimiter::configure_global(cfg.max_in_flight);
  if (cfg.mock) return mock::make_mock_providers(cfg.mock_vocab);
  if (!cfg.chat || !cfg.embeddings || !cfg.nli || !cfg.logprobs) {
    throw ConfigError("providers.chat, embeddings, nli and logprobs must be configured "
                      "(or use --mock-providers)");
  }
  const auto endpoint = [&](const EndpointConfig& e) {
    HttpEndpoint h;
    h.base_url = e.base_url;
    h.model = e.model;
    h.retry.max_retries = cfg.retries;
    h.retry.base_delay = std::chrono::milliseconds(cfg.base_delay_ms);
    return h;
  };
  Providers p;
  p.chat = std::make_shared<OpenAiChat>(endpoint(*cfg.chat));
  p.embedder = std::make_shared<OpenAiEmbedder>(endpoint(*cfg.embeddings));
  p.nli = std::make_shared<HttpNli>(endpoint(*cfg.nli));
  p.logprobs =
      std::make_shared<CompletionLogprobs>(endpoint(*cfg.logprobs), cfg.logprobs->max_segment_bytes);
  return p;
}

}  // namespace contraforge
