#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contraforge/annotation.hpp"
#include "contraforge/corpus.hpp"
#include "contraforge/generation.hpp"
#include "contraforge/http_providers.hpp"
#include "contraforge/injection.hpp"
#include "contraforge/mining.hpp"
#include "contraforge/prompts.hpp"

namespace contraforge {

struct EndpointConfig {
  std::string base_url;
  std::string model;
  std::size_t max_segment_bytes = 4000;  // logprob backends only
};

struct ProviderConfig {
  bool mock = false;
  double mock_vocab = 18.0;  // uniform mock LM perplexity
  int max_in_flight = 8;
  int retries = 5;
  int base_delay_ms = 500;
  std::optional<EndpointConfig> chat;
  std::optional<EndpointConfig> embeddings;
  std::optional<EndpointConfig> nli;
  std::optional<EndpointConfig> logprobs;
};

/// One slot of the corpus plan.
struct DocumentSlot {
  std::string domain;
  std::string subdomain;
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::size_t documents = 10;
  // Explicit plan; when empty, `documents` slots are dealt round-robin over
  // domains and their subdomains.
  std::vector<DocumentSlot> plan;
  OrganizationProfile profile;
  DomainTree domains;
  GenerationConfig generation;
  InjectionPolicy policy;
  DeltaGate gate;
  std::vector<FewShotExample> few_shot = default_few_shot();
  MiningConfig mining;
  ServiceConfig annotation;
  // Mock runs only: oracle annotators that label every gold item.
  std::vector<std::string> simulated_annotators;
  ProviderConfig providers;
  std::map<std::string, std::filesystem::path> prompt_overrides;
  std::vector<std::string> stages = {"generate", "inject", "mine", "unify",
                                     "annotate", "evaluate", "verifiability"};
  unsigned workers = 4;

  /// Effective corpus plan.
  std::vector<DocumentSlot> slots() const;
  PromptSet prompts() const;
};

/// Canonical stage order.
const std::vector<std::string>& all_stages();

/// Parses a config document; relative paths resolve against `base_dir`.
/// Unknown keys are rejected. Throws ConfigError.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// The effective configuration with every default filled in.
nlohmann::json config_snapshot(const PipelineConfig& cfg);

/// Mock or HTTP providers per the config. HTTP providers need every
/// endpoint configured; throws ConfigError otherwise.
Providers make_providers(const ProviderConfig& cfg);

std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path);

}  // namespace contraforge
