#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contraforge/config.hpp"
#include "contraforge/providers.hpp"
#include "contraforge/record_log.hpp"

namespace contraforge {

/// Files a run keeps under its store directory.
struct StoreLayout {
  std::filesystem::path root;

  std::filesystem::path documents() const { return root / "documents.jsonl"; }
  std::filesystem::path injections() const { return root / "injections.jsonl"; }
  std::filesystem::path corpus() const { return root / "corpus.jsonl"; }
  std::filesystem::path mining(Mode m) const {
    return root / (m == Mode::Self ? "mining_self.jsonl" : "mining_pairwise.jsonl");
  }
  std::filesystem::path gold() const { return root / "gold.jsonl"; }
  std::filesystem::path annotations() const { return root / "annotations.jsonl"; }
  std::filesystem::path evaluation() const { return root / "evaluation.json"; }
  std::filesystem::path evaluation_table() const { return root / "evaluation.txt"; }
  std::filesystem::path verifiability() const { return root / "verifiability.jsonl"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path timings() const { return root / "timings.json"; }
};

struct RunOptions {
  std::filesystem::path store;
  // Overrides cfg.stages when set; run in canonical order regardless.
  std::optional<std::vector<std::string>> stages;
  // Replaces the providers built from the config (tests).
  std::optional<Providers> providers;
  // Test hook: called after each generated document is persisted; throwing
  // from it simulates an interrupted run.
  std::function<void(std::size_t slot)> after_document;
};

/// Deterministic part of a run plus stage timings kept apart so the
/// manifest file stays byte-identical across identical runs.
struct RunManifest {
  nlohmann::json manifest;
  std::map<std::string, double> seconds;  // wall-clock per stage
};

/// Seed of corpus slot `slot` derived from the run seed.
std::uint64_t slot_seed(std::uint64_t seed, std::size_t slot);

/// Runs the requested stages in canonical order over the store directory,
/// persisting after each stage. Every stage reads its inputs from the
/// store, so any suffix of stages can be rerun or resumed. Writes
/// manifest.json (deterministic) and timings.json last.
RunManifest run_pipeline(const PipelineConfig& cfg, const RunOptions& opts);

/// Gold items with labels consolidated from the store's annotation log.
std::vector<GoldItem> labeled_gold(const PipelineConfig& cfg, const StoreLayout& store);

/// Loads every value of type T from a store file, empty when the file does
/// not exist.
template <typename T>
std::vector<T> load_if_exists(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return load_values<T>(path);
}

}  // namespace contraforge
