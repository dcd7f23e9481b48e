#pragma once

#include <filesystem>
#include <vector>

#include "contraforge/corpus.hpp"
#include "contraforge/injection.hpp"

namespace contraforge {

/// The shipped test corpus.
struct FixtureSet {
  OrganizationProfile profile;
  DomainTree domains;
  std::vector<FewShotExample> few_shot;
  std::vector<Document> documents;
  std::vector<ContradictionRecord> injected;
  std::vector<GoldItem> mini_gold;

  const Document* document(const std::string& id) const;
  /// Injected record of the given type (the first, when there are several).
  const ContradictionRecord* injected_of(ContradictionType t) const;
};

/// Directory the fixture files were installed to at build time.
std::filesystem::path default_fixtures_dir();

/// Parses profile.json, domains.json, few_shot.json, documents.jsonl,
/// injected.jsonl and mini_gold.jsonl from `dir` and validates them: every
/// record passes its invariant check, each injected record's statements
/// sit in its documents, gold keys match their chunks, and every
/// contradiction type has an injected record and a positive gold item.
/// Throws StoreError (corrupt file) or ValidationError (broken invariant).
FixtureSet load_fixtures(const std::filesystem::path& dir = default_fixtures_dir());

}  // namespace contraforge
