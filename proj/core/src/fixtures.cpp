#include "contraforge/fixtures.hpp"

#include <fstream>
#include <map>
#include <set>

#include "contraforge/config.hpp"
#include "contraforge/record_log.hpp"
#include "contraforge/text.hpp"

#ifndef CONTRAFORGE_DEFAULT_FIXTURES_DIR
#define CONTRAFORGE_DEFAULT_FIXTURES_DIR "fixtures"
#endif

namespace contraforge {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StoreError("cannot open fixture " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw StoreError("corrupt fixture " + path.string());
  return j;
}

void require(const std::string& problem, const std::string& what) {
  if (!problem.empty()) throw ValidationError("fixture " + what + ": " + problem);
}

}  // namespace

const Document* FixtureSet::document(const std::string& id) const {
  for (const auto& d : documents) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const ContradictionRecord* FixtureSet::injected_of(ContradictionType t) const {
  for (const auto& r : injected) {
    if (r.ctype == t) return &r;
  }
  return nullptr;
}

std::filesystem::path default_fixtures_dir() {
  if (const char* env = std::getenv("CONTRAFORGE_FIXTURES")) return env;
  const std::filesystem::path built_from = CONTRAFORGE_DEFAULT_FIXTURES_DIR;
  if (std::filesystem::exists(built_from / "profile.json")) return built_from;
  return CONTRAFORGE_INSTALLED_FIXTURES_DIR;
}

FixtureSet load_fixtures(const std::filesystem::path& dir) {
  FixtureSet f;
  try {
    f.profile = read_json(dir / "profile.json").get<OrganizationProfile>();
    f.domains = read_json(dir / "domains.json").get<DomainTree>();
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(std::string("corrupt profile or domain fixture: ") + e.what());
  }
  try {
    f.few_shot = load_few_shot(dir / "few_shot.json");
  } catch (const ConfigError& e) {
    throw StoreError(e.what());
  }
  f.documents = load_values<Document>(dir / "documents.jsonl");
  f.injected = load_values<ContradictionRecord>(dir / "injected.jsonl");
  f.mini_gold = load_values<GoldItem>(dir / "mini_gold.jsonl");

  require(check(f.profile), "profile");
  require(check(f.domains), "domain tree");
  std::set<std::string> ids;
  for (const auto& d : f.documents) {
    require(check(d), d.id);
    if (!f.domains.contains(d.domain, d.subdomain)) {
      throw ValidationError("fixture " + d.id + " names an unknown domain/subdomain");
    }
    if (!ids.insert(d.id).second) throw ValidationError("duplicate fixture document " + d.id);
  }

  std::set<ContradictionType> injected_types;
  for (const auto& r : f.injected) {
    const Document* src = f.document(r.source_doc);
    const Document* host = f.document(r.host_doc);
    if (!src || !host) throw ValidationError("fixture " + r.id + " references a missing document");
    require(check(r, src), r.id);
    if (!normalized_contains(host->body, r.contradiction_statement)) {
      throw ValidationError("fixture " + r.id + ": contradiction missing from its host");
    }
    if (r.mode == Mode::Pairwise && normalized_contains(host->body, r.target_statement)) {
      throw ValidationError("fixture " + r.id + ": pairwise host still states the target");
    }
    if (r.ctype) injected_types.insert(*r.ctype);
  }

  std::set<ContradictionType> gold_types;
  std::set<std::string> keys;
  for (const auto& g : f.mini_gold) {
    if (g.key != pair_key(g.doc1_chunk, g.doc2_chunk, g.mode)) {
      throw ValidationError("fixture gold item " + g.key + " does not match its chunks");
    }
    if (!keys.insert(g.key).second) throw ValidationError("duplicate gold key " + g.key);
    if (!g.human_label) throw ValidationError("fixture gold item " + g.key + " is unlabeled");
    if (g.human_label == 1 && g.ctype) gold_types.insert(*g.ctype);
  }
  for (ContradictionType t : kAllContradictionTypes) {
    if (!injected_types.contains(t)) {
      throw ValidationError("no injected fixture of type " + std::string(to_string(t)));
    }
    if (!gold_types.contains(t)) {
      throw ValidationError("no positive gold fixture of type " + std::string(to_string(t)));
    }
  }
  return f;
}

}  // namespace contraforge
