#include <doctest.h>

#include <fstream>

#include "contraforge/error.hpp"
#include "contraforge/fixtures.hpp"
#include "contraforge/record_log.hpp"
#include "test_support.hpp"

using namespace contraforge;
using testing::TempDir;

TEST_CASE("the shipped fixtures load and validate") {
  const auto fx = load_fixtures(testing::fixtures_dir());
  CHECK(fx.documents.size() == 12);
  CHECK(fx.injected.size() == 6);
  CHECK(fx.mini_gold.size() == 40);
  CHECK(check(fx.profile).empty());
  CHECK(check(fx.domains).empty());
  for (const auto& d : fx.documents) CHECK(check(d).empty());
  for (auto t : kAllContradictionTypes) CHECK(fx.injected_of(t) != nullptr);
  std::size_t positives = 0;
  for (const auto& g : fx.mini_gold) {
    REQUIRE(g.human_label);
    positives += *g.human_label;
    CHECK(g.key == pair_key(g.doc1_chunk, g.doc2_chunk, g.mode));
  }
  CHECK(positives > 0);
  CHECK(positives < fx.mini_gold.size());
}

TEST_CASE("the worked temporal and policy-reversal examples") {
  const auto fx = load_fixtures(testing::fixtures_dir());
  const auto* t = fx.injected_of(ContradictionType::Temporal);
  REQUIRE(t);
  CHECK(t->mode == Mode::Self);
  CHECK(t->target_statement == "Starts Jan 15");
  CHECK(t->contradiction_statement == "Starts end of Q1");
  const auto* doc = fx.document(t->host_doc);
  REQUIRE(doc);
  CHECK(doc->body.find("Jan 15") != std::string::npos);

  const auto* p = fx.injected_of(ContradictionType::PolicyReversal);
  REQUIRE(p);
  CHECK(p->mode == Mode::Pairwise);
  CHECK(p->target_statement == "Remote work mandatory");
  CHECK(p->contradiction_statement == "Remote work not permitted");
  CHECK(p->source_doc != p->host_doc);
}

TEST_CASE("fixtures survive a store round trip") {
  const auto fx = load_fixtures(testing::fixtures_dir());
  TempDir dir("fixtures");
  write_values_atomic(dir / "g.jsonl", fx.mini_gold);
  const auto back = load_values<GoldItem>(dir / "g.jsonl");
  REQUIRE(back.size() == fx.mini_gold.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].key == fx.mini_gold[i].key);
    CHECK(back[i].human_label == fx.mini_gold[i].human_label);
    CHECK(back[i].sources == fx.mini_gold[i].sources);
  }
  write_values_atomic(dir / "d.jsonl", fx.documents);
  const auto docs = load_values<Document>(dir / "d.jsonl");
  REQUIRE(docs.size() == 12);
  CHECK(docs[3].body == fx.documents[3].body);
}

TEST_CASE("a corrupted fixture directory is rejected") {
  TempDir dir("badfix");
  for (const auto& e : std::filesystem::directory_iterator(testing::fixtures_dir())) {
    if (e.is_regular_file()) std::filesystem::copy_file(e.path(), dir / e.path().filename());
  }
  {
    std::ofstream out(dir / "mini_gold.jsonl", std::ios::app);
    out << "{not json\n";
  }
  CHECK_THROWS_AS(load_fixtures(dir.path()), StoreError);
}
