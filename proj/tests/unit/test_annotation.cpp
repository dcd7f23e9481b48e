#include <doctest.h>

#include <random>
#include <thread>

#include "contraforge/error.hpp"
#include "contraforge/annotation.hpp"
#include "contraforge/fixtures.hpp"
#include "contraforge/text.hpp"
#include "scenarios.hpp"
#include "test_support.hpp"

using namespace contraforge;
using testing::TempDir;
using testing::make_pair;
using testing::synthetic_detectors;

namespace {

std::vector<nlohmann::json> as_json(const std::vector<GoldItem>& items) {
  std::vector<nlohmann::json> out;
  for (const auto& g : items) out.push_back(record_to_json(Record(g)));
  return out;
}

GoldItem gold(const std::string& c1, const std::string& c2, Mode mode = Mode::Self) {
  GoldItem g;
  g.mode = mode;
  g.doc1 = g.doc2 = "doc-a";
  g.doc1_chunk = c1;
  g.doc2_chunk = c2;
  g.key = pair_key(c1, c2, mode);
  g.sources = {Source::Hybrid};
  return g;
}

Timestamp at_ms(long long ms) { return Timestamp{std::chrono::milliseconds(1704067200000LL + ms)}; }

}  // namespace

TEST_CASE("gold union: dedup, aliases, idempotence, each injected pair once") {
  const auto fx = load_fixtures();
  const auto detectors = synthetic_detectors(fx);
  const auto u = build_gold_union(detectors, fx.injected, fx.documents);

  std::set<std::string> keys;
  for (const auto& g : u) CHECK(keys.insert(g.key).second);
  CHECK(std::is_sorted(u.begin(), u.end(), [](auto& a, auto& b) { return a.key < b.key; }));

  for (const auto& r : fx.injected) {
    const auto key = pair_key(r.target_statement, r.contradiction_statement, r.mode);
    std::size_t hits = 0;
    for (const auto& g : u) {
      if (g.key == key) {
        ++hits;
        CHECK(g.sources.contains(Source::Injected));
        CHECK(g.sources.size() == 4);  // all three detectors merged in
        CHECK(g.ctype == r.ctype);
        CHECK_FALSE(g.aliases.empty());
      }
    }
    CHECK(hits == 1);
  }
  std::size_t injected_items = 0;
  for (const auto& g : u) injected_items += g.sources.contains(Source::Injected);
  CHECK(injected_items == fx.injected.size());

  // Extras: 12 docs each flagged by two detectors, plus the unresolved pair.
  CHECK(u.size() == fx.injected.size() + fx.documents.size() + 1);
  std::size_t unresolved = 0;
  for (const auto& g : u) {
    unresolved += g.unresolved;
    if (!g.sources.contains(Source::Injected) && !g.unresolved) CHECK(g.sources.size() == 2);
    CHECK(g.key == pair_key(g.doc1_chunk, g.doc2_chunk, g.mode));
    CHECK_FALSE(g.context1.empty());
  }
  CHECK(unresolved == 1);

  // Same inputs twice, or repeated, give the same union.
  CHECK(as_json(build_gold_union(detectors, fx.injected, fx.documents)) == as_json(u));
  auto doubled = detectors;
  doubled.insert(doubled.end(), detectors.begin(), detectors.end());
  auto injected_twice = fx.injected;
  injected_twice.insert(injected_twice.end(), fx.injected.begin(), fx.injected.end());
  CHECK(as_json(build_gold_union(doubled, injected_twice, fx.documents)) == as_json(u));
  auto reversed = detectors;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(as_json(build_gold_union(reversed, fx.injected, fx.documents)) == as_json(u));
}

TEST_CASE("matches_injected orientation rules") {
  ContradictionRecord r;
  r.mode = Mode::Pairwise;
  r.source_doc = "s";
  r.host_doc = "h";
  r.target_statement = "reports by March 30";
  r.contradiction_statement = "reports by April 15";
  auto p = make_pair(Mode::Pairwise, "s", "h", "All reports by March 30, 2024.", "Send reports by April 15.", {});
  CHECK(matches_injected(p, r));
  auto flipped = make_pair(Mode::Pairwise, "h", "s", "Send reports by April 15.", "All reports by March 30, 2024.", {});
  CHECK_FALSE(matches_injected(flipped, r));
  r.mode = Mode::Self;
  r.host_doc = r.source_doc = "s";
  auto self = make_pair(Mode::Self, "s", "s", "reports by April 15 now", "reports by March 30 then", {});
  CHECK(matches_injected(self, r));
}

TEST_CASE("chunk context spans two sentences each side") {
  const std::string body = "S1 a. S2 b. S3 c. S4 d. S5 e. S6 f.";
  CHECK(chunk_context(body, "S4 d.") == "S2 b. S3 c. S4 d. S5 e. S6 f.");
  CHECK(chunk_context(body, "S1 a.") == "S1 a. S2 b. S3 c.");
  CHECK(chunk_context(body, "missing") == "missing");
}

TEST_CASE("annotation service: queue, last write wins, consolidation") {
  TempDir dir;
  std::vector<GoldItem> items = {gold("a one", "a two"), gold("b one", "b two"),
                                 gold("c one", "c two")};
  ServiceConfig cfg;
  cfg.annotators = {"ann1", "ann2"};
  cfg.smes = {"sme"};
  long long tick = 0;
  AnnotationService svc(items, dir / "ann.jsonl", cfg, {}, [&] { return at_ms(tick++); });

  std::set<std::string> seen;
  while (auto next = svc.next_item("ann1")) {
    CHECK(seen.insert(next->key).second);
    svc.submit_label("ann1", next->key, 1);
  }
  CHECK(seen.size() == 3);
  CHECK_FALSE(svc.next_item("ann1"));
  CHECK(svc.next_item("ann2"));

  const auto k0 = svc.consolidated()[0].key;
  const auto k1 = svc.consolidated()[1].key;
  svc.submit_label("ann2", k0, 1);
  svc.submit_label("ann2", k1, 0);
  svc.submit_label("ann2", k1, 1);  // replaces the earlier 0
  CHECK(svc.item_labels(k1)->by_annotator.at("ann2") == 1);
  CHECK(svc.item(k1)->human_label == 1);

  const auto k2 = svc.consolidated()[2].key;
  svc.submit_label("ann2", k2, 0);
  CHECK_FALSE(svc.item(k2)->human_label);  // 1 vs 0 is below the 0.9 threshold
  const auto queue = svc.adjudication_queue();
  CHECK(std::any_of(queue.begin(), queue.end(), [&](auto& g) { return g.key == k2; }));

  CHECK_THROWS_AS(svc.adjudicate("ann1", k2, 1), PermissionDenied);
  svc.adjudicate("sme", k2, 0);
  CHECK(svc.item(k2)->human_label == 0);
  CHECK(svc.item(k2)->adjudicated);
  CHECK_THROWS_AS(svc.adjudicate("sme", k2, 1), PreconditionError);
  // Later annotator labels do not override the SME.
  svc.submit_label("ann1", k2, 1);
  svc.submit_label("ann2", k2, 1);
  CHECK(svc.item(k2)->human_label == 0);
  CHECK(svc.adjudication_queue().empty());

  CHECK_THROWS_AS(svc.submit_label("stranger", k0, 1), NotFound);
  CHECK_THROWS_AS(svc.submit_label("ann1", "nope", 1), NotFound);
  CHECK_THROWS_AS(svc.submit_label("ann1", k0, 3), PreconditionError);

  const auto m = svc.label_matrix();
  CHECK(m.size() == 2);
  CHECK(svc.iaa().n_items == 3);

  // A fresh service over the same log sees the same state.
  AnnotationService again(items, dir / "ann.jsonl", cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(record_to_json(Record(again.consolidated()[i])) ==
          record_to_json(Record(svc.consolidated()[i])));
  }
}

TEST_CASE("unresolved items wait for an SME even without labels") {
  TempDir dir;
  auto g = gold("x one", "x two");
  g.unresolved = true;
  AnnotationService svc({g}, dir / "a.jsonl", {{}, {"sme"}, 0.9});
  CHECK(svc.adjudication_queue().size() == 1);
  svc.adjudicate("sme", g.key, 1);
  CHECK(svc.adjudication_queue().empty());
}

TEST_CASE("open registration accepts any annotator id") {
  TempDir dir;
  auto g = gold("x one", "x two");
  AnnotationService svc({g}, dir / "a.jsonl");
  svc.submit_label("whoever", g.key, 1);
  CHECK(svc.item(g.key)->human_label == 1);
  CHECK_THROWS_AS(svc.submit_label("", g.key, 1), PreconditionError);
}

TEST_CASE("consolidation threshold is a majority share") {
  TempDir dir;
  auto g = gold("x one", "x two");
  ServiceConfig cfg;
  cfg.threshold = 0.6;
  AnnotationService svc({g}, dir / "a.jsonl", cfg);
  svc.submit_label("a", g.key, 1);
  svc.submit_label("b", g.key, 1);
  svc.submit_label("c", g.key, 0);
  CHECK(svc.item_labels(g.key)->agreement == doctest::Approx(2.0 / 3.0));
  CHECK(svc.item(g.key)->human_label == 1);
}

TEST_CASE("document reviews: 10 reviews with 4 detections give 0.40") {
  TempDir dir;
  std::set<std::string> docs;
  for (int i = 0; i < 10; ++i) docs.insert("doc-" + std::to_string(i));
  AnnotationService svc({}, dir / "r.jsonl", {}, docs);
  for (int i = 0; i < 10; ++i) {
    svc.record_doc_review("rev", "doc-" + std::to_string(i), LikertScores{4, 4, 5, 3}, i < 4);
  }
  const auto s = svc.review_summary();
  CHECK(s.n_reviews == 10);
  REQUIRE(s.detection_rate);
  CHECK(*s.detection_rate == doctest::Approx(0.40));
  CHECK(s.coherence == doctest::Approx(5.0));
  CHECK_THROWS_AS(svc.record_doc_review("rev", "doc-x", LikertScores{4, 4, 5, 3}, true), NotFound);
  CHECK_THROWS_AS(svc.record_doc_review("rev", "doc-1", LikertScores{9, 4, 5, 3}, true),
                  PreconditionError);
}

TEST_CASE("concurrent submissions are all kept") {
  TempDir dir;
  std::vector<GoldItem> items;
  for (int i = 0; i < 20; ++i) items.push_back(gold("p" + std::to_string(i), "q"));
  AnnotationService svc(items, dir / "c.jsonl");
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (const auto& g : items) svc.submit_label("a" + std::to_string(t), g.key, t % 2);
      });
    }
  }
  CHECK(svc.records().size() == 80);
  CHECK(load_records(dir / "c.jsonl").size() == 80);
}
