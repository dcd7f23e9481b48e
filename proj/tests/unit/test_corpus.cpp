#include <doctest.h>

#include <thread>

#include "contraforge/error.hpp"
#include "contraforge/record_log.hpp"
#include "contraforge/text.hpp"
#include "test_support.hpp"

using namespace contraforge;
using testing::TempDir;

namespace {

Document sample_document() {
  Document d;
  d.metadata = {"NDA Policy", "Confidentiality", Date{std::chrono::year{2024} / 3 / 4},
                "Legal, Aerodyne Systems", "Seattle", "Policy", "Executive"};
  d.domain = "Contract Law";
  d.subdomain = "Non-Disclosure Agreements";
  d.body = "The Vendor shall return drawings within 10 days.\n\nNotices go to Legal.";
  d.id = "doc-1";
  d.ppl_base = 14.5;
  d.ppl_final = 14.9;
  d.people_meta = {"Ada Park, Counsel"};
  return d;
}

}  // namespace

TEST_CASE("enum spellings round-trip") {
  for (auto t : kAllContradictionTypes) CHECK(parse_contradiction_type(to_string(t)) == t);
  CHECK(parse_contradiction_type("Policy Reversal") == ContradictionType::PolicyReversal);
  CHECK(parse_contradiction_type("policy_reversal") == ContradictionType::PolicyReversal);
  CHECK_FALSE(parse_contradiction_type("Unspecified"));
  for (auto m : {Mode::Self, Mode::Pairwise}) CHECK(parse_mode(to_string(m)) == m);
  for (auto l : {NliLabel::Contradiction, NliLabel::Neutral, NliLabel::Entailment}) {
    CHECK(parse_nli_label(to_string(l)) == l);
  }
  CHECK(parse_mode("SELF") == Mode::Self);
}

TEST_CASE("dates and timestamps") {
  CHECK(format_date(Date{std::chrono::year{2024} / 2 / 9}) == "2024-02-09");
  CHECK(parse_date("2024-02-30") == std::nullopt);
  CHECK(parse_date("2024-13-01") == std::nullopt);
  const auto t = parse_timestamp("2024-01-01T00:00:01.250Z");
  REQUIRE(t);
  CHECK(format_timestamp(*t) == "2024-01-01T00:00:01.250Z");
}

TEST_CASE("pair_key: self pairs are unordered, pairwise pairs ordered") {
  CHECK(pair_key("a b", "c", Mode::Self) == pair_key("c", " a  b", Mode::Self));
  CHECK(pair_key("a", "c", Mode::Pairwise) != pair_key("c", "a", Mode::Pairwise));
  CHECK(pair_key("a", "c", Mode::Self) == sha256_hex(std::string("a\x1f") + "c"));
  CHECK(pair_key("- a", "c", Mode::Pairwise) == pair_key("a", "c", Mode::Pairwise));
}

TEST_CASE("record log round-trips every record type in order") {
  TempDir dir;
  const auto path = dir / "store.jsonl";
  std::vector<Record> written;
  written.emplace_back(sample_document());
  ContradictionRecord r;
  r.id = "ctr-1";
  r.mode = Mode::Pairwise;
  r.ctype = ContradictionType::Temporal;
  r.target_statement = "Starts Jan 15";
  r.contradiction_statement = "Starts end of Q1";
  r.source_doc = "doc-1";
  r.host_doc = "doc-2";
  r.delta_rel = 0.031;
  written.emplace_back(r);
  ContradictionRecord untyped = r;
  untyped.ctype.reset();
  written.emplace_back(untyped);
  CandidatePair p;
  p.mode = Mode::Self;
  p.doc1 = p.doc2 = "doc-1";
  p.doc1_chunk = "x one";
  p.doc2_chunk = "y two";
  p.key = pair_key(p.doc1_chunk, p.doc2_chunk, p.mode);
  p.similarity = 0.8;
  p.nli_label = NliLabel::Neutral;
  p.p_nli = 0.6;
  p.forwarded = true;
  p.llm_label = 1;
  p.p_llm = 0.9;
  p.s_hybrid = 0.6;
  p.hybrid_label = 1;
  p.source = {Source::Llm, Source::Hybrid};
  written.emplace_back(p);
  AnnotationRecord a;
  a.annotator = "ann";
  a.subject = "doc-1";
  a.kind = AnnotationKind::DocReview;
  a.likert = LikertScores{4, 5, 5, 3};
  a.detected_contradiction = false;
  a.timestamp = *parse_timestamp("2024-05-01T10:00:00.000Z");
  written.emplace_back(a);
  GoldItem g;
  g.key = p.key;
  g.doc1_chunk = p.doc1_chunk;
  g.doc2_chunk = p.doc2_chunk;
  g.sources = {Source::Injected, Source::Nli};
  g.human_label = 1;
  g.aliases = {"abc"};
  written.emplace_back(g);

  {
    RecordLog log(path);
    for (const auto& rec : written) log.append(rec);
    CHECK(log.size() == written.size());
  }
  const auto loaded = load_records(path);
  REQUIRE(loaded.size() == written.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(record_to_json(loaded[i]) == record_to_json(written[i]));
  }
  CHECK_FALSE(std::get<ContradictionRecord>(loaded[2].value).ctype.has_value());
  CHECK(record_to_json(loaded[2])["ctype"] == "Unspecified");
}

TEST_CASE("unknown fields survive a load/write cycle") {
  TempDir dir;
  const auto path = dir / "x.jsonl";
  auto j = record_to_json(Record(sample_document()));
  j["future_field"] = {{"nested", 1}};
  {
    std::ofstream out(path);
    out << j.dump() << "\n";
  }
  const auto recs = load_records(path);
  REQUIRE(recs.size() == 1);
  CHECK(record_to_json(recs[0])["future_field"]["nested"] == 1);
  write_records_atomic(dir / "y.jsonl", recs);
  CHECK(testing::read_file(dir / "y.jsonl") == j.dump() + "\n");
}

TEST_CASE("malformed lines report their line number") {
  TempDir dir;
  const auto path = dir / "bad.jsonl";
  {
    std::ofstream out(path);
    out << record_to_json(Record(sample_document())).dump() << "\n";
    out << "{not json\n";
  }
  try {
    load_records(path);
    FAIL("expected StoreError");
  } catch (const StoreError& e) {
    CHECK(e.line() == 2);
  }
  {
    std::ofstream out(path);
    out << R"({"kind":"mystery"})" << "\n";
  }
  CHECK_THROWS_AS(load_records(path), StoreError);
  CHECK_THROWS_AS(load_records(dir / "missing.jsonl"), StoreError);
}

TEST_CASE("concurrent appends are serialized") {
  TempDir dir;
  const auto path = dir / "c.jsonl";
  RecordLog log(path);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        AnnotationRecord a;
        a.annotator = "a" + std::to_string(t);
        a.subject = std::to_string(i);
        a.label = i % 2;
        log.append(a);
      }
    });
  }
  threads.clear();
  CHECK(load_records(path).size() == 400);
}

TEST_CASE("invariant checks") {
  auto d = sample_document();
  CHECK(check(d).empty());
  d.ppl_base = 0.5;
  CHECK_FALSE(check(d).empty());

  ContradictionRecord r;
  r.mode = Mode::Self;
  r.source_doc = "doc-1";
  r.host_doc = "doc-2";
  r.target_statement = "x";
  r.contradiction_statement = "y";
  CHECK_FALSE(check(r).empty());
  r.host_doc = "doc-1";
  CHECK(check(r).empty());
  const auto src = sample_document();
  r.target_statement = "return drawings within 10 days";
  CHECK(check(r, &src).empty());
  r.target_statement = "not there";
  CHECK_FALSE(check(r, &src).empty());

  CandidatePair p;
  p.doc1_chunk = "a";
  p.doc2_chunk = "b";
  p.key = "wrong";
  CHECK_FALSE(check(p).empty());
  p.key = pair_key("a", "b", Mode::Self);
  CHECK(check(p).empty());
  p.forwarded = true;
  p.hybrid_label = 1;
  CHECK_FALSE(check(p).empty());

  AnnotationRecord a;
  a.annotator = "x";
  a.kind = AnnotationKind::PairLabel;
  CHECK_FALSE(check(a).empty());
  a.label = 2;
  CHECK_FALSE(check(a).empty());
  a.label = 1;
  CHECK(check(a).empty());
  a.kind = AnnotationKind::DocReview;
  a.likert = LikertScores{0, 3, 3, 3};
  CHECK_FALSE(check(a).empty());
}
