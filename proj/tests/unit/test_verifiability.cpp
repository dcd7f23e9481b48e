#include <doctest.h>

#include "contraforge/error.hpp"
#include "contraforge/mock_providers.hpp"
#include "contraforge/verifiability.hpp"

using namespace contraforge;

namespace {

GoldItem confirmed(const std::string& c1, const std::string& c2) {
  GoldItem g;
  g.doc1_chunk = c1;
  g.doc2_chunk = c2;
  g.key = pair_key(c1, c2, Mode::Self);
  g.human_label = 1;
  return g;
}

}  // namespace

TEST_CASE("category spellings") {
  CHECK(parse_verifiability("Retrieval-Verifiable") == Verifiability::RetrievalVerifiable);
  CHECK(parse_verifiability("retrieval resistant") == Verifiability::RetrievalResistant);
  CHECK_FALSE(parse_verifiability("unsure"));
  for (auto v : {Verifiability::RetrievalVerifiable, Verifiability::RetrievalResistant}) {
    CHECK(parse_verifiability(to_string(v)) == v);
  }
}

TEST_CASE("response parsing") {
  auto v = parse_verifiability_response(
      R"(Answer: {"category": "retrieval-verifiable", "justification": "dates can be checked", "confidence": 0.8})");
  REQUIRE(v);
  CHECK(v->category == Verifiability::RetrievalVerifiable);
  CHECK(v->confidence == doctest::Approx(0.8));
  v = parse_verifiability_response(R"({"category": "resistant", "justification": "tone"})");
  REQUIRE(v);
  CHECK(v->confidence == 0.5);
  CHECK_FALSE(parse_verifiability_response(R"({"category": "resistant", "justification": ""})"));
  CHECK_FALSE(parse_verifiability_response(R"({"category": "x", "justification": "y"})"));
  CHECK_FALSE(parse_verifiability_response(R"({"category": "resistant", "justification": "y", "confidence": 2})"));
}

TEST_CASE("classification reprompts once and only runs on confirmed pairs") {
  mock::ScriptedChat chat({"??", R"({"category": "resistant", "justification": "tone differs"})"});
  const auto v = classify_verifiability(chat, confirmed("a", "b"));
  CHECK(v.category == Verifiability::RetrievalResistant);
  CHECK(chat.calls() == 2);

  auto negative = confirmed("a", "b");
  negative.human_label = 0;
  CHECK_THROWS_AS(classify_verifiability(chat, negative), PreconditionError);
  mock::ScriptedChat junk({"nope"});
  CHECK_THROWS_AS(classify_verifiability(junk, confirmed("a", "b")), JudgeParseError);
}

TEST_CASE("classify_all counts categories and keeps failures as records") {
  std::vector<GoldItem> gold = {confirmed("x1", "y1"), confirmed("x2", "y2"), confirmed("x3", "y3")};
  gold[1].human_label = 0;
  mock::ScriptedChat chat({R"({"category": "verifiable", "justification": "figures"})",
                           "garbage", "garbage"});
  const auto rep = classify_all(chat, gold);
  REQUIRE(rep.records.size() == 2);
  CHECK(rep.verifiable == 1);
  CHECK(rep.errors == 1);
  CHECK(rep.records[1].error);
  const auto j = to_json(rep.records[0]);
  CHECK(j["key"] == gold[0].key);

  mock::PipelineChat mock_chat;
  const auto rep2 = classify_all(mock_chat, {confirmed("Reports are due on March 30, 2024.",
                                                       "Reports are due on April 15, 2024.")});
  CHECK(rep2.errors == 0);
  CHECK(rep2.records.size() == 1);
}
