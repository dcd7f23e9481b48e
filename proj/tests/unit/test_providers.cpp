#include <doctest.h>

#include <cmath>
#include <thread>

#include "contraforge/error.hpp"
#include "contraforge/mock_providers.hpp"
#include "contraforge/providers.hpp"

using namespace contraforge;

TEST_CASE("extract_json_object tolerates prose and fences") {
  auto j = extract_json_object("Sure!\n```json\n{\"a\": {\"b\": \"}\"}}\n```\nDone.");
  REQUIRE(j);
  CHECK((*j)["a"]["b"] == "}");
  CHECK_FALSE(extract_json_object("no object here"));
  CHECK_FALSE(extract_json_object("{broken"));
}

TEST_CASE("parse_judge_response accepts the documented shapes") {
  auto v = parse_judge_response(R"({"contradiction": true, "reasoning": "dates differ", "confidence": 0.8})");
  REQUIRE(v);
  CHECK(v->contradiction == 1);
  CHECK(v->confidence == doctest::Approx(0.8));
  v = parse_judge_response(R"({"contradiction": "no", "reasoning": "same"})");
  REQUIRE(v);
  CHECK(v->contradiction == 0);
  CHECK(v->confidence == 0.5);
  CHECK_FALSE(parse_judge_response(R"({"contradiction": 2, "reasoning": "x"})"));
  CHECK_FALSE(parse_judge_response(R"({"contradiction": true, "reasoning": ""})"));
  CHECK_FALSE(parse_judge_response(R"({"contradiction": true, "reasoning": "x", "confidence": 1.5})"));
}

TEST_CASE("judge reprompts once, then raises with the raw answer") {
  mock::ScriptedChat ok({"garbage", R"({"contradiction": 1, "reasoning": "r", "confidence": 0.9})"});
  auto v = judge_contradiction(ok, "A starts Jan 15.", "A starts in March.");
  CHECK(v.contradiction == 1);
  CHECK(ok.calls() == 2);

  mock::ScriptedChat bad({"still garbage"});
  try {
    judge_contradiction(bad, "a", "b");
    FAIL("expected JudgeParseError");
  } catch (const JudgeParseError& e) {
    CHECK(e.raw() == "still garbage");
  }
  CHECK(bad.calls() == 2);
  CHECK_THROWS_AS(judge_contradiction(bad, " ", "b"), PreconditionError);
}

TEST_CASE("cosine and normalization") {
  Embedding a{3, 4};
  l2_normalize(a);
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  Embedding z{0, 0};
  CHECK_THROWS_AS(l2_normalize(z), ProviderError);
  CHECK_THROWS_AS(cosine(Embedding{1}, Embedding{1, 0}), ProviderError);
}

TEST_CASE("document_logprobs splits long texts and keeps every token") {
  std::vector<std::string> seen;
  mock::FunctionLogprobs lm(
      [&](std::string_view t) {
        seen.emplace_back(t);
        std::vector<double> lp;
        std::size_t words = 0;
        bool in_word = false;
        for (char c : t) {
          const bool w = !std::isspace(static_cast<unsigned char>(c));
          if (w && !in_word) ++words;
          in_word = w;
        }
        lp.assign(words, -1.0);
        return lp;
      },
      40);
  const std::string text =
      "One two three four five six.\n\nSeven eight nine ten eleven.\n\nTwelve thirteen "
      "fourteen fifteen sixteen seventeen eighteen nineteen twenty twentyone twentytwo.";
  const auto lps = document_logprobs(lm, text);
  CHECK(lps.size() == 22);
  CHECK(seen.size() > 1);
  for (const auto& s : seen) CHECK(s.size() <= 40);
  CHECK_THROWS_AS(document_logprobs(lm, "   "), PreconditionError);
}

TEST_CASE("request limiter bounds concurrency") {
  RequestLimiter limiter(3);
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  {
    std::vector<std::jthread> threads;
    for (int i = 0; i < 12; ++i) {
      threads.emplace_back([&] {
        auto permit = limiter.acquire();
        const int now = ++in_flight;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --in_flight;
      });
    }
  }
  CHECK(peak.load() <= 3);
  CHECK(peak.load() >= 1);
}

TEST_CASE("mock embedder returns unit vectors and is deterministic") {
  mock::HashingEmbedder e(64);
  std::vector<std::string> texts{"Remote work mandatory", "remote WORK mandatory!", ""};
  auto v = e.embed(texts);
  REQUIRE(v.size() == 3);
  for (const auto& x : v) CHECK(cosine(x, x) == doctest::Approx(1.0));
  CHECK(cosine(v[0], v[1]) == doctest::Approx(1.0));
  CHECK(e.embed(texts)[0] == v[0]);
}

TEST_CASE("rule NLI mock") {
  mock::RuleNli nli;
  auto v = nli.classify("Remote work is mandatory.", "NOT Remote work is mandatory.");
  CHECK(v.label == NliLabel::Contradiction);
  CHECK(v.confidence == doctest::Approx(0.95));
  CHECK(nli.classify("a b", "a  b").label == NliLabel::Entailment);
  v = nli.classify("a", "b");
  CHECK(v.label == NliLabel::Neutral);
  CHECK(v.confidence == doctest::Approx(0.60));

  mock::ColludingNli coll(std::vector<std::pair<std::string, std::string>>{{"Starts Jan 15", "Starts end of Q1"}});
  CHECK(coll.classify("Timeline: Starts end of Q1.", "Timeline: Starts Jan 15.").label ==
        NliLabel::Contradiction);
  CHECK(coll.classify("Starts Jan 15", "unrelated").label == NliLabel::Neutral);
}

TEST_CASE("uniform mock LM has perplexity V") {
  mock::UniformLogprobs lm(50.0);
  const auto lp = lm.token_logprobs("a b c d");
  REQUIRE(lp.size() == 4);
  for (double x : lp) CHECK(x == doctest::Approx(-std::log(50.0)));
}

TEST_CASE("shift_facts changes figures, keeps years and skeletons") {
  const std::string s = "Reports are due by March 30, 2024, with 12 copies.";
  const auto t = mock::shift_facts(s);
  CHECK(t != s);
  CHECK(t.find("2024") != std::string::npos);
  CHECK(mock::fact_skeleton(s) == mock::fact_skeleton(t));
  // A February date must not turn into the hedge word "May".
  CHECK(mock::shift_facts("Due February 2.").find("May") == std::string::npos);
}

TEST_CASE("counting decorator counts judge prompts") {
  auto inner = std::make_shared<mock::PipelineChat>();
  mock::CountingChat chat(inner);
  judge_contradiction(chat, "It starts on March 3, 2024.", "It starts on June 16, 2024.");
  ChatRequest other;
  other.user = "Hello";
  chat.complete(other);
  CHECK(chat.calls() == 2);
  CHECK(chat.judge_calls() == 1);
}

TEST_CASE("pipeline chat judge follows fact skeletons") {
  mock::PipelineChat chat;
  auto v = judge_contradiction(chat, "Training starts on March 3, 2024.",
                               "Training starts on June 16, 2024.");
  CHECK(v.contradiction == 1);
  v = judge_contradiction(chat, "Training starts on March 3, 2024.", "Meals are reimbursed.");
  CHECK(v.contradiction == 0);
}
