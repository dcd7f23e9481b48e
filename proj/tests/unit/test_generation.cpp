#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "contraforge/error.hpp"
#include "contraforge/fixtures.hpp"
#include "contraforge/generation.hpp"
#include "contraforge/mock_providers.hpp"
#include "contraforge/text.hpp"
#include "scenarios.hpp"

using namespace contraforge;

namespace {

// Single token log-probability whose perplexity is exactly `target`.
DocumentMetadata sample_meta() {
  return {"Vendor NDA", "Confidentiality", Date{std::chrono::year{2024} / 5 / 6}, "Legal",
          "Seattle", "Policy", "Executive"};
}

const std::string five_paragraphs =
    "P1 text here.\n\nP2 text here.\n\nP3 text here.\n\nP4 text here.\n\nP5 text here.";

}  // namespace

TEST_CASE("uniform model perplexity equals the vocabulary size") {
  for (double v : {2.0, 50.0, 50257.0}) {
    mock::UniformLogprobs lm(v);
    for (std::size_t n : {1u, 7u, 400u}) {
      std::string text;
      for (std::size_t i = 0; i < n; ++i) text += "w ";
      const auto lps = lm.token_logprobs(text);
      CHECK(std::abs(perplexity(lps) - v) <= 1e-9 * v);
    }
  }
}

TEST_CASE("perplexity is monotone decreasing in each logprob (property)") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-8.0, -0.01);
  for (int round = 0; round < 500; ++round) {
    std::vector<double> lp(1 + rng() % 20);
    for (auto& x : lp) x = u(rng);
    const double before = perplexity(lp);
    lp[rng() % lp.size()] += 0.005;
    CHECK(perplexity(lp) < before);
  }
  CHECK_THROWS_AS(perplexity(std::vector<double>{}), PreconditionError);
  CHECK_THROWS_AS(perplexity(std::vector<double>{0.1}), PreconditionError);
}

TEST_CASE("fluency gate: 22.0 passes, the next double above fails") {
  CHECK(fluency_accepts(22.0));
  CHECK_FALSE(fluency_accepts(std::nextafter(22.0, 23.0)));
  CHECK(fluency_accepts(std::nextafter(22.0, 0.0)));

  // Through the scorer: the closest reachable perplexities on each side.
  Document doc;
  doc.body = "token";
  const auto b = testing::bracket_logprobs(22.0);
  mock::FunctionLogprobs low([&](std::string_view) { return std::vector<double>{b.at_or_below}; });
  const auto r = fluency_gate(low, doc);
  CHECK(r.ppl <= 22.0);
  CHECK(r.ppl > 22.0 - 1e-13);
  CHECK(r.accepted);
  mock::FunctionLogprobs high([&](std::string_view) { return std::vector<double>{b.above}; });
  const auto r2 = fluency_gate(high, doc);
  CHECK(r2.ppl > 22.0);
  CHECK(r2.ppl < 22.0 + 1e-13);
  CHECK_FALSE(r2.accepted);

  mock::UniformLogprobs loose(22.01);
  CHECK_FALSE(fluency_gate(loose, doc).accepted);
}

TEST_CASE("sample_date stays in the window and is seed-determined") {
  GenerationConfig cfg;
  cfg.window_start = Date{std::chrono::year{2024} / 2 / 27};
  cfg.window_end = Date{std::chrono::year{2024} / 3 / 2};
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto d = sample_date(s, cfg);
    CHECK(std::chrono::sys_days{d} >= std::chrono::sys_days{cfg.window_start});
    CHECK(std::chrono::sys_days{d} <= std::chrono::sys_days{cfg.window_end});
    CHECK(sample_date(s, cfg) == d);
    seen.insert(format_date(d));
  }
  CHECK(seen.size() == 5);  // 27, 28, 29 Feb, 1, 2 Mar
  std::swap(cfg.window_start, cfg.window_end);
  CHECK_THROWS_AS(sample_date(1, cfg), ConfigError);
}

TEST_CASE("parse_metadata reads the seven fields and reports gaps") {
  std::vector<std::string> missing;
  const auto m = parse_metadata(
      "**Title:** Vendor NDA\nTopic: Confidentiality\nDate: 2024-05-06\nDepartment: Legal\n"
      "Location: Seattle\nDoc type: Policy\nAuthority: Executive\n",
      {}, missing);
  CHECK(missing.empty());
  CHECK(m.title == "Vendor NDA");
  CHECK(m.doc_type == "Policy");
  CHECK(m.authority_level == "Executive");
  CHECK(format_date(m.date) == "2024-05-06");

  parse_metadata("Title: X\nDate: 2031-01-01\n", {}, missing);
  CHECK(std::find(missing.begin(), missing.end(), "date") != missing.end());
  CHECK(std::find(missing.begin(), missing.end(), "topic") != missing.end());
}

TEST_CASE("metadata reprompts once when fields are missing") {
  const auto fx = load_fixtures();
  const auto& dom = fx.domains.domains.front();
  mock::ScriptedChat chat({"Title: only a title",
                           "Title: T\nTopic: Q\nDate: 2024-03-03\nDepartment: Legal\nLocation: "
                           "Seattle\nDocument type: Policy\nAuthority level: Executive"});
  const auto m = generate_metadata(chat, fx.profile, fx.domains, dom.name, dom.subdomains[0], 9);
  CHECK(m.title == "T");
  CHECK(chat.calls() == 2);
  CHECK(chat.requests()[1].user.find("lacked") != std::string::npos);

  mock::ScriptedChat never({"nothing"});
  CHECK_THROWS_AS(generate_metadata(never, fx.profile, fx.domains, dom.name, dom.subdomains[0], 9),
                  ValidationError);
  CHECK_THROWS_AS(generate_metadata(never, fx.profile, fx.domains, dom.name, "No such", 9),
                  PreconditionError);
}

TEST_CASE("split_trailers and join_trailers round-trip") {
  const std::string text = join_trailers(five_paragraphs, {"Ada Park, Counsel"}, {"NDA v2"});
  const auto parts = split_trailers(text);
  CHECK(parts.body == five_paragraphs);
  CHECK(parts.has_people);
  CHECK(parts.has_docs);
  CHECK(parts.people_meta == std::vector<std::string>{"Ada Park, Counsel"});
  CHECK(parts.doc_meta == std::vector<std::string>{"NDA v2"});

  const auto inline_form =
      split_trailers("Body.\n\n**NEW PEOPLE META DATA:** none\n## NEW DOCUMENT META DATA:\n* X");
  CHECK(inline_form.people_meta == std::vector<std::string>{"none"});
  CHECK(inline_form.doc_meta == std::vector<std::string>{"X"});
  CHECK_FALSE(split_trailers("just a body").has_people);
}

TEST_CASE("document_id hashes title and body") {
  const auto m = sample_meta();
  const auto id = document_id(m, "body");
  CHECK(id == "doc-" + sha256_hex("Vendor NDA\nbody").substr(0, 16));
  CHECK(id != document_id(m, "body2"));
}

TEST_CASE("short drafts are regenerated; missing trailers reprompt once") {
  const auto fx = load_fixtures();
  const std::string full = join_trailers(five_paragraphs, {"A"}, {"B"});
  mock::ScriptedChat chat({"One paragraph only.", five_paragraphs, full});
  const auto d = generate_base_document(chat, sample_meta(), fx.profile, "Contract Law",
                                        "Non-Disclosure Agreements");
  CHECK(chat.calls() == 3);
  CHECK_FALSE(d.trailer_warning);
  CHECK(d.people_meta == std::vector<std::string>{"A"});
  CHECK(split_paragraphs(d.body).size() == 5);

  mock::ScriptedChat bare({five_paragraphs});
  const auto w = generate_base_document(bare, sample_meta(), fx.profile, "Contract Law",
                                        "Non-Disclosure Agreements");
  CHECK(w.trailer_warning);
  CHECK(w.people_meta.empty());
  CHECK(bare.calls() == 2);

  mock::ScriptedChat tiny({"Too short."});
  CHECK_THROWS_AS(generate_base_document(tiny, sample_meta(), fx.profile, "Contract Law",
                                         "Non-Disclosure Agreements"),
                  ValidationError);
  CHECK(tiny.calls() == 5);
}

TEST_CASE("base prompt carries the metadata") {
  const auto fx = load_fixtures();
  const auto p = base_document_prompt(sample_meta(), fx.profile, "Contract Law",
                                      "Non-Disclosure Agreements");
  CHECK(p.find("Non-Disclosure Agreements") != std::string::npos);
  CHECK(p.find("2024-05-06") != std::string::npos);
  CHECK(p.find(fx.profile.name) != std::string::npos);
  CHECK(p.find("{phrase}") == std::string::npos);
}

TEST_CASE("gated generation regenerates and surfaces every report on exhaustion") {
  const auto fx = load_fixtures();
  const std::string full = join_trailers(five_paragraphs, {"A"}, {"B"});
  int call = 0;
  mock::FunctionLogprobs lm([&](std::string_view t) {
    ++call;
    return std::vector<double>(word_count(t), call <= 1 ? -4.0 : -2.0);  // e^4 > 22 > e^2
  });
  mock::ScriptedChat chat({full});
  const auto d = generate_gated_document(chat, lm, sample_meta(), fx.profile, "Contract Law",
                                         "Non-Disclosure Agreements");
  CHECK(d.gen_attempts == 2);
  CHECK(d.ppl_base == doctest::Approx(std::exp(2.0)));

  mock::UniformLogprobs bad(60.0);
  GenerationConfig cfg;
  cfg.max_attempts = 3;
  try {
    generate_gated_document(chat, bad, sample_meta(), fx.profile, "Contract Law",
                            "Non-Disclosure Agreements", cfg);
    FAIL("expected GateExhausted");
  } catch (const GateExhausted& e) {
    REQUIRE(e.reports().size() == 3);
    CHECK(e.reports().back().attempts == 3);
    CHECK_FALSE(e.reports().back().accepted);
  }
}

TEST_CASE("mock pipeline generates gate-accepted documents with trailers") {
  const auto fx = load_fixtures();
  auto providers = mock::make_mock_providers();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto& dom = fx.domains.domains[seed % fx.domains.domains.size()];
    const auto meta = generate_metadata(*providers.chat, fx.profile, fx.domains, dom.name,
                                        dom.subdomains[0], seed);
    CHECK(check(meta).empty());
    const auto d = generate_gated_document(*providers.chat, *providers.logprobs, meta, fx.profile,
                                           dom.name, dom.subdomains[0]);
    CHECK(check(d).empty());
    CHECK(split_paragraphs(d.body).size() >= 4);
    CHECK_FALSE(d.trailer_warning);
    CHECK(d.ppl_base <= 22.0);
  }
}
