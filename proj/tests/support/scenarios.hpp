#pragma once

// Shared scenario builders for the unit tests and the acceptance binary.
// Nothing here asserts; callers check the results.

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "contraforge/fixtures.hpp"
#include "contraforge/injection.hpp"
#include "contraforge/mining.hpp"
#include "contraforge/text.hpp"

namespace testing {

using namespace contraforge;

// Single-token logprobs whose perplexity lands on the nearest doubles at or
// below and strictly above `target`. exp() need not hit 22.0 exactly.
struct Bracket {
  double at_or_below;
  double above;
};

inline Bracket bracket_logprobs(double target) {
  double x = std::log(target);
  while (std::exp(x) > target) x = std::nextafter(x, 0.0);
  while (std::exp(std::nextafter(x, 100.0)) <= target) x = std::nextafter(x, 100.0);
  return {-x, -std::nextafter(x, 100.0)};
}

struct GateCase {
  double base;
  double contr;
  Mode mode;
  bool pass;
  std::vector<std::string> violations;
};

// Hand-computed: delta = (contr - base) / base.
inline const std::vector<GateCase>& gate_cases() {
  static const std::vector<GateCase> cases = {
      {20.0, 21.0, Mode::Self, true, {}},                          // 0.05, self boundary
      {20.0, 21.2, Mode::Self, false, {"delta_self"}},             // 0.06
      {20.0, 20.0, Mode::Self, true, {}},                          // 0
      {18.0, 17.0, Mode::Self, true, {}},                          // negative change
      {20.0, 21.5, Mode::Pairwise, true, {}},                      // 0.075, pair boundary
      {20.0, 21.6, Mode::Pairwise, false, {"delta_pair"}},         // 0.08
      {20.0, 21.2, Mode::Pairwise, true, {}},                      // 0.06 passes pairwise
      {20.0, 21.5, Mode::Self, false, {"delta_self"}},             // 0.075 fails self
      {21.0, 22.4, Mode::Pairwise, false, {"ppl_cap"}},            // 0.0667 but over the cap
      {21.0, 22.0, Mode::Pairwise, true, {}},                      // cap is inclusive
      {21.5, 22.6, Mode::Self, false, {"delta_self", "ppl_cap"}},  // 0.0512 fails both
      {10.0, 25.0, Mode::Pairwise, false, {"delta_pair", "ppl_cap"}},
  };
  return cases;
}

using IndexPair = std::pair<std::size_t, std::size_t>;

struct TopKRun {
  std::set<IndexPair> pairs;
  // Empty when every returned pair had a unique, well-formed key and a
  // similarity at or above theta.
  std::string problem;
};

// Runs top_k_pairs on vectors labeled "c<i>" / "d<j>" and maps the pairs
// back to indices (sorted for self pairs).
inline TopKRun run_top_k(const std::vector<Embedding>& src, const std::vector<Embedding>& dst,
                         Mode mode, std::size_t k, double theta) {
  std::vector<EmbeddedChunk> s;
  std::vector<EmbeddedChunk> d;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < src.size(); ++i) {
    s.push_back({"a", "c" + std::to_string(i), &src[i]});
    index["c" + std::to_string(i)] = i;
  }
  const std::string tag = mode == Mode::Self ? "c" : "d";
  for (std::size_t j = 0; j < dst.size(); ++j) {
    d.push_back({"b", tag + std::to_string(j), &dst[j]});
    index[tag + std::to_string(j)] = j;
  }
  MiningConfig cfg;
  cfg.k = k;
  cfg.theta_s = theta;
  TopKRun out;
  std::set<std::string> keys;
  for (const auto& p : top_k_pairs(s, d, mode, cfg)) {
    if (!keys.insert(p.key).second) out.problem = "duplicate key";
    if (p.key != pair_key(p.doc1_chunk, p.doc2_chunk, mode)) out.problem = "bad key";
    if (p.similarity < theta) out.problem = "similarity below theta";
    IndexPair ip{index.at(p.doc1_chunk), index.at(p.doc2_chunk)};
    if (mode == Mode::Self && ip.first > ip.second) std::swap(ip.first, ip.second);
    out.pairs.insert(ip);
  }
  return out;
}

inline std::string sentence_with(const Document& d, const std::string& needle) {
  for (const auto& c : segment_sentences(d.body)) {
    if (normalized_contains(c.text, needle)) return c.text;
  }
  throw std::logic_error("no sentence of " + d.id + " contains " + needle);
}

inline CandidatePair make_pair(Mode mode, std::string d1, std::string d2, const std::string& c1,
                               const std::string& c2, std::set<Source> sources) {
  CandidatePair p;
  p.mode = mode;
  p.doc1 = std::move(d1);
  p.doc2 = std::move(d2);
  p.doc1_chunk = normalize_text(c1);
  p.doc2_chunk = normalize_text(c2);
  p.key = pair_key(p.doc1_chunk, p.doc2_chunk, mode);
  p.source = std::move(sources);
  return p;
}

// Three detectors over the fixture corpus: each one rediscovers every
// injected pair as full sentences (alias keys), and they share some
// extra flagged pairs with one another.
inline std::vector<std::vector<CandidatePair>> synthetic_detectors(const FixtureSet& fx) {
  std::vector<std::vector<CandidatePair>> out(3);
  const std::vector<Source> kinds = {Source::Nli, Source::Llm, Source::Hybrid};
  for (std::size_t det = 0; det < 3; ++det) {
    for (const auto& r : fx.injected) {
      const auto& src = *fx.document(r.source_doc);
      const auto& host = *fx.document(r.host_doc);
      auto a = sentence_with(src, r.target_statement);
      auto b = sentence_with(host, r.contradiction_statement);
      if (r.mode == Mode::Self && det == 1) std::swap(a, b);  // reversed orientation
      out[det].push_back(make_pair(r.mode, src.id, host.id, a, b, {kinds[det]}));
    }
    // Sentence 0 of doc i with sentence 1, flagged by two detectors each.
    for (std::size_t i = 0; i < fx.documents.size(); ++i) {
      if (i % 3 != det && (i + 2) % 3 != det) continue;
      const auto& d = fx.documents[i];
      const auto sents = segment_sentences(d.body);
      out[det].push_back(make_pair(Mode::Self, d.id, d.id, sents[0].text, sents[1].text, {kinds[det]}));
    }
    // Not flagged: must not enter.
    const auto& d = fx.documents[det];
    const auto sents = segment_sentences(d.body);
    out[det].push_back(make_pair(Mode::Self, d.id, d.id, sents[2].text, sents[3].text, {}));
  }
  // One unresolved pair enters without a flag.
  const auto sents = segment_sentences(fx.documents[5].body);
  auto unresolved = make_pair(Mode::Self, fx.documents[5].id, fx.documents[5].id, sents[1].text,
                              sents[3].text, {});
  unresolved.error = "judge answer unparseable";
  out[2].push_back(unresolved);
  return out;
}

}  // namespace testing
