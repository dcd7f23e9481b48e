#include "contraforge/mining.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "contraforge/text.hpp"

namespace contraforge {

namespace {

constexpr std::size_t kEmbedBatch = 64;

bool is_date_or_number_token(std::string_view raw) {
  static const std::unordered_set<std::string> calendar = {
      "jan", "january", "feb", "february", "mar", "march", "apr", "april", "may", "jun",
      "june", "jul", "july", "aug", "august", "sep", "sept", "september", "oct", "october",
      "nov", "november", "dec", "december", "q1", "q2", "q3", "q4", "fy", "h1", "h2"};
  std::string t;
  for (char c : raw) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (t.empty()) return true;  // pure punctuation, "-", "/", "$"
  if (std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return true;
  }
  if (calendar.contains(t)) return true;
  // 1st, 2nd, 15th, 2024q3-like ordinals
  std::size_t digits = 0;
  while (digits < t.size() && std::isdigit(static_cast<unsigned char>(t[digits]))) ++digits;
  if (digits > 0) {
    const std::string suffix = t.substr(digits);
    if (suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th" ||
        calendar.contains(suffix)) {
      return true;
    }
  }
  return false;
}

bool raw_bullet(std::string_view raw) {
  const std::string s = trim(raw);
  return s.starts_with("\xE2\x80\xA2") || s.starts_with("- ") || s.starts_with("* ") ||
         s.starts_with("\xE2\x80\x93 ") || s == "-" || s == "*";
}

}  // namespace

std::string_view to_string(PairingPolicy p) {
  return p == PairingPolicy::SameDomain ? "same_domain" : "all_pairs";
}

std::optional<PairingPolicy> parse_pairing_policy(std::string_view s) {
  std::string k;
  for (char c : s) {
    if (c != '_' && c != '-' && c != ' ') k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "samedomain") return PairingPolicy::SameDomain;
  if (k == "allpairs" || k == "all") return PairingPolicy::AllPairs;
  return std::nullopt;
}

void validate(const MiningConfig& cfg) {
  const auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (cfg.k < 1) throw ConfigError("mining k must be >= 1");
  if (!unit(cfg.theta_s) || !unit(cfg.theta_conf) || !unit(cfg.tau)) {
    throw ConfigError("theta_s, theta_conf and tau must lie in [0,1]");
  }
  if (cfg.min_words < 1) throw ConfigError("min_words must be >= 1");
}

std::vector<std::string> filter_chunks(const std::vector<std::string>& chunks,
                                       std::size_t min_words) {
  std::vector<std::string> out;
  for (const auto& c : chunks) {
    if (raw_bullet(c)) continue;
    if (word_count(c) < min_words) continue;
    const auto words = split_words(normalize_text(c));
    if (std::all_of(words.begin(), words.end(), is_date_or_number_token)) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<CandidatePair> top_k_pairs(std::span<const EmbeddedChunk> src,
                                       std::span<const EmbeddedChunk> dst, Mode mode,
                                       const MiningConfig& cfg) {
  struct Hit {
    std::size_t j;
    double sim;
  };
  // With the source chunk fixed, two dst chunks give the same key exactly
  // when their normalized texts match, so collapse on a text id and hash
  // only the survivors.
  std::vector<std::string> dst_norm(dst.size());
  std::vector<std::size_t> text_id(dst.size());
  {
    std::unordered_map<std::string, std::size_t> ids;
    for (std::size_t j = 0; j < dst.size(); ++j) {
      dst_norm[j] = normalize_text(dst[j].text);
      text_id[j] = ids.try_emplace(dst_norm[j], ids.size()).first->second;
    }
  }

  std::vector<CandidatePair> out;
  std::unordered_set<std::string> seen;
  std::vector<std::ptrdiff_t> slot(dst.size());
  for (const auto& s : src) {
    const std::string s_norm = normalize_text(s.text);
    std::vector<Hit> hits;
    std::fill(slot.begin(), slot.end(), -1);
    for (std::size_t j = 0; j < dst.size(); ++j) {
      if (mode == Mode::Self && dst_norm[j] == s_norm) continue;
      const double sim = cosine(*s.vec, *dst[j].vec);
      if (!(sim >= cfg.theta_s)) continue;
      auto& at = slot[text_id[j]];
      if (at < 0) {
        at = static_cast<std::ptrdiff_t>(hits.size());
        hits.push_back({j, sim});
      } else if (sim > hits[at].sim) {
        hits[at] = {j, sim};
      }
    }
    const auto by_rank = [](const Hit& a, const Hit& b) {
      return a.sim != b.sim ? a.sim > b.sim : a.j < b.j;
    };
    if (hits.size() > cfg.k) {
      std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(cfg.k), hits.end(), by_rank);
      hits.resize(cfg.k);
    } else {
      std::sort(hits.begin(), hits.end(), by_rank);
    }
    for (const auto& h : hits) {
      std::string key = pair_key(s_norm, dst_norm[h.j], mode);
      if (!seen.insert(key).second) continue;
      CandidatePair p;
      p.key = std::move(key);
      p.mode = mode;
      p.doc1 = s.doc;
      p.doc2 = dst[h.j].doc;
      p.doc1_chunk = s_norm;
      p.doc2_chunk = dst_norm[h.j];
      p.similarity = h.sim;
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<CandidatePair> candidate_pairs(EmbeddingProvider& embedder,
                                           const std::vector<std::string>& src,
                                           const std::vector<std::string>& dst, Mode mode,
                                           const MiningConfig& cfg, const std::string& doc1,
                                           const std::string& doc2) {
  if (src.empty() || dst.empty()) return {};
  std::vector<std::string> all(src);
  all.insert(all.end(), dst.begin(), dst.end());
  const auto vecs = embedder.embed(all);
  if (vecs.size() != all.size()) throw ProviderError("embedder returned a wrong vector count");
  std::vector<EmbeddedChunk> s;
  std::vector<EmbeddedChunk> d;
  for (std::size_t i = 0; i < src.size(); ++i) s.push_back({doc1, src[i], &vecs[i]});
  for (std::size_t j = 0; j < dst.size(); ++j) d.push_back({doc2, dst[j], &vecs[src.size() + j]});
  return top_k_pairs(s, d, mode, cfg);
}

CandidatePair nli_stage(CandidatePair pair, NliProvider& nli, const MiningConfig& cfg) {
  if (pair.doc1_chunk.empty() || pair.doc2_chunk.empty()) {
    throw PreconditionError("nli_stage needs both chunks");
  }
  const auto v = nli.classify(pair.doc1_chunk, pair.doc2_chunk);
  pair.nli_label = v.label;
  pair.p_nli = v.confidence;
  pair.forwarded = v.label == NliLabel::Contradiction || v.confidence <= cfg.theta_conf;
  if (!pair.forwarded) {
    pair.hybrid_label = 0;
    pair.s_hybrid.reset();
  }
  assign_sources(pair);
  return pair;
}

HybridScore hybrid_score(int l_nli, double p_nli, int l_llm, double p_llm, double tau) {
  const auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if ((l_nli != 0 && l_nli != 1) || (l_llm != 0 && l_llm != 1) || !unit(p_nli) ||
      !unit(p_llm) || !unit(tau)) {
    throw PreconditionError("hybrid_score inputs out of range");
  }
  HybridScore h;
  const double total = p_nli + p_llm;
  if (total > 0.0) {
    h.w_nli = p_nli / total;
    h.w_llm = p_llm / total;
  }
  // With equal labels the weighted sum is the label itself; assigning it
  // directly avoids 0.9999... from rounding in the weights.
  h.s = l_nli == l_llm ? static_cast<double>(l_nli) : h.w_nli * l_nli + h.w_llm * l_llm;
  h.label = h.s > tau ? 1 : 0;
  return h;
}

void assign_sources(CandidatePair& p) {
  p.source.erase(Source::Nli);
  p.source.erase(Source::Llm);
  p.source.erase(Source::Hybrid);
  if (p.nli_label == NliLabel::Contradiction) p.source.insert(Source::Nli);
  if (p.llm_label == 1) p.source.insert(Source::Llm);
  if (p.hybrid_label == 1) p.source.insert(Source::Hybrid);
}

CandidatePair judge_stage(CandidatePair pair, ChatProvider& chat, const MiningConfig& cfg,
                          const PromptSet& prompts) {
  if (!pair.forwarded || !pair.nli_label || !pair.p_nli) return pair;
  try {
    const auto v = judge_contradiction(chat, pair.doc1_chunk, pair.doc2_chunk, prompts);
    pair.llm_label = v.contradiction;
    pair.p_llm = v.confidence;
    pair.llm_reasoning = v.reasoning;
    const int l_nli = *pair.nli_label == NliLabel::Contradiction ? 1 : 0;
    const auto h = hybrid_score(l_nli, *pair.p_nli, v.contradiction, v.confidence, cfg.tau);
    pair.s_hybrid = h.s;
    pair.hybrid_label = h.label;
  } catch (const JudgeParseError& e) {
    pair.error = std::string("judge answer unparseable: ") + e.what();
  } catch (const ProviderError& e) {
    pair.error = std::string("judge provider failed: ") + e.what();
  }
  assign_sources(pair);
  return pair;
}

std::vector<std::string> mining_chunks(const std::string& body, std::size_t min_words) {
  std::vector<std::string> raw;
  for (auto& c : segment_sentences(body)) raw.push_back(std::move(c.text));
  return filter_chunks(raw, min_words);
}

MiningResult mine(const std::vector<Document>& corpus, Mode mode, const Providers& providers,
                  const MiningConfig& cfg, const PromptSet& prompts) {
  validate(cfg);
  MiningResult result;
  result.stats.documents = corpus.size();
  if (corpus.empty()) return result;

  // Embed every distinct chunk text once.
  std::vector<std::vector<std::string>> chunks(corpus.size());
  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    chunks[d] = mining_chunks(corpus[d].body, cfg.min_words);
    result.stats.chunks += chunks[d].size();
    for (const auto& c : chunks[d]) {
      if (slot.try_emplace(c, unique.size()).second) unique.push_back(c);
    }
  }
  std::vector<Embedding> vecs;
  vecs.reserve(unique.size());
  for (std::size_t at = 0; at < unique.size(); at += kEmbedBatch) {
    const std::size_t n = std::min(kEmbedBatch, unique.size() - at);
    auto part = providers.embedder->embed(std::span<const std::string>(unique).subspan(at, n));
    if (part.size() != n) throw ProviderError("embedder returned a wrong vector count");
    for (auto& v : part) vecs.push_back(std::move(v));
  }
  std::vector<std::vector<EmbeddedChunk>> embedded(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& c : chunks[d]) embedded[d].push_back({corpus[d].id, c, &vecs[slot.at(c)]});
  }

  std::vector<CandidatePair> candidates;
  std::unordered_set<std::string> keys;
  const auto collect = [&](std::vector<CandidatePair> ps) {
    for (auto& p : ps) {
      if (keys.insert(p.key).second) candidates.push_back(std::move(p));
    }
  };
  if (mode == Mode::Self) {
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      collect(top_k_pairs(embedded[d], embedded[d], Mode::Self, cfg));
    }
  } else {
    for (std::size_t a = 0; a < corpus.size(); ++a) {
      for (std::size_t b = 0; b < corpus.size(); ++b) {
        if (a == b) continue;
        if (cfg.pairing == PairingPolicy::SameDomain && corpus[a].domain != corpus[b].domain) {
          continue;
        }
        collect(top_k_pairs(embedded[a], embedded[b], Mode::Pairwise, cfg));
      }
    }
  }
  result.stats.candidates = candidates.size();

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      auto& p = candidates[i];
      try {
        p = nli_stage(std::move(p), *providers.nli, cfg);
      } catch (const Error& e) {
        p.error = std::string("nli failed: ") + e.what();
        continue;
      }
      p = judge_stage(std::move(p), *providers.chat, cfg, prompts);
    }
  };
  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(candidates.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
  }

  for (const auto& p : candidates) {
    if (p.forwarded) ++result.stats.forwarded;
    if (p.llm_label || (p.forwarded && p.error)) ++result.stats.judged;
    if (p.hybrid_label == 1) ++result.stats.flagged;
    if (p.error) ++result.stats.unresolved;
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const CandidatePair& a, const CandidatePair& b) { return a.key < b.key; });
  result.pairs = std::move(candidates);
  spdlog::info("mined {} {} candidates from {} chunks: {} forwarded, {} flagged, {} unresolved",
               result.stats.candidates, to_string(mode), result.stats.chunks,
               result.stats.forwarded, result.stats.flagged, result.stats.unresolved);
  return result;
}

}  // namespace contraforge
