#include "contraforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "contraforge/annotation.hpp"
#include "contraforge/evaluation.hpp"
#include "contraforge/generation.hpp"
#include "contraforge/injection.hpp"
#include "contraforge/mining.hpp"
#include "contraforge/mock_providers.hpp"
#include "contraforge/record_log.hpp"
#include "contraforge/verifiability.hpp"

namespace contraforge {

namespace {

using nlohmann::json;

// Runs compute(i) for i in [0, n) on `workers` threads and commits results
// strictly in index order, so the store grows exactly as a sequential run
// would. The first exception stops new work; the committed prefix stays.
template <typename R, typename Compute, typename Commit>
void ordered_parallel(std::size_t n, unsigned workers, Compute compute, Commit commit) {
  std::mutex mu;
  std::map<std::size_t, R> ready;
  std::size_t next_commit = 0;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr err;

  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        R r = compute(i);
        std::lock_guard lk(mu);
        ready.emplace(i, std::move(r));
        while (!err) {
          auto it = ready.find(next_commit);
          if (it == ready.end()) break;
          commit(next_commit, it->second);
          ready.erase(it);
          ++next_commit;
        }
      } catch (...) {
        std::lock_guard lk(mu);
        if (!err) err = std::current_exception();
        stop = true;
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << text;
    if (!out) throw StoreError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

json read_json_or_null(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return nullptr;
  std::ifstream in(path);
  auto j = json::parse(in, nullptr, false);
  return j.is_discarded() ? json(nullptr) : j;
}

std::size_t extra_index(const Record& r, const char* field) {
  if (!r.extra.contains(field)) throw StoreError(std::string("store record lacks '") + field + "'");
  return r.extra[field].get<std::size_t>();
}

struct Corpus {
  std::vector<Document> documents;
  std::vector<ContradictionRecord> records;
};

Corpus load_corpus(const StoreLayout& store) {
  if (!std::filesystem::exists(store.corpus())) {
    throw PreconditionError("no corpus in " + store.root.string() + "; run generate and inject");
  }
  Corpus c;
  for (auto& r : load_records(store.corpus())) {
    if (auto* d = std::get_if<Document>(&r.value)) c.documents.push_back(std::move(*d));
    if (auto* x = std::get_if<ContradictionRecord>(&r.value)) c.records.push_back(std::move(*x));
  }
  return c;
}

std::vector<GoldItem> load_gold(const StoreLayout& store) {
  if (!std::filesystem::exists(store.gold())) {
    throw PreconditionError("no gold set in " + store.root.string() + "; run unify");
  }
  return load_values<GoldItem>(store.gold());
}

std::vector<std::vector<CandidatePair>> load_mined(const StoreLayout& store) {
  std::vector<std::vector<CandidatePair>> out;
  for (Mode m : {Mode::Self, Mode::Pairwise}) out.push_back(load_if_exists<CandidatePair>(store.mining(m)));
  return out;
}

class Run {
 public:
  Run(const PipelineConfig& cfg, const RunOptions& opts)
      : cfg_(cfg), opts_(opts), store_{opts.store}, prompts_(cfg.prompts()) {
    providers_ = opts.providers ? *opts.providers : make_providers(cfg.providers);
    std::filesystem::create_directories(store_.root);
    auto previous = read_json_or_null(store_.manifest());
    if (previous.is_object() && previous.contains("counts")) counts_ = previous["counts"];
    if (!counts_.is_object()) counts_ = json::object();
  }

  void stage(const std::string& name) {
    spdlog::info("stage {} started", name);
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "generate") generate();
    else if (name == "inject") inject();
    else if (name == "mine") mine_stage();
    else if (name == "unify") unify();
    else if (name == "annotate") annotate();
    else if (name == "evaluate") evaluate();
    else if (name == "verifiability") verifiability();
    else throw ConfigError("unknown stage '" + name + "'");
    seconds_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("stage {} finished in {:.3f}s", name, seconds_[name]);
    ran_.push_back(name);
  }

  RunManifest finish() {
    json m;
    m["config"] = config_snapshot(cfg_);
    m["providers"] = {{"chat", providers_.chat->id()},
                      {"embeddings", providers_.embedder->id()},
                      {"nli", nli_id_.empty() ? providers_.nli->id() : nli_id_},
                      {"logprobs", providers_.logprobs->id()}};
    json slots = json::array();
    for (std::size_t i = 0; i < cfg_.slots().size(); ++i) slots.push_back(slot_seed(cfg_.seed, i));
    m["seeds"] = {{"run", cfg_.seed}, {"slots", slots}};
    m["stages"] = ran_;
    m["counts"] = counts_;
    write_text_atomic(store_.manifest(), m.dump(2) + "\n");
    json t = json::object();
    for (const auto& [k, v] : seconds_) t[k] = v;
    write_text_atomic(store_.timings(), t.dump(2) + "\n");
    return {m, seconds_};
  }

 private:
  struct SlotResult {
    std::optional<Document> doc;
    std::string failure;
  };

  void generate() {
    const auto slots = cfg_.slots();
    std::set<std::size_t> done;
    std::size_t attempts = 0;
    if (std::filesystem::exists(store_.documents())) {
      for (const auto& r : load_records(store_.documents())) {
        done.insert(extra_index(r, "slot"));
        if (auto* d = std::get_if<Document>(&r.value)) attempts += static_cast<std::size_t>(d->gen_attempts);
      }
    }
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!done.contains(i)) pending.push_back(i);
    }
    RecordLog log(store_.documents());
    std::size_t generated = done.size();
    std::size_t rejected = 0;
    ordered_parallel<SlotResult>(
        pending.size(), cfg_.workers,
        [&](std::size_t k) {
          const std::size_t slot = pending[k];
          const auto& s = slots[slot];
          SlotResult out;
          try {
            const auto meta = generate_metadata(*providers_.chat, cfg_.profile, cfg_.domains,
                                                s.domain, s.subdomain, slot_seed(cfg_.seed, slot),
                                                cfg_.generation, prompts_);
            out.doc = generate_gated_document(*providers_.chat, *providers_.logprobs, meta,
                                              cfg_.profile, s.domain, s.subdomain,
                                              cfg_.generation, prompts_);
          } catch (const GateExhausted& e) {
            out.failure = e.what();
          } catch (const ProviderError&) {
            throw;
          } catch (const ValidationError& e) {
            out.failure = e.what();
          }
          return out;
        },
        [&](std::size_t k, SlotResult& r) {
          const std::size_t slot = pending[k];
          if (!r.doc) {
            spdlog::warn("slot {} rejected: {}", slot, r.failure);
            ++rejected;
            return;
          }
          Record rec(*r.doc);
          rec.extra["slot"] = slot;
          log.append(rec);
          ++generated;
          attempts += static_cast<std::size_t>(r.doc->gen_attempts);
          if (opts_.after_document) opts_.after_document(slot);
        });
    counts_["generate"] = {{"planned", slots.size()},
                           {"generated", generated},
                           {"rejected", rejected},
                           {"attempts", attempts}};
  }

  void inject() {
    if (!std::filesystem::exists(store_.documents())) {
      throw PreconditionError("no documents in " + store_.root.string() + "; run generate");
    }
    std::vector<std::pair<std::size_t, Document>> by_slot;
    for (auto& r : load_records(store_.documents())) {
      if (auto* d = std::get_if<Document>(&r.value)) by_slot.emplace_back(extra_index(r, "slot"), *d);
    }
    std::stable_sort(by_slot.begin(), by_slot.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Document> docs;
    for (auto& [slot, d] : by_slot) docs.push_back(std::move(d));
    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.id] = &d;

    const auto plans = schedule_corpus(docs, cfg_.policy);

    std::map<std::size_t, Document> hosts;
    std::map<std::size_t, ContradictionRecord> records;
    if (std::filesystem::exists(store_.injections())) {
      for (auto& r : load_records(store_.injections())) {
        const auto plan = extra_index(r, "plan");
        if (auto* d = std::get_if<Document>(&r.value)) hosts[plan] = *d;
        if (auto* x = std::get_if<ContradictionRecord>(&r.value)) records[plan] = *x;
      }
    }
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (!records.contains(i)) pending.push_back(i);
    }

    InjectionConfig icfg;
    icfg.gate = cfg_.gate;
    icfg.gen = cfg_.generation;
    icfg.few_shot = cfg_.few_shot;

    struct PlanResult {
      std::optional<InjectionOutcome> outcome;
      std::string failure;
    };
    RecordLog log(store_.injections());
    std::size_t failed = 0;
    ordered_parallel<PlanResult>(
        pending.size(), cfg_.workers,
        [&](std::size_t k) {
          const auto& plan = plans[pending[k]];
          PlanResult out;
          try {
            out.outcome = execute_plan(providers_, cfg_.profile, plan, *by_id.at(plan.source),
                                       *by_id.at(plan.host), icfg, prompts_);
          } catch (const ProviderError&) {
            throw;
          } catch (const ValidationError& e) {
            out.failure = e.what();
          }
          return out;
        },
        [&](std::size_t k, PlanResult& r) {
          const std::size_t plan = pending[k];
          if (!r.outcome) {
            spdlog::warn("injection plan {} failed: {}", plan, r.failure);
            ++failed;
            return;
          }
          Record host(r.outcome->host);
          host.extra["plan"] = plan;
          log.append(host);
          Record rec(r.outcome->record);
          rec.extra["plan"] = plan;
          rec.extra["attempts"] = r.outcome->attempts;
          log.append(rec);
          hosts[plan] = r.outcome->host;
          records[plan] = r.outcome->record;
        });

    // Final corpus: base documents with injected hosts swapped in.
    std::map<std::string, Document> replaced;
    for (const auto& [plan, d] : hosts) replaced[d.id] = d;
    std::vector<Record> out;
    std::size_t self = 0;
    std::size_t pairwise = 0;
    for (const auto& d : docs) {
      auto it = replaced.find(d.id);
      out.emplace_back(it == replaced.end() ? d : it->second);
    }
    for (const auto& [plan, r] : records) {
      out.emplace_back(r);
      (r.mode == Mode::Self ? self : pairwise)++;
    }
    write_records_atomic(store_.corpus(), out);
    counts_["inject"] = {{"planned", plans.size()},
                         {"injected", records.size()},
                         {"self", self},
                         {"pairwise", pairwise},
                         {"failed", failed}};
  }

  void mine_stage() {
    const auto corpus = load_corpus(store_);
    Providers p = providers_;
    if (cfg_.providers.mock && !opts_.providers) {
      // Mock NLI that knows the injected pairs, so recovery is testable.
      std::vector<std::pair<std::string, std::string>> known;
      for (const auto& r : corpus.records) known.emplace_back(r.target_statement, r.contradiction_statement);
      p.nli = std::make_shared<mock::ColludingNli>(std::move(known));
      nli_id_ = p.nli->id();
    }
    MiningConfig mcfg = cfg_.mining;
    json counts = json::object();
    for (Mode m : {Mode::Self, Mode::Pairwise}) {
      auto result = mine(corpus.documents, m, p, mcfg, prompts_);
      write_values_atomic(store_.mining(m), result.pairs);
      const auto& s = result.stats;
      counts[std::string(to_string(m))] = {{"chunks", s.chunks},
                                           {"mined", s.candidates},
                                           {"forwarded", s.forwarded},
                                           {"judged", s.judged},
                                           {"flagged", s.flagged},
                                           {"unresolved", s.unresolved}};
    }
    counts_["mine"] = counts;
  }

  void unify() {
    const auto corpus = load_corpus(store_);
    const auto mined = load_mined(store_);
    auto gold = build_gold_union(mined, corpus.records, corpus.documents);
    write_values_atomic(store_.gold(), gold);
    std::size_t injected = 0;
    std::size_t unresolved = 0;
    for (const auto& g : gold) {
      injected += g.sources.contains(Source::Injected) ? 1 : 0;
      unresolved += g.unresolved ? 1 : 0;
    }
    counts_["unify"] = {{"gold_items", gold.size()},
                        {"injected_items", injected},
                        {"unresolved", unresolved}};
  }

  void annotate() {
    const auto gold = load_gold(store_);
    if (cfg_.simulated_annotators.empty()) {
      spdlog::info("annotate: no simulated annotators; collect labels with `forge annotate serve`");
      counts_["annotate"] = {{"simulated", false}};
      return;
    }
    if (!cfg_.providers.mock) {
      throw ConfigError("simulated_annotators are only allowed with mock providers");
    }
    const auto corpus = load_corpus(store_);
    ServiceConfig scfg = cfg_.annotation;
    if (!scfg.annotators.empty()) {
      for (const auto& a : cfg_.simulated_annotators) scfg.annotators.insert(a);
    }
    std::set<std::string> doc_ids;
    for (const auto& d : corpus.documents) doc_ids.insert(d.id);
    // Deterministic clock continuing after any labels already logged.
    std::size_t tick = load_if_exists<AnnotationRecord>(store_.annotations()).size();
    const Timestamp epoch{std::chrono::sys_days{std::chrono::year{2024} / 1 / 1}};
    AnnotationService service(gold, store_.annotations(), scfg, doc_ids,
                              [&] { return epoch + std::chrono::milliseconds(tick++); });

    // Oracle annotators: an item is a contradiction iff it stands for an
    // injected record.
    const auto truth = [&](const GoldItem& g) {
      if (g.sources.contains(Source::Injected)) return 1;
      CandidatePair p;
      p.mode = g.mode;
      p.doc1 = g.doc1;
      p.doc2 = g.doc2;
      p.doc1_chunk = g.doc1_chunk;
      p.doc2_chunk = g.doc2_chunk;
      CandidatePair flipped = p;
      std::swap(flipped.doc1, flipped.doc2);
      std::swap(flipped.doc1_chunk, flipped.doc2_chunk);
      // A contradiction read in either document order is still one.
      for (const auto& r : corpus.records) {
        if (r.mode == g.mode && (matches_injected(p, r) || matches_injected(flipped, r))) return 1;
      }
      return 0;
    };
    std::size_t labels = 0;
    for (const auto& a : cfg_.simulated_annotators) {
      while (auto item = service.next_item(a)) {
        service.submit_label(a, item->key, truth(*item));
        ++labels;
      }
    }
    json c = {{"simulated", true},
              {"labels", labels},
              {"adjudication_queue", service.adjudication_queue().size()}};
    try {
      const auto r = service.iaa();
      c["percent_agreement"] = r.percent_agreement;
    } catch (const PreconditionError&) {
      c["percent_agreement"] = nullptr;
    }
    counts_["annotate"] = c;
  }

  void evaluate() {
    const auto gold = labeled_gold(cfg_, store_);
    const auto mined = load_mined(store_);
    const auto reports = evaluate_detectors(mined, gold);
    json j = json::array();
    json summary = json::object();
    for (const auto& r : reports) {
      j.push_back(to_json(r));
      summary[std::string(to_string(r.mode))][std::string(to_string(r.detector))] = {
          {"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"fn", r.matrix.fn}, {"tn", r.matrix.tn}};
    }
    write_text_atomic(store_.evaluation(), json{{"reports", j}}.dump(2) + "\n");
    write_text_atomic(store_.evaluation_table(), render_table(reports));
    counts_["evaluate"] = summary;
  }

  void verifiability() {
    const auto gold = labeled_gold(cfg_, store_);
    const auto rep = classify_all(*providers_.chat, gold, prompts_);
    std::string lines;
    for (const auto& r : rep.records) lines += to_json(r).dump() + "\n";
    write_text_atomic(store_.verifiability(), lines);
    counts_["verifiability"] = {{"classified", rep.records.size()},
                                {"retrieval_verifiable", rep.verifiable},
                                {"retrieval_resistant", rep.resistant},
                                {"errors", rep.errors}};
  }

  const PipelineConfig& cfg_;
  const RunOptions& opts_;
  StoreLayout store_;
  PromptSet prompts_;
  Providers providers_;
  std::string nli_id_;
  json counts_;
  std::vector<std::string> ran_;
  std::map<std::string, double> seconds_;
};

}  // namespace

std::uint64_t slot_seed(std::uint64_t seed, std::size_t slot) {
  // splitmix64 finalizer over (seed, slot).
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(slot) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<GoldItem> labeled_gold(const PipelineConfig& cfg, const StoreLayout& store) {
  auto gold = load_gold(store);
  std::set<std::string> docs;
  for (const auto& g : gold) {
    docs.insert(g.doc1);
    docs.insert(g.doc2);
  }
  AnnotationService service(std::move(gold), store.annotations(), cfg.annotation, docs);
  return service.consolidated();
}

RunManifest run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  const auto& requested = opts.stages ? *opts.stages : cfg.stages;
  for (const auto& s : requested) {
    if (std::find(all_stages().begin(), all_stages().end(), s) == all_stages().end()) {
      throw ConfigError("unknown stage '" + s + "'");
    }
  }
  Run run(cfg, opts);
  for (const auto& s : all_stages()) {
    if (std::find(requested.begin(), requested.end(), s) != requested.end()) run.stage(s);
  }
  return run.finish();
}

}  // namespace contraforge
