#include "contraforge/record_log.hpp"

#include <fstream>
#include <set>

#include "contraforge/error.hpp"

namespace contraforge {

using nlohmann::json;

namespace {

template <typename T>
void put_opt(json& j, const char* name, const std::optional<T>& v) {
  if (v) j[name] = *v;
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename Enum, typename Parser>
Enum parse_enum(const json& j, const char* name, Parser parse) {
  const auto text = j.at(name).get<std::string>();
  auto v = parse(text);
  if (!v) throw std::invalid_argument(std::string("bad value '") + text + "' for " + name);
  return *v;
}

json sources_to_json(const std::set<Source>& s) {
  json arr = json::array();
  for (auto src : s) arr.push_back(std::string(to_string(src)));
  return arr;
}

std::set<Source> sources_from_json(const json& j, const char* name) {
  std::set<Source> out;
  auto it = j.find(name);
  if (it == j.end()) return out;
  for (const auto& e : *it) {
    auto s = parse_source(e.get<std::string>());
    if (!s) throw std::invalid_argument("bad source '" + e.get<std::string>() + "'");
    out.insert(*s);
  }
  return out;
}

json ctype_to_json(const std::optional<ContradictionType>& t) {
  return t ? json(std::string(to_string(*t))) : json("Unspecified");
}

std::optional<ContradictionType> ctype_from_json(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  const auto text = it->get<std::string>();
  if (text == "Unspecified") return std::nullopt;
  auto t = parse_contradiction_type(text);
  if (!t) throw std::invalid_argument("bad ctype '" + text + "'");
  return t;
}

struct KindInfo {
  std::string_view kind;
  std::set<std::string> fields;
};

const KindInfo& kind_info(std::size_t index) {
  static const KindInfo kInfo[] = {
      {"document",
       {"id", "metadata", "domain", "subdomain", "body", "ppl_base", "ppl_final",
        "people_meta", "doc_meta", "gen_attempts", "trailer_warning"}},
      {"contradiction",
       {"id", "mode", "ctype", "target_statement", "contradiction_statement", "source_doc",
        "host_doc", "delta_rel"}},
      {"candidate_pair",
       {"key", "mode", "doc1", "doc2", "doc1_chunk", "doc2_chunk", "similarity", "nli_label",
        "p_nli", "forwarded", "llm_label", "p_llm", "llm_reasoning", "s_hybrid",
        "hybrid_label", "source", "error"}},
      {"annotation",
       {"annotator", "subject", "annotation_kind", "label", "likert", "detected_contradiction",
        "timestamp"}},
      {"gold_item",
       {"key", "mode", "doc1", "doc2", "doc1_chunk", "doc2_chunk", "context1", "context2",
        "sources", "human_label", "adjudicated", "ctype", "aliases", "unresolved"}},
  };
  return kInfo[index];
}

}  // namespace

void to_json(json& j, const OrganizationProfile& v) {
  j = json{{"name", v.name}, {"description", v.description}, {"locations", v.locations}};
}

void from_json(const json& j, OrganizationProfile& v) {
  v.name = j.at("name").get<std::string>();
  v.description = j.at("description").get<std::string>();
  v.locations = j.value("locations", std::vector<std::string>{});
}

void to_json(json& j, const DomainTree& v) {
  j = json::array();
  for (const auto& d : v.domains) j.push_back({{"name", d.name}, {"subdomains", d.subdomains}});
}

void from_json(const json& j, DomainTree& v) {
  v.domains.clear();
  const json& arr = j.is_object() ? j.at("domains") : j;
  for (const auto& d : arr) {
    v.domains.push_back({d.at("name").get<std::string>(),
                         d.value("subdomains", std::vector<std::string>{})});
  }
}

void to_json(json& j, const DocumentMetadata& v) {
  j = json{{"title", v.title},
           {"topic", v.topic},
           {"date", format_date(v.date)},
           {"department", v.department},
           {"location", v.location},
           {"doc_type", v.doc_type},
           {"authority_level", v.authority_level}};
}

void from_json(const json& j, DocumentMetadata& v) {
  v.title = j.at("title").get<std::string>();
  v.topic = j.at("topic").get<std::string>();
  const auto date_text = j.at("date").get<std::string>();
  auto d = parse_date(date_text);
  if (!d) throw std::invalid_argument("bad date '" + date_text + "'");
  v.date = *d;
  v.department = j.at("department").get<std::string>();
  v.location = j.at("location").get<std::string>();
  v.doc_type = j.at("doc_type").get<std::string>();
  v.authority_level = j.at("authority_level").get<std::string>();
}

void to_json(json& j, const Document& v) {
  j = json{{"id", v.id},
           {"metadata", v.metadata},
           {"domain", v.domain},
           {"subdomain", v.subdomain},
           {"body", v.body},
           {"ppl_base", v.ppl_base},
           {"people_meta", v.people_meta},
           {"doc_meta", v.doc_meta},
           {"gen_attempts", v.gen_attempts},
           {"trailer_warning", v.trailer_warning}};
  put_opt(j, "ppl_final", v.ppl_final);
}

void from_json(const json& j, Document& v) {
  v.id = j.at("id").get<std::string>();
  v.metadata = j.at("metadata").get<DocumentMetadata>();
  v.domain = j.at("domain").get<std::string>();
  v.subdomain = j.at("subdomain").get<std::string>();
  v.body = j.at("body").get<std::string>();
  v.ppl_base = j.value("ppl_base", 0.0);
  v.ppl_final = get_opt<double>(j, "ppl_final");
  v.people_meta = j.value("people_meta", std::vector<std::string>{});
  v.doc_meta = j.value("doc_meta", std::vector<std::string>{});
  v.gen_attempts = j.value("gen_attempts", 1);
  v.trailer_warning = j.value("trailer_warning", false);
}

void to_json(json& j, const ContradictionRecord& v) {
  j = json{{"id", v.id},
           {"mode", to_string(v.mode)},
           {"ctype", ctype_to_json(v.ctype)},
           {"target_statement", v.target_statement},
           {"contradiction_statement", v.contradiction_statement},
           {"source_doc", v.source_doc},
           {"host_doc", v.host_doc},
           {"delta_rel", v.delta_rel}};
}

void from_json(const json& j, ContradictionRecord& v) {
  v.id = j.at("id").get<std::string>();
  v.mode = parse_enum<Mode>(j, "mode", parse_mode);
  v.ctype = ctype_from_json(j, "ctype");
  v.target_statement = j.at("target_statement").get<std::string>();
  v.contradiction_statement = j.at("contradiction_statement").get<std::string>();
  v.source_doc = j.at("source_doc").get<std::string>();
  v.host_doc = j.at("host_doc").get<std::string>();
  v.delta_rel = j.value("delta_rel", 0.0);
}

void to_json(json& j, const CandidatePair& v) {
  j = json{{"key", v.key},
           {"mode", to_string(v.mode)},
           {"doc1", v.doc1},
           {"doc2", v.doc2},
           {"doc1_chunk", v.doc1_chunk},
           {"doc2_chunk", v.doc2_chunk},
           {"similarity", v.similarity},
           {"forwarded", v.forwarded},
           {"source", sources_to_json(v.source)}};
  if (v.nli_label) j["nli_label"] = to_string(*v.nli_label);
  put_opt(j, "p_nli", v.p_nli);
  put_opt(j, "llm_label", v.llm_label);
  put_opt(j, "p_llm", v.p_llm);
  put_opt(j, "llm_reasoning", v.llm_reasoning);
  put_opt(j, "s_hybrid", v.s_hybrid);
  put_opt(j, "hybrid_label", v.hybrid_label);
  put_opt(j, "error", v.error);
}

void from_json(const json& j, CandidatePair& v) {
  v.key = j.at("key").get<std::string>();
  v.mode = parse_enum<Mode>(j, "mode", parse_mode);
  v.doc1 = j.at("doc1").get<std::string>();
  v.doc2 = j.at("doc2").get<std::string>();
  v.doc1_chunk = j.at("doc1_chunk").get<std::string>();
  v.doc2_chunk = j.at("doc2_chunk").get<std::string>();
  v.similarity = j.at("similarity").get<double>();
  v.nli_label.reset();
  if (j.contains("nli_label") && !j["nli_label"].is_null()) {
    v.nli_label = parse_enum<NliLabel>(j, "nli_label", parse_nli_label);
  }
  v.p_nli = get_opt<double>(j, "p_nli");
  v.forwarded = j.value("forwarded", false);
  v.llm_label = get_opt<int>(j, "llm_label");
  v.p_llm = get_opt<double>(j, "p_llm");
  v.llm_reasoning = get_opt<std::string>(j, "llm_reasoning");
  v.s_hybrid = get_opt<double>(j, "s_hybrid");
  v.hybrid_label = get_opt<int>(j, "hybrid_label");
  v.source = sources_from_json(j, "source");
  v.error = get_opt<std::string>(j, "error");
}

void to_json(json& j, const AnnotationRecord& v) {
  // "kind" is the record discriminator, so the annotation kind is "annotation_kind".
  j = json{{"annotator", v.annotator},
           {"subject", v.subject},
           {"annotation_kind", to_string(v.kind)},
           {"timestamp", format_timestamp(v.timestamp)}};
  put_opt(j, "label", v.label);
  if (v.likert) {
    j["likert"] = {{"fluency", v.likert->fluency},
                   {"specificity", v.likert->specificity},
                   {"coherence", v.likert->coherence},
                   {"legitimacy", v.likert->legitimacy}};
  }
  put_opt(j, "detected_contradiction", v.detected_contradiction);
}

void from_json(const json& j, AnnotationRecord& v) {
  v.annotator = j.at("annotator").get<std::string>();
  v.subject = j.at("subject").get<std::string>();
  v.kind = parse_enum<AnnotationKind>(j, "annotation_kind", parse_annotation_kind);
  v.label = get_opt<int>(j, "label");
  v.likert.reset();
  if (j.contains("likert") && !j["likert"].is_null()) {
    const auto& l = j["likert"];
    v.likert = LikertScores{l.at("fluency").get<int>(), l.at("specificity").get<int>(),
                            l.at("coherence").get<int>(), l.at("legitimacy").get<int>()};
  }
  v.detected_contradiction = get_opt<bool>(j, "detected_contradiction");
  const auto ts = j.at("timestamp").get<std::string>();
  auto t = parse_timestamp(ts);
  if (!t) throw std::invalid_argument("bad timestamp '" + ts + "'");
  v.timestamp = *t;
}

void to_json(json& j, const GoldItem& v) {
  j = json{{"key", v.key},
           {"mode", to_string(v.mode)},
           {"doc1", v.doc1},
           {"doc2", v.doc2},
           {"doc1_chunk", v.doc1_chunk},
           {"doc2_chunk", v.doc2_chunk},
           {"context1", v.context1},
           {"context2", v.context2},
           {"sources", sources_to_json(v.sources)},
           {"adjudicated", v.adjudicated},
           {"aliases", v.aliases},
           {"unresolved", v.unresolved}};
  put_opt(j, "human_label", v.human_label);
  if (v.ctype) j["ctype"] = to_string(*v.ctype);
}

void from_json(const json& j, GoldItem& v) {
  v.key = j.at("key").get<std::string>();
  v.mode = parse_enum<Mode>(j, "mode", parse_mode);
  v.doc1 = j.value("doc1", std::string{});
  v.doc2 = j.value("doc2", std::string{});
  v.doc1_chunk = j.at("doc1_chunk").get<std::string>();
  v.doc2_chunk = j.at("doc2_chunk").get<std::string>();
  v.context1 = j.value("context1", std::string{});
  v.context2 = j.value("context2", std::string{});
  v.sources = sources_from_json(j, "sources");
  v.human_label = get_opt<int>(j, "human_label");
  v.adjudicated = j.value("adjudicated", false);
  v.ctype = ctype_from_json(j, "ctype");
  v.aliases = j.value("aliases", std::vector<std::string>{});
  v.unresolved = j.value("unresolved", false);
}

std::string_view Record::kind() const { return kind_info(value.index()).kind; }

json record_to_json(const Record& r) {
  json j;
  std::visit([&](const auto& v) { j = v; }, r.value);
  for (auto it = r.extra.begin(); it != r.extra.end(); ++it) {
    if (!j.contains(it.key())) j[it.key()] = it.value();
  }
  j["kind"] = r.kind();
  return j;
}

Record record_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  Record r;
  std::size_t index = 0;
  if (kind == "document") {
    r.value = j.get<Document>();
    index = 0;
  } else if (kind == "contradiction") {
    r.value = j.get<ContradictionRecord>();
    index = 1;
  } else if (kind == "candidate_pair") {
    r.value = j.get<CandidatePair>();
    index = 2;
  } else if (kind == "annotation") {
    r.value = j.get<AnnotationRecord>();
    index = 3;
  } else if (kind == "gold_item") {
    r.value = j.get<GoldItem>();
    index = 4;
  } else {
    throw std::invalid_argument("unknown record kind '" + kind + "'");
  }
  const auto& known = kind_info(index).fields;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "kind" && !known.contains(it.key())) r.extra[it.key()] = it.value();
  }
  return r;
}

RecordLog::RecordLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (std::filesystem::exists(path_)) {
    count_ = load_records(path_).size();
  } else {
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw StoreError("cannot create record log " + path_.string());
  }
}

std::size_t RecordLog::append(const Record& record) {
  const std::string line = record_to_json(record).dump();
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw StoreError("cannot open record log " + path_.string() + " for append");
  out << line << '\n';
  out.flush();
  if (!out) throw StoreError("write to record log " + path_.string() + " failed");
  return count_++;
}

std::size_t RecordLog::size() const {
  std::lock_guard lock(mu_);
  return count_;
}

std::vector<Record> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open record log " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw StoreError(path.string() + ": malformed record: " + e.what(), lineno);
    }
  }
  return out;
}

void write_records_atomic(const std::filesystem::path& path, const std::vector<Record>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw StoreError("cannot write " + tmp.string());
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw StoreError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace contraforge
