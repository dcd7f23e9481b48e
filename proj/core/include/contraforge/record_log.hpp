#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "contraforge/corpus.hpp"

namespace contraforge {

// JSON mapping of the corpus types. Field names follow the struct members;
// absent optionals are omitted.
void to_json(nlohmann::json& j, const OrganizationProfile& v);
void from_json(const nlohmann::json& j, OrganizationProfile& v);
void to_json(nlohmann::json& j, const DomainTree& v);
void from_json(const nlohmann::json& j, DomainTree& v);
void to_json(nlohmann::json& j, const DocumentMetadata& v);
void from_json(const nlohmann::json& j, DocumentMetadata& v);
void to_json(nlohmann::json& j, const Document& v);
void from_json(const nlohmann::json& j, Document& v);
void to_json(nlohmann::json& j, const ContradictionRecord& v);
void from_json(const nlohmann::json& j, ContradictionRecord& v);
void to_json(nlohmann::json& j, const CandidatePair& v);
void from_json(const nlohmann::json& j, CandidatePair& v);
void to_json(nlohmann::json& j, const AnnotationRecord& v);
void from_json(const nlohmann::json& j, AnnotationRecord& v);
void to_json(nlohmann::json& j, const GoldItem& v);
void from_json(const nlohmann::json& j, GoldItem& v);

using RecordValue =
    std::variant<Document, ContradictionRecord, CandidatePair, AnnotationRecord, GoldItem>;

/// One line of a record log: a typed value plus any fields this version
/// does not know about, which are written back unchanged.
struct Record {
  RecordValue value;
  nlohmann::json extra = nlohmann::json::object();

  Record() = default;
  template <typename T>
    requires std::is_constructible_v<RecordValue, T>
  Record(T v) : value(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  // The `kind` discriminator written on each line.
  std::string_view kind() const;
};

nlohmann::json record_to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);

/// Append-only, line-delimited record file.
///
/// Appends are serialized by an internal mutex and flushed per record; a
/// RecordLog is safe to share between threads. Loading is a free function
/// so readers need no log object.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path path);

  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  /// Appends one record and returns its 0-based position in the file.
  std::size_t append(const Record& record);

  const std::filesystem::path& path() const { return path_; }
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::size_t count_ = 0;
};

/// Reads every record in insertion order. A missing file is an error; an
/// empty file yields no records. Malformed lines raise StoreError carrying
/// the 1-based line number.
std::vector<Record> load_records(const std::filesystem::path& path);

/// Loads and keeps only values of type T, in order.
template <typename T>
std::vector<T> load_values(const std::filesystem::path& path) {
  std::vector<T> out;
  for (auto& r : load_records(path)) {
    if (auto* v = std::get_if<T>(&r.value)) out.push_back(std::move(*v));
  }
  return out;
}

/// Writes all records to `path` via a temporary file and rename, so readers
/// never observe a partially written file.
void write_records_atomic(const std::filesystem::path& path, const std::vector<Record>& records);

template <typename T>
void write_values_atomic(const std::filesystem::path& path, const std::vector<T>& values) {
  std::vector<Record> records;
  records.reserve(values.size());
  for (const auto& v : values) records.emplace_back(v);
  write_records_atomic(path, records);
}

}  // namespace contraforge
