#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contraforge/corpus.hpp"

namespace contraforge {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// An exact non-negative rational.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Rounded half-up to `decimals` places, computed on the integers.
  double rounded(int decimals = 3) const;
};

/// Every metric is absent when its denominator is zero.
struct Metrics {
  std::optional<Ratio> accuracy;
  std::optional<Ratio> precision;
  std::optional<Ratio> recall;
  std::optional<Ratio> f1;
};

/// Keys of `gold` without a prediction count as predicted 0; predictions
/// for keys outside `gold` are ignored.
ConfusionMatrix confusion(const std::map<std::string, int>& predictions,
                          const std::map<std::string, int>& gold);

/// Throws PreconditionError for an empty matrix.
Metrics metrics(const ConfusionMatrix& m);

/// Half-up rounding of a double (values within 1e-9 of a tie round up).
double round_half_up(double x, int decimals = 3);

enum class Detector { Nli, Llm, Hybrid };
std::string_view to_string(Detector d);

struct TypeRecall {
  std::size_t injected = 0;
  std::size_t recovered = 0;
  std::optional<Ratio> recall;
};

struct EvalReport {
  Detector detector = Detector::Hybrid;
  Mode mode = Mode::Self;
  ConfusionMatrix matrix;
  Metrics metrics;
  std::map<ContradictionType, TypeRecall> per_type;
};

/// Binary verdict of one detector on one mined pair.
int detector_label(const CandidatePair& p, Detector d);

/// Maps each gold item (by key or alias) to the detector's prediction;
/// the maximum wins when several pairs map to one item. Items the detector
/// never surfaced are absent (read as 0).
std::map<std::string, int> detector_predictions(const std::vector<CandidatePair>& pairs,
                                                Detector d, const std::vector<GoldItem>& gold);

/// One report per detector and per mode present in `gold`. Throws
/// ValidationError listing the keys of unlabeled gold items.
std::vector<EvalReport> evaluate_detectors(const std::vector<std::vector<CandidatePair>>& mined,
                                           const std::vector<GoldItem>& gold);

nlohmann::json to_json(const EvalReport& r);
/// Aligned text table: mode, detector, A, P, R, F1 in percent.
std::string render_table(const std::vector<EvalReport>& reports);

}  // namespace contraforge
