#pragma once

#include <optional>
#include <string>
#include <vector>

namespace contraforge {

/// labels[a][i]: annotator a's label for item i, nullopt when missing.
using LabelMatrix = std::vector<std::vector<std::optional<int>>>;

/// Share of items labeled by >= 2 annotators on which all their labels are
/// equal. Throws PreconditionError when no item is co-labeled.
double percent_agreement(const LabelMatrix& labels);

/// Cohen's kappa over items both annotators labeled. nullopt when the
/// chance agreement p_e is 1. Throws PreconditionError without overlap.
std::optional<double> cohen_kappa(const std::vector<std::optional<int>>& a,
                                  const std::vector<std::optional<int>>& b);

/// Krippendorff's alpha, nominal metric, from the coincidence matrix; items
/// with fewer than two labels are ignored. nullopt when expected
/// disagreement is zero (a single category in use). Throws
/// PreconditionError when no item is co-labeled.
std::optional<double> kripp_alpha(const LabelMatrix& labels);

struct AgreementReport {
  double percent_agreement = 0.0;
  std::optional<double> cohen_kappa;
  std::optional<double> kripp_alpha;
  std::size_t n_items = 0;       // co-labeled items
  std::size_t n_annotators = 0;  // annotators with at least one label
  // Why a statistic is absent ("" when all are present).
  std::string reason;
};

/// All statistics at once. Annotators without labels are dropped first.
/// Throws PreconditionError when no item is co-labeled.
AgreementReport agreement_report(const LabelMatrix& labels);

}  // namespace contraforge
