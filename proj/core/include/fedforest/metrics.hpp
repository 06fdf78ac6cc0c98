#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fedforest {

/// Scores with their true binary labels.
struct ScoredLabels {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Trapezoidal area under the ROC curve over all distinct thresholds; equal
/// to the Mann-Whitney pair statistic with ties counted 1/2. The area is
/// accumulated in integers, so the result is exact up to the final division.
/// Throws DataError unless both classes are present.
double roc_auc(const ScoredLabels& s);

/// Non-interpolated (step-wise) area under the precision-recall curve:
/// sum over distinct descending thresholds of precision x recall increment.
/// Throws DataError when there are no positives.
double pr_auc(const ScoredLabels& s);

/// Matthews correlation coefficient; 0 when any marginal is empty.
double mcc(const ConfusionMatrix& c);

/// score >= threshold counts as a positive prediction.
ConfusionMatrix confusion(const ScoredLabels& s, double threshold = 0.5);

}  // namespace fedforest
