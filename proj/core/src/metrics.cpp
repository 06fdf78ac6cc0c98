#include "fedforest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedforest/error.hpp"

namespace fedforest {

namespace {

struct ScoreGroup {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

void validate(const ScoredLabels& s) {
  if (s.scores.size() != s.labels.size())
    throw DataError("scores and labels differ in length");
  if (s.scores.empty()) throw DataError("no scored samples");
  for (double v : s.scores)
    if (std::isnan(v)) throw DataError("NaN score");
  for (auto y : s.labels)
    if (y > 1) throw DataError("labels must be 0 or 1");
}

/// Samples grouped by distinct score, highest score first.
std::vector<ScoreGroup> groups_descending(const ScoredLabels& s) {
  std::vector<std::size_t> order(s.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });
  std::vector<ScoreGroup> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || s.scores[order[k]] != s.scores[order[k - 1]]) groups.emplace_back();
    (s.labels[order[k]] ? groups.back().positives : groups.back().negatives) += 1;
  }
  return groups;
}

}  // namespace

double roc_auc(const ScoredLabels& s) {
  validate(s);
  std::uint64_t positives = 0, negatives = 0;
  for (auto y : s.labels) (y ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0) throw DataError("ROC AUC needs both classes");

  // Twice the trapezoid area in units of one (positive, negative) cell.
  std::uint64_t twice_area = 0;
  std::uint64_t tp = 0;
  for (const auto& g : groups_descending(s)) {
    twice_area += g.negatives * (2 * tp + g.positives);
    tp += g.positives;
  }
  return static_cast<double>(twice_area) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double pr_auc(const ScoredLabels& s) {
  validate(s);
  const auto positives = static_cast<std::uint64_t>(std::count(s.labels.begin(), s.labels.end(), 1));
  if (positives == 0) throw DataError("PR AUC needs at least one positive");

  double area = 0.0;
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : groups_descending(s)) {
    tp += g.positives;
    fp += g.negatives;
    if (g.positives == 0) continue;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += precision * static_cast<double>(g.positives) / static_cast<double>(positives);
  }
  return area;
}

double mcc(const ConfusionMatrix& c) {
  const auto tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const auto fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  const double d1 = tp + fp, d2 = tp + fn, d3 = tn + fp, d4 = tn + fn;
  if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
}

ConfusionMatrix confusion(const ScoredLabels& s, double threshold) {
  validate(s);
  ConfusionMatrix c;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    const bool predicted = s.scores[i] >= threshold;
    if (s.labels[i])
      (predicted ? c.tp : c.fn) += 1;
    else
      (predicted ? c.fp : c.tn) += 1;
  }
  return c;
}

}  // namespace fedforest
