#include "halluzig/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "halluzig/error.hpp"

namespace halluzig {
namespace {

struct ClassCounts {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels, bool need_both) {
  if (scores.size() != labels.size()) {
    throw DataError(ErrorCode::dimension_mismatch, std::to_string(scores.size()) + " scores for " +
                                                       std::to_string(labels.size()) + " labels");
  }
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++c.pos;
    } else if (labels[i] == 0) {
      ++c.neg;
    } else {
      throw DataError(ErrorCode::invalid_argument, "labels must be 0 or 1");
    }
    if (std::isnan(scores[i])) throw DataError(ErrorCode::non_finite_entry, "score is NaN");
  }
  if (need_both && (c.pos == 0 || c.neg == 0)) {
    throw DataError(ErrorCode::single_class, "metric needs both classes present");
  }
  return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace

std::uint64_t auroc_doubled_wins(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, true);
  const auto order = order_by_score(scores);
  std::uint64_t doubled = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos_here = 0;
    std::uint64_t neg_here = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos_here : neg_here) += 1;
      ++j;
    }
    doubled += 2 * pos_here * neg_below + pos_here * neg_here;
    neg_below += neg_here;
    i = j;
  }
  return doubled;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  const auto c = check_inputs(scores, labels, true);
  return static_cast<double>(auroc_doubled_wins(scores, labels)) /
         static_cast<double>(2 * c.pos * c.neg);
}

double tpr_at_fpr(std::span<const double> scores, std::span<const int> labels, double fpr_cap) {
  const auto c = check_inputs(scores, labels, true);
  if (!(fpr_cap >= 0.0 && fpr_cap <= 1.0)) throw UsageError("fpr_cap must lie in [0, 1]");
  const auto max_fp = static_cast<std::uint64_t>(std::floor(fpr_cap * static_cast<double>(c.neg) + 1e-9));

  auto order = order_by_score(scores);
  std::reverse(order.begin(), order.end());
  // Threshold +inf admits nothing: TPR 0 at FPR 0.
  std::uint64_t best_tp = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    if (fp > max_fp) break;
    best_tp = std::max(best_tp, tp);
    i = j;
  }
  return static_cast<double>(best_tp) / static_cast<double>(c.pos);
}

F1Accuracy f1_accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels, false);
  if (scores.empty()) throw DataError(ErrorCode::invalid_argument, "f1_accuracy needs at least one sample");
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? tp : fn) += 1;
    } else {
      (predicted ? fp : tn) += 1;
    }
  }
  F1Accuracy out;
  out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return out;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
  EvalReport r;
  r.auroc = auroc(scores, labels);
  r.tpr_at_5_fpr = tpr_at_fpr(scores, labels, 0.05);
  const auto fa = f1_accuracy(scores, labels, threshold);
  r.f1 = fa.f1;
  r.accuracy = fa.accuracy;
  r.n_test = scores.size();
  r.threshold = threshold;
  return r;
}

}  // namespace halluzig
