#pragma once

// Binary classification metrics. Label 1 (hallucinated) is the positive
// class throughout.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace halluzig {

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed from exact integer pair counts.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Twice the Mann-Whitney statistic: 2 * #(pos > neg) + #(pos == neg).
/// auroc() equals this divided by 2 * positives * negatives.
std::uint64_t auroc_doubled_wins(std::span<const double> scores, std::span<const int> labels);

/// Largest TPR over thresholds (distinct scores and +inf) whose FPR does not
/// exceed fpr_cap; a sample is predicted positive when score >= threshold.
double tpr_at_fpr(std::span<const double> scores, std::span<const int> labels, double fpr_cap = 0.05);

struct F1Accuracy {
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Prediction is score >= threshold. F1 is 0 when precision + recall is 0.
F1Accuracy f1_accuracy(std::span<const double> scores, std::span<const int> labels,
                       double threshold = 0.5);

struct EvalReport {
  double auroc = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double tpr_at_5_fpr = 0.0;
  std::size_t n_test = 0;
  double threshold = 0.5;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold = 0.5);

}  // namespace halluzig
