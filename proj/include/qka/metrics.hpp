#pragma once

#include <span>
#include <vector>

namespace qka {

// Mann-Whitney: probability that a random positive outranks a random negative,
// ties counted one half. Throws on single-class labels.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// F1 of the +1 class; 0 when precision + recall is 0.
double f1_score(std::span<const int> predictions, std::span<const int> labels);

double mean(std::span<const double> values);
double sample_std(std::span<const double> values); // n-1 denominator

// (v - min) / (max - min); all zeros for a constant series.
std::vector<double> min_max_normalized(std::span<const double> values);

} // namespace qka
