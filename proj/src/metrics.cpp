#include "qka/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qka/errors.hpp"

namespace qka {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InvalidArgument("scores/labels size mismatch");
    if (scores.empty()) throw InvalidArgument("empty score vector");

    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    for (int y : labels) {
        if (y == 1) ++n_pos;
        else if (y == -1) ++n_neg;
        else throw InvalidArgument("labels must be +1 or -1");
    }
    if (n_pos == 0 || n_neg == 0) throw InvalidArgument("roc_auc needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups, then Mann-Whitney U from the positive
    // rank sum.
    std::vector<double> rank(scores.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg_rank;
        i = j + 1;
    }

    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        if (labels[k] == 1) pos_rank_sum += rank[k];
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double f1_score(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw InvalidArgument("predictions/labels size mismatch");
    }
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred_pos = predictions[i] == 1;
        const bool true_pos = labels[i] == 1;
        if (pred_pos && true_pos) ++tp;
        else if (pred_pos && !true_pos) ++fp;
        else if (!pred_pos && true_pos) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(tp) / denom;
}

double mean(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("mean of empty span");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) throw InvalidArgument("sample_std needs >= 2 values");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<double> min_max_normalized(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    if (out.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(out.begin(), out.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    for (double& v : out) v = (v - lo) / (hi - lo);
    return out;
}

} // namespace qka
