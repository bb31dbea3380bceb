#include <doctest.h>

#include <cmath>

#include "qka/errors.hpp"
#include "qka/metrics.hpp"
#include "qka/rng.hpp"

using namespace qka;

TEST_SUITE("metrics") {

TEST_CASE("roc auc on ordered, inverted and constant scores") {
    const std::vector<int> labels{-1, -1, 1, 1};
    CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, labels) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, labels) == 0.0);
    CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels) == 0.5);
}

TEST_CASE("roc auc handles partial ties via average ranks") {
    const std::vector<int> labels{1, -1, -1, 1};
    const std::vector<double> scores{0.7, 0.7, 0.1, 0.9};
    // pairs: (s0>s2), (s0~s1 tie: 1/2), (s3>s1), (s3>s2) -> 3.5/4
    CHECK(roc_auc(scores, labels) == doctest::Approx(0.875));
}

TEST_CASE("roc auc rejects single-class input") {
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
                    InvalidArgument);
}

TEST_CASE("roc auc complement identity for tie-free scores") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + rng.below(20);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.normal();
            labels[i] = rng.below(2) ? 1 : -1;
        }
        labels[0] = 1;
        labels[1] = -1;
        std::vector<double> negated(n);
        for (std::size_t i = 0; i < n; ++i) negated[i] = -scores[i];
        CHECK(roc_auc(scores, labels) + roc_auc(negated, labels) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("f1 score cases") {
    CHECK(f1_score(std::vector<int>{1, -1, 1}, std::vector<int>{1, -1, 1}) == 1.0);
    CHECK(f1_score(std::vector<int>{-1, -1, -1}, std::vector<int>{1, -1, 1}) == 0.0);
    // TP=2, FP=1, FN=1
    CHECK(f1_score(std::vector<int>{1, 1, 1, -1}, std::vector<int>{1, 1, -1, 1}) ==
          doctest::Approx(2.0 / 3.0));
}

TEST_CASE("min-max normalization") {
    const auto out = min_max_normalized(std::vector<double>{3.0, 1.0, 5.0});
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 1.0);

    const auto flat = min_max_normalized(std::vector<double>{2.0, 2.0});
    CHECK(flat[0] == 0.0);
    CHECK(flat[1] == 0.0);
}

TEST_CASE("mean and sample std") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(v) == 2.5);
    CHECK(sample_std(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK_THROWS_AS(sample_std(std::vector<double>{1.0}), InvalidArgument);
}

} // TEST_SUITE
