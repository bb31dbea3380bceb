#include <doctest.h>

#include <cmath>

#include "qka/rng.hpp"
#include "qka/svm.hpp"
#include "support/qp_oracle.hpp"

using namespace qka;
namespace oracle = qka::testing;

namespace {

Matrix psd_gram(std::size_t n, std::size_t rank, Rng& rng) {
    Matrix g(n, rank);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < rank; ++j) g(i, j) = rng.normal();
    }
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < rank; ++c) acc += g(i, c) * g(j, c);
            k(i, j) = acc;
        }
    }
    return k;
}

std::vector<int> mixed_labels(std::size_t n, Rng& rng) {
    std::vector<int> y(n);
    for (;;) {
        bool pos = false;
        bool neg = false;
        for (auto& yi : y) {
            yi = rng.below(2) ? 1 : -1;
            (yi == 1 ? pos : neg) = true;
        }
        if (pos && neg) return y;
    }
}

} // namespace

TEST_SUITE("svm") {

TEST_CASE("identity kernel, two points") {
    Matrix k(2, 2);
    k(0, 0) = 1.0;
    k(1, 1) = 1.0;
    const std::vector<int> y{1, -1};
    SvmOptions opts;
    opts.c = 10.0;
    const auto sol = solve_dual(k, y, opts);
    CHECK(sol.alphas[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.alphas[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.dual_objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(sol.bias) <= 1e-9);

    // decision score on a test row [1, 0]: alpha_0 y_0 * 1 + bias
    Matrix cross(1, 2);
    cross(0, 0) = 1.0;
    const auto scores = decision_scores(sol, cross);
    CHECK(scores[0] == doctest::Approx(1.0 + sol.bias).epsilon(1e-9));
}

TEST_CASE("identical points force equal multipliers at the box") {
    Matrix k(2, 2);
    k(0, 0) = k(0, 1) = k(1, 0) = k(1, 1) = 1.0;
    const std::vector<int> y{1, -1};
    SvmOptions opts;
    opts.c = 1.0;
    const auto sol = solve_dual(k, y, opts);
    CHECK(sol.alphas[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.alphas[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.dual_objective == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("six-point instance matches both oracles (frozen)") {
    Rng rng(12345);
    const auto k = psd_gram(6, 4, rng);
    const std::vector<int> y{1, -1, 1, -1, 1, -1};
    SvmOptions opts;
    opts.c = 1.0;
    opts.tol = 1e-9;
    const auto sol = solve_dual(k, y, opts);
    CHECK(sol.dual_objective == doctest::Approx(2.19406301450551).epsilon(1e-8));

    const auto pg = oracle::qp_oracle_projected_gradient(k, y, 1.0);
    const auto as = oracle::qp_oracle_active_set(k, y, 1.0);
    CHECK(std::abs(sol.dual_objective - pg.objective) <= 1e-6);
    CHECK(std::abs(sol.dual_objective - as.objective) <= 1e-6);
}

TEST_CASE("eight-point alignment loss equals the oracle objective (frozen)") {
    Rng rng(777);
    const auto k = psd_gram(8, 4, rng);
    const std::vector<int> y{1, 1, -1, 1, -1, -1, 1, -1};
    SvmOptions opts;
    opts.c = 1.0;
    opts.tol = 1e-9;
    const double loss = alignment_loss(k, y, opts);
    CHECK(loss == doctest::Approx(2.9197913065387).epsilon(1e-8));
    CHECK(loss == solve_dual(k, y, opts).dual_objective);
}

TEST_CASE("a positive support vector scores positive on its own kernel row") {
    Rng rng(12345);
    const auto k = psd_gram(6, 4, rng);
    const std::vector<int> y{1, -1, 1, -1, 1, -1};
    SvmOptions opts;
    opts.c = 1.0;
    opts.tol = 1e-9;
    const auto sol = solve_dual(k, y, opts);

    bool found = false;
    for (std::size_t sv : sol.support_indices) {
        if (y[sv] != 1) continue;
        found = true;
        Matrix cross(1, 6);
        for (std::size_t j = 0; j < 6; ++j) cross(0, j) = k(sv, j);
        const auto scores = decision_scores(sol, cross);
        CHECK(scores[0] > 0.0);
    }
    CHECK(found);
}

TEST_CASE("random instances agree with the oracles and stay feasible") {
    Rng rng(2718);
    const double cs[] = {0.5, 1.0, 10.0};
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + rng.below(6);
        auto k = psd_gram(n, 2 + rng.below(3), rng);
        const auto y = mixed_labels(n, rng);
        const double c = cs[rng.below(3)];

        SvmOptions opts;
        opts.c = c;
        opts.tol = 1e-9;
        const auto sol = solve_dual(k, y, opts);

        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(sol.alphas[i] >= 0.0);
            CHECK(sol.alphas[i] <= c);
            dot += sol.alphas[i] * y[i];
        }
        CHECK(std::abs(dot) <= 1e-10);
        CHECK(sol.kkt_violation <= opts.tol);

        const auto as = oracle::qp_oracle_active_set(k, y, c);
        const auto pg = oracle::qp_oracle_projected_gradient(k, y, c);
        CHECK(std::abs(sol.dual_objective - as.objective) <= 1e-6);
        CHECK(std::abs(pg.objective - as.objective) <= 1e-6);
    }
}

TEST_CASE("every iterate satisfies the box and equality constraints") {
    Rng rng(606);
    const auto k = psd_gram(8, 3, rng);
    const auto y = mixed_labels(8, rng);
    // capping the solver at t steps exposes iterate t as a solution
    for (std::size_t t = 1; t <= 40; ++t) {
        SvmOptions opts;
        opts.c = 1.0;
        opts.max_iterations = t;
        const auto sol = solve_dual(k, y, opts);
        double dot = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(sol.alphas[i] >= 0.0);
            CHECK(sol.alphas[i] <= 1.0);
            dot += sol.alphas[i] * y[i];
        }
        CHECK(std::abs(dot) <= 1e-10);
    }
}

TEST_CASE("label flip keeps alphas, negates bias and scores") {
    Rng rng(31);
    const auto k = psd_gram(7, 3, rng);
    auto y = mixed_labels(7, rng);
    SvmOptions opts;
    opts.c = 2.0;
    const auto sol = solve_dual(k, y, opts);

    std::vector<int> flipped(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) flipped[i] = -y[i];
    const auto sol2 = solve_dual(k, flipped, opts);

    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(sol.alphas[i] - sol2.alphas[i]) <= 1e-12);
    }
    CHECK(std::abs(sol.bias + sol2.bias) <= 1e-12);

    Matrix cross(2, 7);
    for (std::size_t j = 0; j < 7; ++j) {
        cross(0, j) = rng.uniform(0.0, 1.0);
        cross(1, j) = rng.uniform(0.0, 1.0);
    }
    const auto s1 = decision_scores(sol, cross);
    const auto s2 = decision_scores(sol2, cross);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(std::abs(s1[i] + s2[i]) <= 1e-12);
}

TEST_CASE("zero multipliers score to the bias everywhere") {
    SvmSolution sol;
    sol.alphas = {0.0, 0.0, 0.0};
    sol.labels = {1, -1, 1};
    sol.bias = 0.37;
    Matrix cross(2, 3);
    cross(0, 0) = 5.0;
    cross(1, 2) = -2.0;
    const auto scores = decision_scores(sol, cross);
    CHECK(scores[0] == 0.37);
    CHECK(scores[1] == 0.37);
}

TEST_CASE("input validation") {
    Matrix k(2, 2);
    k(0, 0) = k(1, 1) = 1.0;
    SvmOptions opts;
    CHECK_THROWS_AS(solve_dual(k, std::vector<int>{1, 1}, opts), InvalidArgument);
    CHECK_THROWS_AS(solve_dual(k, std::vector<int>{1, 0}, opts), InvalidArgument);
    CHECK_THROWS_AS(solve_dual(k, std::vector<int>{1}, opts), InvalidArgument);
    SvmOptions bad;
    bad.c = 0.0;
    CHECK_THROWS_AS(solve_dual(k, std::vector<int>{1, -1}, bad), InvalidArgument);

    SvmSolution sol;
    sol.alphas = {1.0};
    sol.labels = {1};
    CHECK_THROWS_AS(decision_scores(sol, Matrix(1, 2)), InvalidArgument);
}

TEST_CASE("psd floor scales with shot noise for sampled kernels") {
    KernelMatrix exact;
    exact.values = Matrix(4, 4);
    exact.exact = true;
    CHECK(kernel_psd_floor(exact) == -1e-6);

    KernelMatrix sampled;
    sampled.values = Matrix(16, 16);
    for (std::size_t i = 0; i < 16; ++i) sampled.values(i, i) = 1.0;
    sampled.exact = false;
    sampled.shots = 100;
    // sqrt(16/100) = 0.4 of headroom, doubled
    CHECK(kernel_psd_floor(sampled) == doctest::Approx(-(1e-6 + 0.8)));
    CHECK_NOTHROW(check_kernel_psd(sampled));

    // corruption beyond any plausible shot noise still raises
    sampled.values(0, 1) = sampled.values(1, 0) = 3.0;
    CHECK_THROWS_AS(check_kernel_psd(sampled), NumericError);
}

TEST_CASE("near-PSD kernels pass, indefinite ones do not") {
    // min eigenvalue -1e-8: inside the clamp band
    Matrix near(2, 2);
    near(0, 0) = near(1, 1) = 1.0;
    near(0, 1) = near(1, 0) = 1.0 + 1e-8;
    SvmOptions opts;
    opts.c = 1.0;
    CHECK_NOTHROW(solve_dual(near, std::vector<int>{1, -1}, opts));

    // min eigenvalue -1: rejected
    Matrix bad(2, 2);
    bad(0, 0) = bad(1, 1) = 1.0;
    bad(0, 1) = bad(1, 0) = 2.0;
    CHECK_THROWS_AS(solve_dual(bad, std::vector<int>{1, -1}, opts), NumericError);

    // ...unless the check is off (the exact-provenance path)
    SvmOptions unchecked = opts;
    unchecked.psd_check = false;
    CHECK_NOTHROW(solve_dual(bad, std::vector<int>{1, -1}, unchecked));
}

} // TEST_SUITE
