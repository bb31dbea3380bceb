#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "qka/metrics.hpp"
#include "qka/trainer.hpp"

using namespace qka;

namespace {

CircuitPlan plan_2q(AnsatzKind kind = AnsatzKind::HardwareEfficientSu2) {
    CircuitPlan plan;
    plan.ansatz.kind = kind;
    plan.ansatz.n_qubits = 2;
    plan.ansatz.reps = 1;
    plan.feature_map.kind = FeatureMapKind::ZZ2ndOrder;
    plan.feature_map.n_qubits = 2;
    plan.feature_map.reps = 2;
    return plan;
}

Dataset synthetic(std::size_t m_train, std::size_t m_test, std::uint64_t seed, bool test_split) {
    HavlicekParams params;
    params.seed = seed;
    params.m_train = m_train;
    params.m_test = m_test;
    auto [train, test] = generate_havlicek(params);
    return test_split ? test : train;
}

bool all_distinct(const std::vector<std::size_t>& v) {
    return std::set<std::size_t>(v.begin(), v.end()).size() == v.size();
}

} // namespace

TEST_SUITE("trainer") {

TEST_CASE("scheduler: two draws partition four indices") {
    SubsampleScheduler sched(4, 2, 1);
    const auto a = sched.next_subset();
    const auto b = sched.next_subset();
    std::set<std::size_t> seen(a.begin(), a.end());
    seen.insert(b.begin(), b.end());
    CHECK(a.size() == 2);
    CHECK(b.size() == 2);
    CHECK(seen == std::set<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("scheduler: 96/32 gives three fresh draws per epoch") {
    SubsampleScheduler sched(96, 32, 5);
    std::set<std::size_t> seen;
    for (int d = 0; d < 3; ++d) {
        const auto draw = sched.next_subset();
        CHECK(draw.size() == 32);
        for (std::size_t i : draw) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == 96);
}

TEST_CASE("scheduler: epoch boundary tops up from a fresh shuffle (m=7, k=5)") {
    SubsampleScheduler sched(7, 5, 42);
    const auto first = sched.next_subset();
    REQUIRE(first.size() == 5);
    CHECK(all_distinct(first));

    std::set<std::size_t> leftover;
    for (std::size_t i = 0; i < 7; ++i) {
        if (std::find(first.begin(), first.end(), i) == first.end()) leftover.insert(i);
    }
    REQUIRE(leftover.size() == 2);

    const auto second = sched.next_subset();
    CHECK(second.size() == 5);
    CHECK(all_distinct(second));
    // the two leftovers must be in the second draw (epoch coverage)
    for (std::size_t i : leftover) {
        CHECK(std::find(second.begin(), second.end(), i) != second.end());
    }
}

TEST_CASE("scheduler coverage and disjointness properties") {
    Rng rng(314);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t m = 2 + rng.below(63);
        const std::size_t k = 1 + rng.below(m);
        SubsampleScheduler sched(m, k, derive_seed(0, trial));

        const std::size_t full_draws = m / k;
        std::set<std::size_t> seen;
        for (std::size_t d = 0; d < full_draws; ++d) {
            const auto draw = sched.next_subset();
            REQUIRE(draw.size() == k);
            CHECK(all_distinct(draw));
            for (std::size_t i : draw) {
                CHECK(i < m);
                CHECK(seen.insert(i).second); // disjoint before exhaustion
            }
        }
        if (seen.size() < m) {
            const auto draw = sched.next_subset();
            for (std::size_t i : draw) seen.insert(i);
        }
        CHECK(seen.size() == m); // epoch coverage in ceil(m/k) draws
    }
}

TEST_CASE("scheduler determinism under a fixed seed") {
    SubsampleScheduler a(31, 7, 12);
    SubsampleScheduler b(31, 7, 12);
    for (int d = 0; d < 12; ++d) CHECK(a.next_subset() == b.next_subset());
    SubsampleScheduler c(31, 7, 13);
    bool same = true;
    SubsampleScheduler a2(31, 7, 12);
    for (int d = 0; d < 12; ++d) same = same && (a2.next_subset() == c.next_subset());
    CHECK_FALSE(same);
}

TEST_CASE("scheduler validation") {
    CHECK_THROWS_AS(SubsampleScheduler(4, 5, 1), InvalidArgument);
    CHECK_THROWS_AS(SubsampleScheduler(4, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(SubsampleScheduler(0, 0, 1), InvalidArgument);
}

TEST_CASE("stratified draws always contain both classes") {
    // heavily imbalanced labels force the redraw/stratify path
    std::vector<int> labels(40, -1);
    labels[17] = 1;
    labels[23] = 1;
    SubsampleScheduler sched(40, 4, 9);
    for (int d = 0; d < 30; ++d) {
        const auto draw = sched.next_subset_stratified(labels);
        REQUIRE(draw.size() == 4);
        CHECK(all_distinct(draw));
        bool pos = false;
        bool neg = false;
        for (std::size_t i : draw) (labels[i] == 1 ? pos : neg) = true;
        CHECK(pos);
        CHECK(neg);
    }
}

TEST_CASE("redraws at epoch boundaries never duplicate pool entries") {
    // One positive among seven points with k = 5 forces constant redraws and
    // an epoch boundary every other draw; a draw returned to the pool there
    // must not double its leftover indices.
    std::vector<int> labels(7, -1);
    labels[3] = 1;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SubsampleScheduler sched(7, 5, seed);
        for (int d = 0; d < 40; ++d) {
            const auto draw = sched.next_subset_stratified(labels);
            REQUIRE(draw.size() == 5);
            CHECK(all_distinct(draw));
            for (std::size_t i : draw) CHECK(i < 7);
        }
    }
}

TEST_CASE("stratification fails only when the data is single class") {
    std::vector<int> labels(6, -1);
    SubsampleScheduler sched(6, 3, 2);
    CHECK_THROWS_AS(sched.next_subset_stratified(labels), NumericError);
}

TEST_CASE("k = m, s = 1 subsampled loss equals the full-kernel loss exactly") {
    const auto ds = synthetic(16, 4, 51, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz), 0.17);

    SubsampleScheduler sched(ds.size(), ds.size(), 77);
    SvmOptions svm;
    QueryLedger ledger;
    const double sub = subsampled_loss(theta, ds, plan, ds.size(), 1, sched, svm,
                                       KernelMode::Exact(), ledger, nullptr);

    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    QueryLedger ledger2;
    const auto kernel =
        build_kernel(ds.features, rows, plan, theta, KernelMode::Exact(), ledger2);
    const double full = alignment_loss(kernel, ds.labels, svm);
    CHECK(sub == full); // bitwise: same rows in the same order
}

TEST_CASE("ansatz parameters that only touch RZ slots leave the loss unchanged") {
    // On |0...0>, RZ layers contribute only a global phase, so two such theta
    // values induce the same kernel family: the loss depends on the subsets
    // alone and matching schedulers give identical values.
    const auto ds = synthetic(12, 4, 3, false);
    const auto plan = plan_2q(AnsatzKind::HardwareEfficientSu2);

    // layout per rotation layer: n RY params then n RZ params
    std::vector<double> theta_a(parameter_count(plan.ansatz), 0.0);
    std::vector<double> theta_b(parameter_count(plan.ansatz), 0.0);
    theta_a[2] = 0.9;
    theta_a[3] = -0.4;
    theta_b[2] = -1.3;
    theta_b[3] = 2.2;

    SvmOptions svm;
    SubsampleScheduler sched_a(12, 6, 4);
    SubsampleScheduler sched_b(12, 6, 4);
    QueryLedger la;
    QueryLedger lb;
    for (int iter = 0; iter < 4; ++iter) {
        const double a = subsampled_loss(theta_a, ds, plan, 6, 1, sched_a, svm,
                                         KernelMode::Exact(), la, nullptr);
        const double b = subsampled_loss(theta_b, ds, plan, 6, 1, sched_b, svm,
                                         KernelMode::Exact(), lb, nullptr);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("one SPSA iteration at k=16, s=4 books 960 pair queries") {
    const auto ds = synthetic(32, 4, 8, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz), 0.05);

    TrainOptions options;
    options.subset_size = 16;
    options.num_subsamples = 4;
    options.optimizer = OptimizerConfig::spsa_defaults();
    options.optimizer.max_iterations = 1;
    options.seed = 6;

    QueryLedger ledger;
    const auto record = train(ds, plan, theta, options, ledger);
    CHECK(record.iterations.size() == 1);
    CHECK(record.iterations[0].cumulative_queries == 960);
    CHECK(ledger.total(QueryConvention::Pairs) == 960);
    CHECK(record.iterations[0].eval_sub_losses.size() == 2);
    CHECK(record.iterations[0].eval_sub_losses[0].size() == 4);
}

TEST_CASE("query law holds across optimizers, exactly") {
    const auto ds = synthetic(12, 4, 15, false);
    CircuitPlan plan = plan_2q(AnsatzKind::RealAmplitudes);
    std::vector<double> theta(parameter_count(plan.ansatz), 0.02);
    const std::size_t dim = theta.size();

    struct Case {
        OptimizerConfig cfg;
        std::size_t evals_per_iter;
    };
    std::vector<Case> cases;
    {
        auto spsa = OptimizerConfig::spsa_defaults();
        spsa.max_iterations = 5;
        cases.push_back({spsa, 2});
        auto gd = OptimizerConfig::gd_defaults();
        gd.max_iterations = 4;
        gd.tolerance = 0.0;
        cases.push_back({gd, 2 * dim});
    }

    for (const auto& c : cases) {
        for (std::size_t k : {3u, 6u, 12u}) {
            for (std::size_t s : {1u, 2u}) {
                TrainOptions options;
                options.subset_size = k;
                options.num_subsamples = s;
                options.optimizer = c.cfg;
                options.seed = derive_seed(1, k, s);

                QueryLedger ledger;
                const auto record = train(ds, plan, theta, options, ledger);
                const std::uint64_t expected = c.evals_per_iter * s *
                                               query_cost(k, QueryConvention::Pairs) *
                                               record.iterations.size();
                CHECK(ledger.total(QueryConvention::Pairs) == expected);
                CHECK(record.iterations.back().cumulative_queries == expected);
                for (std::size_t i = 1; i < record.iterations.size(); ++i) {
                    CHECK(record.iterations[i].cumulative_queries >
                          record.iterations[i - 1].cumulative_queries);
                }
            }
        }
    }
}

TEST_CASE("train(k=m, s=1) reproduces a dedicated full-kernel loop bitwise") {
    const auto ds = synthetic(12, 4, 23, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz));
    Rng trng(40);
    for (double& t : theta) t = trng.uniform(-0.1, 0.1);

    TrainOptions options;
    options.subset_size = ds.size();
    options.num_subsamples = 1;
    options.optimizer = OptimizerConfig::spsa_defaults();
    options.optimizer.max_iterations = 8;
    options.seed = 31;

    QueryLedger ledger;
    const auto record = train(ds, plan, theta, options, ledger);

    // dedicated loop: same optimizer stream, full kernel in index order
    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    SvmOptions svm;
    svm.c = options.svm_c;
    svm.tol = options.svm_tol;
    QueryLedger ledger2;
    LossFn full_loss = [&](std::span<const double> t) {
        const auto kernel = build_kernel(ds.features, rows, plan, t, KernelMode::Exact(), ledger2);
        return alignment_loss(kernel, ds.labels, svm);
    };
    OptimizerConfig opt = options.optimizer;
    opt.seed = derive_seed(options.seed, fnv1a("optimizer"));
    const auto run = run_optimizer(theta, full_loss, opt);

    REQUIRE(run.steps.size() == record.iterations.size());
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        CHECK(run.steps[i].loss_value == record.iterations[i].loss);
        CHECK(run.steps[i].theta_after == record.iterations[i].theta);
    }
}

TEST_CASE("averaging over s = 4 sub-samples cuts the loss variance") {
    const auto ds = synthetic(96, 32, 77, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz));
    Rng trng(123);
    for (double& t : theta) t = trng.uniform(-0.1, 0.1);

    SvmOptions svm;
    auto variance_at = [&](std::size_t s, std::uint64_t seed_base) {
        std::vector<double> losses;
        for (int trial = 0; trial < 200; ++trial) {
            SubsampleScheduler sched(ds.size(), 16, derive_seed(seed_base, trial));
            QueryLedger ledger;
            losses.push_back(subsampled_loss(theta, ds, plan, 16, s, sched, svm,
                                             KernelMode::Exact(), ledger, nullptr));
        }
        const double sd = sample_std(losses);
        return sd * sd;
    };

    const double var1 = variance_at(1, 1000);
    const double var4 = variance_at(4, 2000);
    CHECK(var4 < var1);
    const double ratio = var4 / var1;
    CHECK(ratio >= 0.15);
    CHECK(ratio <= 0.45);
}

TEST_CASE("sub-sampled training stays close to the full-kernel run end to end") {
    HavlicekParams params;
    params.seed = 404;
    params.m_train = 96;
    params.m_test = 32;
    const auto [train_ds, test_ds] = generate_havlicek(params);
    const auto plan = plan_2q();

    std::vector<double> theta(parameter_count(plan.ansatz));
    Rng trng(2);
    for (double& t : theta) t = trng.uniform(-0.1, 0.1);

    auto run_one = [&](std::size_t k) {
        TrainOptions options;
        options.subset_size = k;
        options.num_subsamples = 1;
        options.optimizer = OptimizerConfig::spsa_defaults();
        options.optimizer.max_iterations = 60;
        options.seed = 5150;

        QueryLedger ledger;
        const auto record = train(train_ds, plan, theta, options, ledger);
        const std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
        const auto fin = finalize(train_ds, plan, record.theta_opt, c_grid, 1e-8,
                                  KernelMode::Exact(), ledger, 99);

        std::vector<std::size_t> train_rows(train_ds.size());
        std::vector<std::size_t> test_rows(test_ds.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) train_rows[i] = i;
        for (std::size_t i = 0; i < test_rows.size(); ++i) test_rows[i] = i;
        QueryLedger score_ledger;
        const auto cross =
            build_cross_kernel(test_ds.features, test_rows, train_ds.features, train_rows, plan,
                               record.theta_opt, KernelMode::Exact(), score_ledger, "score");
        return roc_auc(decision_scores(fin.solution, cross), test_ds.labels);
    };

    const double auc_full = run_one(96);
    const double auc_sub = run_one(16);
    CHECK(auc_full > 0.8);
    CHECK(std::abs(auc_full - auc_sub) <= 0.05);
}

TEST_CASE("finalize at theta_init equals the unaligned baseline kernel") {
    const auto ds = synthetic(16, 4, 61, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz));
    Rng trng(7);
    for (double& t : theta) t = trng.uniform(-0.1, 0.1);

    QueryLedger ledger;
    const std::vector<double> c_grid{1.0};
    const auto fin = finalize(ds, plan, theta, c_grid, 1e-8, KernelMode::Exact(), ledger, 5);

    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    QueryLedger ledger2;
    const auto direct = build_kernel(ds.features, rows, plan, theta, KernelMode::Exact(), ledger2);
    CHECK(fin.kernel.values == direct.values);
    for (std::size_t i = 0; i < fin.kernel.size(); ++i) {
        CHECK(fin.kernel.values(i, i) == 1.0);
    }
    CHECK(ledger.total(QueryConvention::Pairs) == query_cost(16, QueryConvention::Pairs));
    CHECK(fin.chosen_c == 1.0);
}

TEST_CASE("a 96-point finalize trains a classifier without complaint") {
    const auto ds = synthetic(96, 32, 31337, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz));
    Rng trng(8);
    for (double& t : theta) t = trng.uniform(-0.1, 0.1);

    QueryLedger ledger;
    const std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
    const auto fin = finalize(ds, plan, theta, c_grid, 1e-8, KernelMode::Exact(), ledger, 9);
    CHECK(min_symmetric_eigenvalue(fin.kernel.values) >= -1e-8);
    CHECK(fin.solution.alphas.size() == 96);
    CHECK(fin.solution.kkt_violation <= 1e-8);
}

TEST_CASE("shots mode trains and finalizes despite sampling noise") {
    const auto ds = synthetic(16, 4, 5151, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz));
    Rng trng(9);
    for (double& t : theta) t = trng.uniform(-0.1, 0.1);

    TrainOptions options;
    options.subset_size = 8;
    options.num_subsamples = 2;
    options.optimizer = OptimizerConfig::spsa_defaults();
    options.optimizer.max_iterations = 6;
    options.mode = KernelMode::Shots(100, 909);
    options.seed = 13;

    QueryLedger ledger;
    const auto record = train(ds, plan, theta, options, ledger);
    const std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
    const auto fin = finalize(ds, plan, record.theta_opt, c_grid, 1e-8, options.mode, ledger, 3);
    CHECK_FALSE(fin.kernel.exact);
    CHECK(fin.kernel.shots == 100);
    // binomial noise at 100 shots pushes eigenvalues below the strict floor;
    // the provenance-aware guard must absorb that
    CHECK(min_symmetric_eigenvalue(fin.kernel.values) < 0.0);
    CHECK(fin.solution.alphas.size() == 16);

    // identical seeds reproduce the run bitwise
    QueryLedger ledger2;
    const auto record2 = train(ds, plan, theta, options, ledger2);
    REQUIRE(record2.iterations.size() == record.iterations.size());
    for (std::size_t i = 0; i < record.iterations.size(); ++i) {
        CHECK(record2.iterations[i].loss == record.iterations[i].loss);
    }
}

TEST_CASE("train record serialization writes json and a normalized loss curve") {
    const auto ds = synthetic(12, 4, 71, false);
    const auto plan = plan_2q();
    std::vector<double> theta(parameter_count(plan.ansatz), 0.03);

    TrainOptions options;
    options.subset_size = 6;
    options.num_subsamples = 2;
    options.optimizer = OptimizerConfig::spsa_defaults();
    options.optimizer.max_iterations = 5;
    options.seed = 3;

    QueryLedger ledger;
    const auto record = train(ds, plan, theta, options, ledger);

    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "qka_trainer_io";
    fs::create_directories(dir);
    save_train_record_json(record, (dir / "record.json").string());
    save_loss_curve_csv(record, (dir / "curve.csv").string());
    save_loss_curve_svg(record, (dir / "curve.svg").string());

    std::ifstream curve(dir / "curve.csv");
    std::string line;
    REQUIRE(std::getline(curve, line));
    CHECK(line == "iteration,raw_loss,normalized_loss");
    double lo = 1e9;
    double hi = -1e9;
    while (std::getline(curve, line)) {
        const auto last_comma = line.rfind(',');
        const double norm = std::stod(line.substr(last_comma + 1));
        lo = std::min(lo, norm);
        hi = std::max(hi, norm);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
    fs::remove_all(dir);
}

} // TEST_SUITE
