#include "qka/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "qka/metrics.hpp"
#include "qka/rng.hpp"

namespace qka {

SubsampleScheduler::SubsampleScheduler(std::size_t dataset_size, std::size_t subset_size,
                                       std::uint64_t seed)
    : dataset_size_(dataset_size), subset_size_(subset_size),
      rng_(derive_seed(seed, fnv1a("scheduler"))) {
    if (dataset_size == 0) throw InvalidArgument("dataset_size must be >= 1");
    if (subset_size < 1 || subset_size > dataset_size) {
        throw InvalidArgument("subset_size must be in [1, dataset_size]");
    }
    refill_pool();
}

void SubsampleScheduler::refill_pool() {
    pool_.resize(dataset_size_);
    for (std::size_t i = 0; i < dataset_size_; ++i) pool_[i] = i;
    rng_.shuffle(pool_);
}

std::vector<std::size_t> SubsampleScheduler::next_subset() {
    std::vector<std::size_t> draw;
    draw.reserve(subset_size_);
    while (draw.size() < subset_size_ && !pool_.empty()) {
        draw.push_back(pool_.back());
        pool_.pop_back();
    }
    if (draw.size() < subset_size_) {
        // Epoch boundary: top the leftover up from a fresh reshuffle, keeping
        // the draw free of duplicates. Skipped entries stay in the new pool.
        refill_pool();
        std::vector<std::size_t> skipped;
        while (draw.size() < subset_size_) {
            const std::size_t candidate = pool_.back();
            pool_.pop_back();
            if (std::find(draw.begin(), draw.end(), candidate) == draw.end()) {
                draw.push_back(candidate);
            } else {
                skipped.push_back(candidate);
            }
        }
        for (auto it = skipped.rbegin(); it != skipped.rend(); ++it) pool_.push_back(*it);
    }
    ++draws_made_;
    std::sort(draw.begin(), draw.end());
    return draw;
}

std::vector<std::size_t> SubsampleScheduler::next_subset_stratified(std::span<const int> labels,
                                                                    int max_redraws) {
    if (labels.size() != dataset_size_) throw InvalidArgument("label count mismatch");

    auto single_class = [&](const std::vector<std::size_t>& draw) {
        bool pos = false;
        bool neg = false;
        for (std::size_t i : draw) (labels[i] == 1 ? pos : neg) = true;
        return !(pos && neg);
    };

    auto draw = next_subset();
    if (subset_size_ == dataset_size_ || !single_class(draw)) return draw;

    for (int attempt = 0; attempt < max_redraws; ++attempt) {
        // Put the draw back and try again on a reshuffled pool. A draw topped
        // up at an epoch boundary overlaps the refilled pool, so the union is
        // deduplicated; an index must never sit in the pool twice.
        pool_.insert(pool_.end(), draw.begin(), draw.end());
        std::sort(pool_.begin(), pool_.end());
        pool_.erase(std::unique(pool_.begin(), pool_.end()), pool_.end());
        rng_.shuffle(pool_);
        --draws_made_;
        draw = next_subset();
        if (!single_class(draw)) return draw;
    }

    // Forced stratification: swap the last drawn index for the lowest-index
    // sample of the missing class.
    const int have = labels[draw.front()];
    for (std::size_t i = 0; i < dataset_size_; ++i) {
        if (labels[i] != have && std::find(draw.begin(), draw.end(), i) == draw.end()) {
            if (std::find(pool_.begin(), pool_.end(), draw.back()) == pool_.end()) {
                pool_.push_back(draw.back());
            }
            draw.back() = i;
            pool_.erase(std::remove(pool_.begin(), pool_.end(), i), pool_.end());
            std::sort(draw.begin(), draw.end());
            return draw;
        }
    }
    throw NumericError("cannot stratify subset: dataset is effectively single-class");
}

double subsampled_loss(std::span<const double> theta, const Dataset& ds,
                       const CircuitPlan& plan, std::size_t subset_size,
                       std::size_t num_subsamples, SubsampleScheduler& scheduler,
                       const SvmOptions& svm, const KernelMode& mode, QueryLedger& ledger,
                       std::vector<double>* sub_losses) {
    if (num_subsamples < 1) throw InvalidArgument("num_subsamples must be >= 1");
    if (scheduler.dataset_size() != ds.size() || scheduler.subset_size() != subset_size) {
        throw InvalidArgument("scheduler does not match dataset/subset size");
    }

    double total = 0.0;
    for (std::size_t s = 0; s < num_subsamples; ++s) {
        const auto subset = scheduler.next_subset_stratified(ds.labels);
        KernelMode sub_mode = mode;
        if (!mode.exact) {
            sub_mode.seed = derive_seed(mode.seed, fnv1a("subsample"), scheduler.draws_made());
        }
        const auto kernel = build_kernel(ds.features, subset, plan, theta, sub_mode, ledger, "train");
        std::vector<int> y;
        y.reserve(subset.size());
        for (std::size_t idx : subset) y.push_back(ds.labels[idx]);
        const double loss = alignment_loss(kernel, y, svm);
        total += loss;
        if (sub_losses) sub_losses->push_back(loss);
    }
    return total / static_cast<double>(num_subsamples);
}

TrainRecord train(const Dataset& ds, const CircuitPlan& plan,
                  std::span<const double> theta_init, const TrainOptions& options,
                  QueryLedger& ledger) {
    validate_dataset(ds);
    validate_plan(plan);
    if (theta_init.size() != parameter_count(plan.ansatz)) {
        throw InvalidArgument("theta_init length does not match the ansatz");
    }

    SubsampleScheduler scheduler(ds.size(), options.subset_size,
                                 derive_seed(options.seed, fnv1a("train")));
    SvmOptions svm;
    svm.c = options.svm_c;
    svm.tol = options.svm_tol;

    struct EvalTrace {
        std::vector<double> sub_losses;
        std::uint64_t ledger_total = 0;
    };
    std::vector<EvalTrace> evals;

    LossFn loss = [&](std::span<const double> theta) {
        EvalTrace trace;
        const double value =
            subsampled_loss(theta, ds, plan, options.subset_size, options.num_subsamples,
                            scheduler, svm, options.mode, ledger, &trace.sub_losses);
        trace.ledger_total = ledger.total(options.convention);
        evals.push_back(std::move(trace));
        return value;
    };

    OptimizerConfig opt = options.optimizer;
    opt.seed = derive_seed(options.seed, fnv1a("optimizer"));
    const OptimizerRun run = run_optimizer(theta_init, loss, opt);

    TrainRecord record;
    record.theta_init.assign(theta_init.begin(), theta_init.end());
    record.subset_size = options.subset_size;
    record.num_subsamples = options.num_subsamples;
    record.total_loss_evals = run.total_loss_evals;
    record.query_convention = options.convention == QueryConvention::Pairs ? "pairs" : "squared";

    std::size_t eval_cursor = 0;
    for (const StepReport& step : run.steps) {
        IterationRecord it;
        it.theta = step.theta_after;
        it.loss = step.loss_value;
        for (std::size_t e = 0; e < step.loss_evals_used; ++e) {
            it.eval_sub_losses.push_back(evals.at(eval_cursor).sub_losses);
            it.cumulative_queries = evals.at(eval_cursor).ledger_total;
            ++eval_cursor;
        }
        record.iterations.push_back(std::move(it));
    }

    record.stop_iteration = run.best_step;
    record.theta_opt = run.theta_best;
    record.best_loss = run.best_loss;
    record.queries_at_stop = record.iterations[run.best_step].cumulative_queries;
    return record;
}

FinalizeResult finalize(const Dataset& ds, const CircuitPlan& plan,
                        std::span<const double> theta_opt, std::span<const double> c_grid,
                        double svm_tol, const KernelMode& mode, QueryLedger& ledger,
                        std::uint64_t seed, double validation_fraction) {
    validate_dataset(ds);
    if (c_grid.empty()) throw InvalidArgument("empty C grid");

    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    KernelMode full_mode = mode;
    if (!mode.exact) full_mode.seed = derive_seed(mode.seed, fnv1a("finalize"));
    FinalizeResult result;
    result.kernel =
        build_kernel(ds.features, all, plan, theta_opt, full_mode, ledger, "finalize");
    // One provenance-aware guard up front; principal sub-blocks interlace, so
    // the model-selection solves below can skip their own checks.
    check_kernel_psd(result.kernel);

    // Model selection on a stratified validation split using sub-blocks of the
    // kernel already built - no further queries.
    const auto val_rows =
        stratified_sample(ds.labels, validation_fraction, derive_seed(seed, fnv1a("validation")));
    std::vector<char> is_val(ds.size(), 0);
    for (std::size_t r : val_rows) is_val[r] = 1;
    std::vector<std::size_t> fit_rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!is_val[i]) fit_rows.push_back(i);
    }

    Matrix fit_kernel(fit_rows.size(), fit_rows.size());
    for (std::size_t a = 0; a < fit_rows.size(); ++a) {
        for (std::size_t b = 0; b < fit_rows.size(); ++b) {
            fit_kernel(a, b) = result.kernel.values(fit_rows[a], fit_rows[b]);
        }
    }
    Matrix val_kernel(val_rows.size(), fit_rows.size());
    for (std::size_t a = 0; a < val_rows.size(); ++a) {
        for (std::size_t b = 0; b < fit_rows.size(); ++b) {
            val_kernel(a, b) = result.kernel.values(val_rows[a], fit_rows[b]);
        }
    }
    std::vector<int> fit_labels;
    std::vector<int> val_labels;
    for (std::size_t r : fit_rows) fit_labels.push_back(ds.labels[r]);
    for (std::size_t r : val_rows) val_labels.push_back(ds.labels[r]);

    double best_auc = -1.0;
    double best_c = c_grid.front();
    for (double c : c_grid) {
        SvmOptions opts;
        opts.c = c;
        opts.tol = svm_tol;
        opts.psd_check = false;
        const auto sub_solution = solve_dual(fit_kernel, fit_labels, opts);
        const auto scores = decision_scores(sub_solution, val_kernel);
        const double auc = roc_auc(scores, val_labels);
        if (auc > best_auc) {
            best_auc = auc;
            best_c = c;
        }
    }

    SvmOptions final_opts;
    final_opts.c = best_c;
    final_opts.tol = svm_tol;
    result.solution = solve_dual(result.kernel, ds.labels, final_opts);
    result.chosen_c = best_c;
    return result;
}

nlohmann::json to_json(const TrainRecord& record) {
    nlohmann::json j;
    j["theta_init"] = record.theta_init;
    j["theta_opt"] = record.theta_opt;
    j["stop_iteration"] = record.stop_iteration;
    j["best_loss"] = record.best_loss;
    j["queries_at_stop"] = record.queries_at_stop;
    j["total_loss_evals"] = record.total_loss_evals;
    j["subset_size"] = record.subset_size;
    j["num_subsamples"] = record.num_subsamples;
    j["query_convention"] = record.query_convention;
    auto& iterations = j["iterations"] = nlohmann::json::array();
    for (const IterationRecord& it : record.iterations) {
        nlohmann::json ji;
        ji["theta"] = it.theta;
        ji["loss"] = it.loss;
        ji["sub_losses"] = it.eval_sub_losses;
        ji["cumulative_queries"] = it.cumulative_queries;
        iterations.push_back(std::move(ji));
    }
    return j;
}

void save_train_record_json(const TrainRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_json(record).dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

void save_loss_curve_csv(const TrainRecord& record, const std::string& path) {
    std::vector<double> losses;
    losses.reserve(record.iterations.size());
    for (const auto& it : record.iterations) losses.push_back(it.loss);
    const auto normalized = min_max_normalized(losses);

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "iteration,raw_loss,normalized_loss\n";
    char buf[80];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g", i, losses[i], normalized[i]);
        out << buf << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

void save_loss_curve_svg(const TrainRecord& record, const std::string& path) {
    std::vector<double> losses;
    for (const auto& it : record.iterations) losses.push_back(it.loss);
    const auto normalized = min_max_normalized(losses);

    constexpr double width = 640.0;
    constexpr double height = 360.0;
    constexpr double margin = 40.0;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
        << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = normalized.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = margin + (width - 2 * margin) * (n == 1 ? 0.0 : double(i) / double(n - 1));
        const double y = height - margin - (height - 2 * margin) * normalized[i];
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
        out << buf;
    }
    out << "\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n";
    out << "  <text x=\"12\" y=\"" << height / 2
        << "\" font-size=\"12\" transform=\"rotate(-90 12 " << height / 2
        << ")\" text-anchor=\"middle\">normalized loss</text>\n";
    out << "</svg>\n";
    if (!out) throw IoError("failed writing " + path);
}

} // namespace qka
