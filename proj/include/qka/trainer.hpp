#pragma once

// The sub-sampling kernel-alignment training loop: per optimizer step the loss
// is averaged over s sub-kernels of size k drawn without replacement until the
// dataset is exhausted, after which the pool is reshuffled.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qka/data.hpp"
#include "qka/kernel.hpp"
#include "qka/optim.hpp"
#include "qka/rng.hpp"
#include "qka/svm.hpp"

namespace qka {

// Draws disjoint k-subsets until the index pool is exhausted; the remainder of
// a short final draw is topped up from a fresh reshuffle. Draws are returned
// sorted ascending.
class SubsampleScheduler {
public:
    SubsampleScheduler(std::size_t dataset_size, std::size_t subset_size, std::uint64_t seed);

    std::vector<std::size_t> next_subset();

    // next_subset, redrawn (pool reshuffled, membership kept) up to
    // max_redraws times while the drawn labels are single-class; afterwards
    // one index is swapped for the lowest-index sample of the missing class.
    std::vector<std::size_t> next_subset_stratified(std::span<const int> labels,
                                                    int max_redraws = 10);

    std::size_t dataset_size() const { return dataset_size_; }
    std::size_t subset_size() const { return subset_size_; }
    std::size_t pool_remaining() const { return pool_.size(); }
    std::uint64_t draws_made() const { return draws_made_; }

private:
    void refill_pool();

    std::size_t dataset_size_;
    std::size_t subset_size_;
    Rng rng_;
    std::vector<std::size_t> pool_; // back = next index to hand out
    std::uint64_t draws_made_ = 0;
};

struct IterationRecord {
    std::vector<double> theta;                         // iterate after the update
    double loss = 0.0;                                 // recorded loss for the stopping rule
    std::vector<std::vector<double>> eval_sub_losses;  // per loss eval, the s sub-sample losses
    std::uint64_t cumulative_queries = 0;              // ledger total after this iteration
};

struct TrainRecord {
    std::vector<double> theta_init;
    std::vector<IterationRecord> iterations;
    std::size_t stop_iteration = 0; // argmin of recorded losses
    std::vector<double> theta_opt;
    double best_loss = 0.0;
    std::uint64_t queries_at_stop = 0;
    std::uint64_t total_loss_evals = 0;
    std::size_t subset_size = 0;
    std::size_t num_subsamples = 0;
    std::string query_convention;
};

struct TrainOptions {
    std::size_t subset_size = 0;    // k
    std::size_t num_subsamples = 1; // s
    OptimizerConfig optimizer;
    double svm_c = 1.0;
    double svm_tol = 1e-8;
    QueryConvention convention = QueryConvention::Pairs;
    KernelMode mode = KernelMode::Exact();
    std::uint64_t seed = 0;
};

// Mean of s alignment losses on consecutive scheduler draws; the ledger gains
// s symmetric events of size k. Per-sub-sample losses are appended to
// sub_losses when given.
double subsampled_loss(std::span<const double> theta, const Dataset& ds,
                       const CircuitPlan& plan, std::size_t subset_size,
                       std::size_t num_subsamples, SubsampleScheduler& scheduler,
                       const SvmOptions& svm, const KernelMode& mode, QueryLedger& ledger,
                       std::vector<double>* sub_losses = nullptr);

TrainRecord train(const Dataset& ds, const CircuitPlan& plan,
                  std::span<const double> theta_init, const TrainOptions& options,
                  QueryLedger& ledger);

struct FinalizeResult {
    KernelMatrix kernel;
    SvmSolution solution;
    double chosen_c = 0.0;
};

// Full kernel at theta_opt (one symmetric ledger event of size m), C selected
// on a stratified validation split by ROC AUC, then refit on all rows.
FinalizeResult finalize(const Dataset& ds, const CircuitPlan& plan,
                        std::span<const double> theta_opt, std::span<const double> c_grid,
                        double svm_tol, const KernelMode& mode, QueryLedger& ledger,
                        std::uint64_t seed, double validation_fraction = 0.2);

void save_train_record_json(const TrainRecord& record, const std::string& path);

// CSV columns: iteration, raw_loss, normalized_loss (min-max scaled).
void save_loss_curve_csv(const TrainRecord& record, const std::string& path);

// Minimal static polyline rendering of the normalized loss curve.
void save_loss_curve_svg(const TrainRecord& record, const std::string& path);

} // namespace qka
