#pragma once

// Dataset generation, CSV ingestion and stratified fold planning.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qka/linalg.hpp"

namespace qka {

struct Dataset {
    Matrix features;         // m x d
    std::vector<int> labels; // entries in {-1, +1}
    std::string name;
    std::uint64_t seed = 0;

    std::size_t size() const { return features.rows(); }
    std::size_t dimension() const { return features.cols(); }
};

// Throws unless features are finite, labels are +-1 and both classes occur.
void validate_dataset(const Dataset& ds);

struct HavlicekParams {
    int n_qubits = 2;
    std::size_t m_train = 96;
    std::size_t m_test = 32;
    double gap = 0.2;
    std::uint64_t seed = 0;
    int feature_map_reps = 2;
    std::size_t rejection_budget = 4'000'000;
};

// Separable synthetic data: features uniform in [0, 2pi)^n, encoded with the
// second-order Pauli-Z feature map, labeled by the sign of <phi(x)|V' P V|phi(x)>
// for a fixed seeded Haar-random V and the Z-parity observable P, keeping only
// points with |expectation| >= gap. Classes come out balanced (within one
// sample) in both splits.
std::pair<Dataset, Dataset> generate_havlicek(const HavlicekParams& params);

// The labeling expectation used by the generator, recomputable per point.
double havlicek_expectation(const HavlicekParams& params, std::span<const double> x);

// CSV: header "f0,...,f{d-1},label", features as decimal text (round-trip
// exact), label column last in {-1, +1}.
Dataset load_embeddings_csv(const std::string& path);
void save_dataset_csv(const Dataset& ds, const std::string& path);

// Writes train.csv, test.csv and manifest.json (generator parameters) to dir.
void generate_havlicek_files(const HavlicekParams& params, const std::string& dir);

struct FoldPlan {
    std::size_t n_folds = 0;
    std::vector<std::size_t> assignment; // fold id per dataset row

    std::vector<std::vector<std::size_t>> folds() const;
};

// Stratified folds: per-class round-robin dealing after a seeded shuffle, so
// per-fold class counts stay within one of the global ratio. Falls back to
// min(class count) folds when a class is smaller than n_folds.
FoldPlan stratified_folds(const Dataset& ds, std::size_t n_folds, std::uint64_t seed);

// Sorted index sample keeping class proportions (at least one per class).
std::vector<std::size_t> stratified_sample(std::span<const int> labels, double fraction,
                                           std::uint64_t seed);

} // namespace qka
