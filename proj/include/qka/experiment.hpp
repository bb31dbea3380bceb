#pragma once

// Experiment configuration, the batch runner and the classical baseline. This
// is the layer behind the CLI: it resolves datasets, repeats runs over seeds,
// averages metrics and writes the results table plus per-run artifacts.

#include <cstdint>
#include <string>
#include <vector>

#include "qka/data.hpp"
#include "qka/trainer.hpp"

namespace qka {

enum class DatasetKind { Havlicek, Csv };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::Havlicek;
    // Havlicek generator
    int n_qubits = 2;
    std::size_t m_train = 96;
    std::size_t m_test = 32;
    double gap = 0.2;
    std::uint64_t data_seed = 0; // 0 = derive from the master seed
    int feature_map_reps = 2;
    // Csv ingestion
    std::string train_csv;
    std::string test_csv;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    FeatureMapSpec feature_map;
    AnsatzSpec ansatz;
    OptimizerConfig optimizer = OptimizerConfig::spsa_defaults();
    std::size_t subset_size = 96;   // k
    std::size_t num_subsamples = 1; // s
    QueryConvention convention = QueryConvention::Pairs;
    bool shots_mode = false;
    int shots = 0;
    std::vector<double> c_grid = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma_grid = {0.01, 0.1, 1.0}; // classical baseline
    int poly_degree = 3;
    std::size_t repeats = 5;
    std::size_t cv_folds = 10;
    double svm_train_c = 1.0;
    double svm_tol = 1e-8;
    double theta_init_scale = 0.1;
    double validation_fraction = 0.2;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    bool emit_svg = false;
    bool save_kernel = false;
    // sweep row lists; empty = use the scalar fields
    std::vector<std::size_t> sweep_k;
    std::vector<std::size_t> sweep_s;
    std::vector<AnsatzKind> sweep_ansatz;
};

// key = value lines, '#' comments; unknown keys are errors. Keys match the CLI
// long flags (see README for the schema).
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_key(ExperimentConfig& config, const std::string& key,
                      const std::string& value);
void validate_config(const ExperimentConfig& config);

struct ResultRow {
    std::string ansatz;
    std::string optimizer;
    std::size_t k = 0;
    std::size_t s = 0;
    double roc_auc = 0.0;
    double f1 = 0.0;
    double queries = 0.0;   // mean over repeats, stopping-rule truncated
    double speed_up = 0.0;  // NaN until a matching full-kernel baseline exists
    double cv_std = 0.0;
};

std::string ansatz_name(AnsatzKind kind);
std::string optimizer_name(OptimizerKind kind);

// One (ansatz, k, s) experiment: `repeats` seeded train/finalize/score cycles,
// metrics averaged. Artifacts (train records, loss curves, manifest fragments)
// are written under row_dir; partial outputs are removed if the run throws.
ResultRow run_experiment(const ExperimentConfig& config, const std::string& row_dir);

// Cartesian sweep over sweep_ansatz x sweep_k x sweep_s with the k = m_train,
// s = 1 baseline row injected per ansatz; writes results.csv and manifest.json
// under output_dir.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config);

// `train` subcommand body: single row into output_dir plus results.csv.
ResultRow run_single(const ExperimentConfig& config);

enum class ClassicalKernelKind { Linear, Poly, Rbf };

struct ClassicalGrids {
    std::vector<ClassicalKernelKind> kernels = {ClassicalKernelKind::Linear,
                                                ClassicalKernelKind::Poly,
                                                ClassicalKernelKind::Rbf};
    std::vector<double> c_values = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma_values = {0.01, 0.1, 1.0};
    int poly_degree = 3;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
};

// Grid search over kernel type {linear, poly, rbf} x C x gamma on a stratified
// validation split, best configuration refit on the full training set and
// scored on test. The row's ansatz column carries the winning kernel name.
ResultRow classical_baseline(const Dataset& train, const Dataset& test,
                             const ClassicalGrids& grids);

// Baseline wrapper over a config (dataset resolution + artifact writing).
ResultRow run_classical_baseline(const ExperimentConfig& config);

// Columns: ansatz,k,s,roc_auc,f1,queries,speed_up,optimizer,cv_std.
void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);

// Resolves the configured dataset (generates or loads + validates).
std::pair<Dataset, Dataset> resolve_dataset(const ExperimentConfig& config);

} // namespace qka
