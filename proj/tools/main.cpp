// qka command line: dataset generation, single training runs, table sweeps and
// the classical-kernel baseline, all through the C API in qka.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qka.h"

namespace {

struct ExperimentDeleter {
    void operator()(qka_experiment* e) const { qka_experiment_free(e); }
};
struct ReportDeleter {
    void operator()(qka_report* r) const { qka_report_free(r); }
};
using ExperimentPtr = std::unique_ptr<qka_experiment, ExperimentDeleter>;
using ReportPtr = std::unique_ptr<qka_report, ReportDeleter>;

[[noreturn]] void die(qka_status status) {
    std::fprintf(stderr, "error (%s): %s\n", qka_status_name(status), qka_last_error());
    std::exit(1);
}

void check(qka_status status) {
    if (status != QKA_OK) die(status);
}

// Collects flag values as (config key, value) pairs so the CLI surface and the
// config file share one schema.
class KeyValues {
public:
    void add(CLI::App* cmd, const std::string& flag, const std::string& key,
             const std::string& help) {
        auto holder = std::make_shared<std::string>();
        cmd->add_option_function<std::string>(
               flag,
               [this, key, holder](const std::string& v) {
                   *holder = v;
                   pairs_.emplace_back(key, *holder);
               },
               help)
            ->expected(1);
    }

    const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

void add_common_options(CLI::App* cmd, KeyValues& kv, std::string& config_path) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    kv.add(cmd, "--dataset", "dataset", "havlicek | csv");
    kv.add(cmd, "--n-qubits", "n_qubits", "generator qubit count");
    kv.add(cmd, "--m-train", "m_train", "training points to generate");
    kv.add(cmd, "--m-test", "m_test", "test points to generate");
    kv.add(cmd, "--gap", "gap", "labeling separation gap");
    kv.add(cmd, "--data-seed", "data_seed", "dataset generation seed (0 = derive)");
    kv.add(cmd, "--train-csv", "train_csv", "training embeddings CSV");
    kv.add(cmd, "--test-csv", "test_csv", "test embeddings CSV");
    kv.add(cmd, "--feature-map", "feature_map", "zz | iqp");
    kv.add(cmd, "--feature-map-reps", "feature_map_reps", "feature map repetitions");
    kv.add(cmd, "--bandwidth", "bandwidth", "IQP bandwidth c (or 'auto' = 2/n)");
    kv.add(cmd, "--ansatz", "ansatz", "he | ra");
    kv.add(cmd, "--ansatz-reps", "ansatz_reps", "ansatz repetitions");
    kv.add(cmd, "--entanglement", "entanglement", "linear | full");
    kv.add(cmd, "--optimizer", "optimizer", "spsa | adam | gd");
    kv.add(cmd, "--max-iterations", "max_iterations", "optimizer iteration budget");
    kv.add(cmd, "--learning-rate", "learning_rate", "optimizer learning rate");
    kv.add(cmd, "--perturbation", "perturbation", "SPSA perturbation");
    kv.add(cmd, "--tolerance", "tolerance", "ADAM/GD stop tolerance");
    kv.add(cmd, "--fd-step", "fd_step", "central-difference step");
    kv.add(cmd, "--k", "k", "sub-kernel size");
    kv.add(cmd, "--s", "s", "sub-samples per loss evaluation");
    kv.add(cmd, "--query-convention", "query_convention", "pairs | squared");
    kv.add(cmd, "--mode", "mode", "exact | shots:N");
    kv.add(cmd, "--c-grid", "c_grid", "comma list of C values");
    kv.add(cmd, "--gamma-grid", "gamma_grid", "comma list of gamma values");
    kv.add(cmd, "--poly-degree", "poly_degree", "polynomial kernel degree");
    kv.add(cmd, "--repeats", "repeats", "seeded repetitions to average");
    kv.add(cmd, "--cv-folds", "cv_folds", "cross-validation folds");
    kv.add(cmd, "--svm-train-c", "svm_train_c", "C during alignment training");
    kv.add(cmd, "--svm-tol", "svm_tol", "dual solver tolerance");
    kv.add(cmd, "--theta-init-scale", "theta_init_scale", "initial parameter range");
    kv.add(cmd, "--validation-fraction", "validation_fraction", "validation split fraction");
    kv.add(cmd, "--seed", "seed", "master seed");
    kv.add(cmd, "--out", "output_dir", "output directory");
    kv.add(cmd, "--emit-svg", "emit_svg", "write loss-curve SVGs (true|false)");
    kv.add(cmd, "--save-kernel", "save_kernel", "write the final kernel CSV (true|false)");
    kv.add(cmd, "--sweep-k", "sweep_k", "comma list of k values (sweep)");
    kv.add(cmd, "--sweep-s", "sweep_s", "comma list of s values (sweep)");
    kv.add(cmd, "--sweep-ansatz", "sweep_ansatz", "comma list of ansatze (sweep)");
}

ExperimentPtr build_experiment(const std::string& config_path, const KeyValues& kv) {
    qka_experiment* raw = nullptr;
    if (config_path.empty()) {
        check(qka_experiment_create(&raw));
    } else {
        check(qka_experiment_load(config_path.c_str(), &raw));
    }
    ExperimentPtr experiment(raw);
    for (const auto& [key, value] : kv.pairs()) {
        check(qka_experiment_set(experiment.get(), key.c_str(), value.c_str()));
    }
    check(qka_experiment_validate(experiment.get()));
    return experiment;
}

void print_report(const qka_report* report) {
    static const char* columns[] = {"ansatz",  "k",        "s",  "roc_auc", "f1",
                                    "queries", "speed_up", "optimizer", "cv_std"};
    for (const char* c : columns) std::printf("%-10s ", c);
    std::printf("\n");
    char buf[64];
    for (int r = 0; r < qka_report_rows(report); ++r) {
        for (const char* c : columns) {
            check(qka_report_cell(report, r, c, buf, sizeof(buf)));
            std::printf("%-10s ", buf);
        }
        std::printf("\n");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum kernel alignment laboratory"};
    app.set_version_flag("--version", qka_version());
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "generate the synthetic dataset as CSV");
    std::string gen_out = "data";
    int gen_qubits = 2;
    int gen_train = 96;
    int gen_test = 32;
    double gen_gap = 0.2;
    std::uint64_t gen_seed = 7;
    int gen_reps = 2;
    generate->add_option("--out", gen_out, "output directory")->capture_default_str();
    generate->add_option("--n-qubits", gen_qubits)->capture_default_str();
    generate->add_option("--m-train", gen_train)->capture_default_str();
    generate->add_option("--m-test", gen_test)->capture_default_str();
    generate->add_option("--gap", gen_gap)->capture_default_str();
    generate->add_option("--seed", gen_seed)->capture_default_str();
    generate->add_option("--feature-map-reps", gen_reps)->capture_default_str();

    // train / sweep / baseline share the config surface
    auto* train = app.add_subcommand("train", "single aligned-kernel training run");
    KeyValues train_kv;
    std::string train_config;
    add_common_options(train, train_kv, train_config);

    auto* sweep = app.add_subcommand("sweep", "table reproduction over k/s/ansatz lists");
    KeyValues sweep_kv;
    std::string sweep_config;
    add_common_options(sweep, sweep_kv, sweep_config);

    auto* baseline = app.add_subcommand("baseline", "classical-kernel grid-search baseline");
    KeyValues baseline_kv;
    std::string baseline_config;
    add_common_options(baseline, baseline_kv, baseline_config);

    CLI11_PARSE(app, argc, argv);

    if (generate->parsed()) {
        check(qka_generate_havlicek_files(gen_qubits, gen_train, gen_test, gen_gap, gen_seed,
                                          gen_reps, gen_out.c_str()));
        std::printf("wrote %s/train.csv, %s/test.csv, %s/manifest.json\n", gen_out.c_str(),
                    gen_out.c_str(), gen_out.c_str());
        return 0;
    }

    qka_report* raw = nullptr;
    if (train->parsed()) {
        auto experiment = build_experiment(train_config, train_kv);
        check(qka_run_train(experiment.get(), &raw));
    } else if (sweep->parsed()) {
        auto experiment = build_experiment(sweep_config, sweep_kv);
        check(qka_run_sweep(experiment.get(), &raw));
    } else if (baseline->parsed()) {
        auto experiment = build_experiment(baseline_config, baseline_kv);
        check(qka_run_baseline(experiment.get(), &raw));
    }
    ReportPtr report(raw);
    print_report(report.get());
    return 0;
}
