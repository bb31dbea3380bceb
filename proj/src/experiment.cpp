#include "qka/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qka/metrics.hpp"
#include "qka/rng.hpp"

namespace qka {

namespace fs = std::filesystem;

std::string ansatz_name(AnsatzKind kind) {
    switch (kind) {
    case AnsatzKind::RealAmplitudes: return "RA";
    case AnsatzKind::HardwareEfficientSu2: return "HE";
    }
    return "?";
}

std::string optimizer_name(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::Spsa: return "SPSA";
    case OptimizerKind::Adam: return "ADAM";
    case OptimizerKind::Gd: return "GD";
    }
    return "?";
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("value for '" + key + "' is not a number: '" + value + "'");
    }
}

std::size_t to_size(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v < 0 || v != std::floor(v)) {
        throw ParseError("value for '" + key + "' is not a non-negative integer: '" + value + "'");
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("value for '" + key + "' is not an unsigned integer: '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string v = lower(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("value for '" + key + "' is not a boolean: '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

AnsatzKind parse_ansatz(const std::string& key, const std::string& value) {
    const std::string v = lower(value);
    if (v == "he" || v == "hardware_efficient" || v == "efficient_su2") {
        return AnsatzKind::HardwareEfficientSu2;
    }
    if (v == "ra" || v == "real_amplitudes") return AnsatzKind::RealAmplitudes;
    throw ParseError("unknown ansatz for '" + key + "': '" + value + "'");
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

} // namespace

void apply_config_key(ExperimentConfig& config, const std::string& raw_key,
                      const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key.empty()) throw ParseError("empty config key");

    if (key == "dataset") {
        const std::string v = lower(value);
        if (v == "havlicek") config.dataset.kind = DatasetKind::Havlicek;
        else if (v == "csv") config.dataset.kind = DatasetKind::Csv;
        else throw ParseError("unknown dataset kind: '" + value + "'");
    } else if (key == "n_qubits") {
        config.dataset.n_qubits = static_cast<int>(to_size(key, value));
    } else if (key == "m_train") {
        config.dataset.m_train = to_size(key, value);
    } else if (key == "m_test") {
        config.dataset.m_test = to_size(key, value);
    } else if (key == "gap") {
        config.dataset.gap = to_double(key, value);
    } else if (key == "data_seed") {
        config.dataset.data_seed = to_seed(key, value);
    } else if (key == "train_csv") {
        config.dataset.train_csv = value;
    } else if (key == "test_csv") {
        config.dataset.test_csv = value;
    } else if (key == "feature_map") {
        const std::string v = lower(value);
        if (v == "zz") config.feature_map.kind = FeatureMapKind::ZZ2ndOrder;
        else if (v == "iqp") config.feature_map.kind = FeatureMapKind::Iqp;
        else throw ParseError("unknown feature map: '" + value + "'");
    } else if (key == "feature_map_reps") {
        config.feature_map.reps = static_cast<int>(to_size(key, value));
        config.dataset.feature_map_reps = config.feature_map.reps;
    } else if (key == "bandwidth") {
        if (lower(value) == "auto") config.feature_map.bandwidth = 0.0;
        else config.feature_map.bandwidth = to_double(key, value);
    } else if (key == "ansatz") {
        config.ansatz.kind = parse_ansatz(key, value);
    } else if (key == "ansatz_reps") {
        config.ansatz.reps = static_cast<int>(to_size(key, value));
    } else if (key == "entanglement") {
        const std::string v = lower(value);
        if (v == "linear") config.ansatz.entanglement = Entanglement::Linear;
        else if (v == "full") config.ansatz.entanglement = Entanglement::Full;
        else throw ParseError("unknown entanglement: '" + value + "'");
    } else if (key == "optimizer") {
        const std::string v = lower(value);
        OptimizerConfig base;
        if (v == "spsa") base = OptimizerConfig::spsa_defaults();
        else if (v == "adam") base = OptimizerConfig::adam_defaults();
        else if (v == "gd") base = OptimizerConfig::gd_defaults();
        else throw ParseError("unknown optimizer: '" + value + "'");
        // Keep iteration budget if the user already raised it.
        base.max_iterations = config.optimizer.max_iterations;
        config.optimizer = base;
    } else if (key == "max_iterations") {
        config.optimizer.max_iterations = to_size(key, value);
    } else if (key == "learning_rate") {
        config.optimizer.learning_rate = to_double(key, value);
    } else if (key == "perturbation") {
        config.optimizer.perturbation = to_double(key, value);
    } else if (key == "tolerance") {
        config.optimizer.tolerance = to_double(key, value);
    } else if (key == "fd_step") {
        config.optimizer.fd_step = to_double(key, value);
    } else if (key == "k") {
        config.subset_size = to_size(key, value);
    } else if (key == "s") {
        config.num_subsamples = to_size(key, value);
    } else if (key == "query_convention") {
        const std::string v = lower(value);
        if (v == "pairs") config.convention = QueryConvention::Pairs;
        else if (v == "squared") config.convention = QueryConvention::Squared;
        else throw ParseError("unknown query convention: '" + value + "'");
    } else if (key == "mode") {
        const std::string v = lower(value);
        if (v == "exact") {
            config.shots_mode = false;
            config.shots = 0;
        } else if (v.rfind("shots:", 0) == 0) {
            config.shots_mode = true;
            config.shots = static_cast<int>(to_size(key, v.substr(6)));
            if (config.shots < 1) throw ParseError("shots must be >= 1");
        } else {
            throw ParseError("mode must be 'exact' or 'shots:N', got '" + value + "'");
        }
    } else if (key == "c_grid") {
        config.c_grid.clear();
        for (const auto& item : split_list(value)) config.c_grid.push_back(to_double(key, item));
    } else if (key == "gamma_grid") {
        config.gamma_grid.clear();
        for (const auto& item : split_list(value)) {
            config.gamma_grid.push_back(to_double(key, item));
        }
    } else if (key == "poly_degree") {
        config.poly_degree = static_cast<int>(to_size(key, value));
    } else if (key == "repeats") {
        config.repeats = to_size(key, value);
    } else if (key == "cv_folds") {
        config.cv_folds = to_size(key, value);
    } else if (key == "svm_train_c") {
        config.svm_train_c = to_double(key, value);
    } else if (key == "svm_tol") {
        config.svm_tol = to_double(key, value);
    } else if (key == "theta_init_scale") {
        config.theta_init_scale = to_double(key, value);
    } else if (key == "validation_fraction") {
        config.validation_fraction = to_double(key, value);
    } else if (key == "seed") {
        config.seed = to_seed(key, value);
    } else if (key == "output_dir") {
        config.output_dir = value;
    } else if (key == "emit_svg") {
        config.emit_svg = to_bool(key, value);
    } else if (key == "save_kernel") {
        config.save_kernel = to_bool(key, value);
    } else if (key == "sweep_k") {
        config.sweep_k.clear();
        for (const auto& item : split_list(value)) config.sweep_k.push_back(to_size(key, item));
    } else if (key == "sweep_s") {
        config.sweep_s.clear();
        for (const auto& item : split_list(value)) config.sweep_s.push_back(to_size(key, item));
    } else if (key == "sweep_ansatz") {
        config.sweep_ansatz.clear();
        for (const auto& item : split_list(value)) {
            config.sweep_ansatz.push_back(parse_ansatz(key, item));
        }
    } else {
        throw ParseError("unknown config key: '" + key + "'");
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);

    ExperimentConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            apply_config_key(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

void validate_config(const ExperimentConfig& config) {
    if (config.subset_size < 1) throw InvalidArgument("k must be >= 1");
    if (config.num_subsamples < 1) throw InvalidArgument("s must be >= 1");
    if (config.repeats < 1) throw InvalidArgument("repeats must be >= 1");
    if (config.optimizer.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(config.optimizer.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
    if (config.optimizer.kind == OptimizerKind::Spsa && !(config.optimizer.perturbation > 0.0)) {
        throw InvalidArgument("perturbation must be > 0");
    }
    if (config.c_grid.empty()) throw InvalidArgument("c_grid must not be empty");
    if (!(config.theta_init_scale > 0.0)) throw InvalidArgument("theta_init_scale must be > 0");
    if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0)) {
        throw InvalidArgument("validation_fraction must be in (0, 1)");
    }
    if (config.shots_mode && config.shots < 1) throw InvalidArgument("shots must be >= 1");
    if (config.dataset.kind == DatasetKind::Csv) {
        if (config.dataset.train_csv.empty() || config.dataset.test_csv.empty()) {
            throw InvalidArgument("csv dataset needs train_csv and test_csv");
        }
    } else {
        if (!(config.dataset.gap > 0.0 && config.dataset.gap < 1.0)) {
            throw InvalidArgument("gap must be in (0, 1)");
        }
        if (config.feature_map.kind == FeatureMapKind::ZZ2ndOrder &&
            config.dataset.n_qubits < 2) {
            throw InvalidArgument("ZZ feature map needs >= 2 qubits");
        }
    }
    if (config.ansatz.reps < 1 || config.feature_map.reps < 1) {
        throw InvalidArgument("reps must be >= 1");
    }
}

std::pair<Dataset, Dataset> resolve_dataset(const ExperimentConfig& config) {
    if (config.dataset.kind == DatasetKind::Csv) {
        Dataset train = load_embeddings_csv(config.dataset.train_csv);
        Dataset test = load_embeddings_csv(config.dataset.test_csv);
        if (train.dimension() != test.dimension()) {
            throw InvalidArgument("train/test CSV feature dimensions differ");
        }
        return {std::move(train), std::move(test)};
    }
    HavlicekParams params;
    params.n_qubits = config.dataset.n_qubits;
    params.m_train = config.dataset.m_train;
    params.m_test = config.dataset.m_test;
    params.gap = config.dataset.gap;
    params.feature_map_reps = config.dataset.feature_map_reps;
    params.seed = config.dataset.data_seed != 0
                      ? config.dataset.data_seed
                      : derive_seed(config.seed, fnv1a("data"));
    return generate_havlicek(params);
}

namespace {

struct RepeatOutcome {
    double roc_auc = 0.0;
    double f1 = 0.0;
    std::uint64_t queries = 0;
    double cv_std = 0.0;
    double chosen_c = 0.0;
    std::uint64_t seed = 0;
    std::size_t stop_iteration = 0;
};

struct RowDetail {
    ResultRow row;
    std::vector<RepeatOutcome> repeats;
};

CircuitPlan plan_for(const ExperimentConfig& config, std::size_t dimension) {
    CircuitPlan plan;
    plan.ansatz = config.ansatz;
    plan.feature_map = config.feature_map;
    plan.ansatz.n_qubits = static_cast<int>(dimension);
    plan.feature_map.n_qubits = static_cast<int>(dimension);
    validate_plan(plan);
    return plan;
}

std::vector<double> draw_theta_init(const ExperimentConfig& config, const CircuitPlan& plan) {
    Rng rng(derive_seed(config.seed, fnv1a("theta-init")));
    std::vector<double> theta(parameter_count(plan.ansatz));
    for (double& t : theta) t = rng.uniform(-config.theta_init_scale, config.theta_init_scale);
    return theta;
}

double cv_metric_std(const Dataset& train, const KernelMatrix& kernel, double chosen_c,
                     double svm_tol, std::size_t n_folds, std::uint64_t fold_seed) {
    const FoldPlan plan = stratified_folds(train, n_folds, fold_seed);
    const auto folds = plan.folds();
    std::vector<double> fold_aucs;
    for (const auto& held : folds) {
        std::vector<char> is_held(train.size(), 0);
        for (std::size_t r : held) is_held[r] = 1;
        std::vector<std::size_t> fit_rows;
        for (std::size_t i = 0; i < train.size(); ++i) {
            if (!is_held[i]) fit_rows.push_back(i);
        }
        Matrix fit_kernel(fit_rows.size(), fit_rows.size());
        for (std::size_t a = 0; a < fit_rows.size(); ++a) {
            for (std::size_t b = 0; b < fit_rows.size(); ++b) {
                fit_kernel(a, b) = kernel.values(fit_rows[a], fit_rows[b]);
            }
        }
        Matrix held_kernel(held.size(), fit_rows.size());
        for (std::size_t a = 0; a < held.size(); ++a) {
            for (std::size_t b = 0; b < fit_rows.size(); ++b) {
                held_kernel(a, b) = kernel.values(held[a], fit_rows[b]);
            }
        }
        std::vector<int> fit_labels;
        std::vector<int> held_labels;
        for (std::size_t r : fit_rows) fit_labels.push_back(train.labels[r]);
        for (std::size_t r : held) held_labels.push_back(train.labels[r]);

        SvmOptions opts;
        opts.c = chosen_c;
        opts.tol = svm_tol;
        opts.psd_check = false;
        const auto solution = solve_dual(fit_kernel, fit_labels, opts);
        fold_aucs.push_back(roc_auc(decision_scores(solution, held_kernel), held_labels));
    }
    return sample_std(fold_aucs);
}

RowDetail run_row(const ExperimentConfig& config, const Dataset& train, const Dataset& test,
                  const std::string& row_dir) {
    validate_config(config);
    if (config.subset_size > train.size()) {
        throw InvalidArgument("k exceeds the training set size");
    }

    const CircuitPlan plan = plan_for(config, train.dimension());
    const std::vector<double> theta_init = draw_theta_init(config, plan);

    std::vector<std::size_t> train_rows(train.size());
    std::vector<std::size_t> test_rows(test.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) train_rows[i] = i;
    for (std::size_t i = 0; i < test_rows.size(); ++i) test_rows[i] = i;

    if (!row_dir.empty()) fs::create_directories(row_dir);

    RowDetail detail;
    std::vector<double> aucs;
    std::vector<double> f1s;
    std::vector<double> query_counts;
    std::vector<double> cv_stds;

    const std::uint64_t fold_seed = derive_seed(config.seed, fnv1a("cv-folds"));

    for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::uint64_t run_seed = derive_seed(config.seed, fnv1a("repeat"), r);

        TrainOptions options;
        options.subset_size = config.subset_size;
        options.num_subsamples = config.num_subsamples;
        options.optimizer = config.optimizer;
        options.svm_c = config.svm_train_c;
        options.svm_tol = config.svm_tol;
        options.convention = config.convention;
        options.mode = config.shots_mode
                           ? KernelMode::Shots(config.shots, derive_seed(run_seed, fnv1a("shots")))
                           : KernelMode::Exact();
        options.seed = run_seed;

        QueryLedger ledger;
        const TrainRecord record = ::qka::train(train, plan, theta_init, options, ledger);
        const FinalizeResult fin =
            finalize(train, plan, record.theta_opt, config.c_grid, config.svm_tol, options.mode,
                     ledger, derive_seed(run_seed, fnv1a("model-select")),
                     config.validation_fraction);

        QueryLedger score_ledger;
        const Matrix cross =
            build_cross_kernel(test.features, test_rows, train.features, train_rows, plan,
                               record.theta_opt, options.mode, score_ledger, "score");
        const auto scores = decision_scores(fin.solution, cross);
        std::vector<int> predictions(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) predictions[i] = scores[i] >= 0 ? 1 : -1;

        RepeatOutcome outcome;
        outcome.roc_auc = roc_auc(scores, test.labels);
        outcome.f1 = f1_score(predictions, test.labels);
        outcome.queries =
            record.queries_at_stop + query_cost(train.size(), config.convention);
        outcome.cv_std = cv_metric_std(train, fin.kernel, fin.chosen_c, config.svm_tol,
                                       config.cv_folds, fold_seed);
        outcome.chosen_c = fin.chosen_c;
        outcome.seed = run_seed;
        outcome.stop_iteration = record.stop_iteration;

        if (!row_dir.empty()) {
            const auto base = fs::path(row_dir);
            const std::string tag = std::to_string(r);
            save_train_record_json(record, (base / ("train_record_r" + tag + ".json")).string());
            save_loss_curve_csv(record, (base / ("loss_curve_r" + tag + ".csv")).string());
            if (config.emit_svg) {
                save_loss_curve_svg(record, (base / ("loss_curve_r" + tag + ".svg")).string());
            }
            if (config.save_kernel && r == 0) {
                save_kernel_csv(fin.kernel, (base / "kernel.csv").string());
            }
        }

        aucs.push_back(outcome.roc_auc);
        f1s.push_back(outcome.f1);
        query_counts.push_back(static_cast<double>(outcome.queries));
        cv_stds.push_back(outcome.cv_std);
        detail.repeats.push_back(outcome);
    }

    ResultRow row;
    row.ansatz = ansatz_name(config.ansatz.kind);
    row.optimizer = optimizer_name(config.optimizer.kind);
    row.k = config.subset_size;
    row.s = config.num_subsamples;
    row.roc_auc = mean(aucs);
    row.f1 = mean(f1s);
    row.queries = mean(query_counts);
    row.cv_std = mean(cv_stds);
    row.speed_up = (config.subset_size == train.size() && config.num_subsamples == 1)
                       ? 1.0
                       : std::numeric_limits<double>::quiet_NaN();
    detail.row = row;
    return detail;
}

nlohmann::json config_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["dataset"] = config.dataset.kind == DatasetKind::Havlicek ? "havlicek" : "csv";
    j["n_qubits"] = config.dataset.n_qubits;
    j["m_train"] = config.dataset.m_train;
    j["m_test"] = config.dataset.m_test;
    j["gap"] = config.dataset.gap;
    j["data_seed"] = config.dataset.data_seed;
    j["train_csv"] = config.dataset.train_csv;
    j["test_csv"] = config.dataset.test_csv;
    j["feature_map"] = config.feature_map.kind == FeatureMapKind::ZZ2ndOrder ? "zz" : "iqp";
    j["feature_map_reps"] = config.feature_map.reps;
    j["bandwidth"] = config.feature_map.bandwidth > 0.0
                         ? nlohmann::json(config.feature_map.bandwidth)
                         : nlohmann::json("auto");
    j["ansatz"] = ansatz_name(config.ansatz.kind);
    j["ansatz_reps"] = config.ansatz.reps;
    j["entanglement"] = config.ansatz.entanglement == Entanglement::Linear ? "linear" : "full";
    j["optimizer"] = optimizer_name(config.optimizer.kind);
    j["max_iterations"] = config.optimizer.max_iterations;
    j["learning_rate"] = config.optimizer.learning_rate;
    j["perturbation"] = config.optimizer.perturbation;
    j["tolerance"] = config.optimizer.tolerance;
    j["fd_step"] = config.optimizer.fd_step;
    j["k"] = config.subset_size;
    j["s"] = config.num_subsamples;
    j["query_convention"] = config.convention == QueryConvention::Pairs ? "pairs" : "squared";
    j["mode"] = config.shots_mode ? "shots:" + std::to_string(config.shots) : "exact";
    j["c_grid"] = config.c_grid;
    j["gamma_grid"] = config.gamma_grid;
    j["poly_degree"] = config.poly_degree;
    j["repeats"] = config.repeats;
    j["cv_folds"] = config.cv_folds;
    j["svm_train_c"] = config.svm_train_c;
    j["svm_tol"] = config.svm_tol;
    j["theta_init_scale"] = config.theta_init_scale;
    j["validation_fraction"] = config.validation_fraction;
    j["seed"] = config.seed;
    j["output_dir"] = config.output_dir;
    return j;
}

nlohmann::json detail_json(const std::string& name, const RowDetail& detail) {
    nlohmann::json j;
    j["name"] = name;
    j["ansatz"] = detail.row.ansatz;
    j["optimizer"] = detail.row.optimizer;
    j["k"] = detail.row.k;
    j["s"] = detail.row.s;
    j["roc_auc"] = detail.row.roc_auc;
    j["f1"] = detail.row.f1;
    j["queries"] = detail.row.queries;
    j["cv_std"] = detail.row.cv_std;
    auto& repeats = j["repeats"] = nlohmann::json::array();
    for (const RepeatOutcome& r : detail.repeats) {
        nlohmann::json jr;
        jr["seed"] = r.seed;
        jr["roc_auc"] = r.roc_auc;
        jr["f1"] = r.f1;
        jr["queries"] = r.queries;
        jr["cv_std"] = r.cv_std;
        jr["chosen_c"] = r.chosen_c;
        jr["stop_iteration"] = r.stop_iteration;
        repeats.push_back(std::move(jr));
    }
    return j;
}

void write_manifest(const nlohmann::json& manifest, const std::string& dir) {
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw IoError("cannot write manifest under " + dir);
    out << manifest.dump(2) << "\n";
}

// Cleanup for a run that threw: wipe the directory when this run created it,
// otherwise remove only the artifacts this runner writes. A pre-existing
// directory the user pointed output_dir at is never deleted wholesale.
void remove_partial_outputs(const std::string& dir, bool created_by_us) {
    std::error_code ec;
    if (dir.empty()) return;
    if (created_by_us) {
        fs::remove_all(dir, ec);
        return;
    }
    const fs::path base(dir);
    fs::remove(base / "results.csv", ec);
    fs::remove(base / "manifest.json", ec);
    fs::remove(base / "kernel.csv", ec);
    fs::remove_all(base / "rows", ec);
    for (int r = 0; r < 1024; ++r) {
        const std::string tag = std::to_string(r);
        const bool any = fs::remove(base / ("train_record_r" + tag + ".json"), ec) |
                         fs::remove(base / ("loss_curve_r" + tag + ".csv"), ec) |
                         fs::remove(base / ("loss_curve_r" + tag + ".svg"), ec);
        if (!any) break;
    }
}

} // namespace

ResultRow run_experiment(const ExperimentConfig& config, const std::string& row_dir) {
    const bool fresh_dir = !row_dir.empty() && !fs::exists(row_dir);
    const auto [train, test] = resolve_dataset(config);
    try {
        return run_row(config, train, test, row_dir).row;
    } catch (...) {
        remove_partial_outputs(row_dir, fresh_dir);
        throw;
    }
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "ansatz,k,s,roc_auc,f1,queries,speed_up,optimizer,cv_std\n";
    for (const ResultRow& r : rows) {
        out << r.ansatz << ',' << r.k << ',' << r.s << ',' << fmt("%.4f", r.roc_auc) << ','
            << fmt("%.4f", r.f1) << ',' << fmt("%.2f", r.queries) << ','
            << fmt("%.2f", r.speed_up) << ',' << r.optimizer << ',' << fmt("%.4f", r.cv_std)
            << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

ResultRow run_single(const ExperimentConfig& config) {
    validate_config(config);
    const bool fresh_dir = !fs::exists(config.output_dir);
    const auto [train, test] = resolve_dataset(config);
    fs::create_directories(config.output_dir);

    RowDetail detail;
    try {
        detail = run_row(config, train, test, config.output_dir);
    } catch (...) {
        remove_partial_outputs(config.output_dir, fresh_dir);
        throw;
    }

    write_results_csv({detail.row}, (fs::path(config.output_dir) / "results.csv").string());
    nlohmann::json manifest;
    manifest["command"] = "train";
    manifest["config"] = config_json(config);
    manifest["rows"] = nlohmann::json::array({detail_json("run", detail)});
    write_manifest(manifest, config.output_dir);
    return detail.row;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
    validate_config(config);
    const auto [train, test] = resolve_dataset(config);

    std::vector<AnsatzKind> ansatze =
        config.sweep_ansatz.empty() ? std::vector<AnsatzKind>{config.ansatz.kind}
                                    : config.sweep_ansatz;
    std::vector<std::size_t> ks =
        config.sweep_k.empty() ? std::vector<std::size_t>{config.subset_size} : config.sweep_k;
    std::vector<std::size_t> ss =
        config.sweep_s.empty() ? std::vector<std::size_t>{config.num_subsamples} : config.sweep_s;

    struct Cell {
        AnsatzKind ansatz;
        std::size_t k;
        std::size_t s;
    };
    std::vector<Cell> cells;
    for (AnsatzKind a : ansatze) {
        // The full-kernel baseline anchors every speed-up ratio.
        cells.push_back({a, train.size(), 1});
        for (std::size_t k : ks) {
            for (std::size_t s : ss) {
                if (k == train.size() && s == 1) continue;
                cells.push_back({a, k, s});
            }
        }
    }

    fs::create_directories(config.output_dir);

    std::vector<RowDetail> details;
    std::vector<std::string> names;
    for (const Cell& cell : cells) {
        ExperimentConfig row_config = config;
        row_config.ansatz.kind = cell.ansatz;
        row_config.subset_size = cell.k;
        row_config.num_subsamples = cell.s;
        const std::string name = ansatz_name(cell.ansatz) + "_k" + std::to_string(cell.k) +
                                 "_s" + std::to_string(cell.s);
        const std::string row_dir = (fs::path(config.output_dir) / "rows" / name).string();
        try {
            details.push_back(run_row(row_config, train, test, row_dir));
        } catch (...) {
            remove_partial_outputs(row_dir, true);
            throw;
        }
        names.push_back(name);
    }

    // Speed-ups against the matching full-kernel baseline.
    for (std::size_t i = 0; i < details.size(); ++i) {
        const ResultRow& row = details[i].row;
        for (const RowDetail& candidate : details) {
            const ResultRow& base = candidate.row;
            if (base.ansatz == row.ansatz && base.optimizer == row.optimizer &&
                base.k == train.size() && base.s == 1) {
                details[i].row.speed_up = base.queries / row.queries;
                break;
            }
        }
    }

    // Paper-style ordering: by ansatz as listed, then descending k, ascending s.
    std::vector<std::size_t> order(details.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto ansatz_rank = [&](const std::string& name) {
        for (std::size_t i = 0; i < ansatze.size(); ++i) {
            if (ansatz_name(ansatze[i]) == name) return i;
        }
        return ansatze.size();
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const ResultRow& ra = details[a].row;
        const ResultRow& rb = details[b].row;
        if (ra.ansatz != rb.ansatz) return ansatz_rank(ra.ansatz) < ansatz_rank(rb.ansatz);
        if (ra.k != rb.k) return ra.k > rb.k;
        return ra.s < rb.s;
    });

    std::vector<ResultRow> rows;
    nlohmann::json row_manifest = nlohmann::json::array();
    for (std::size_t idx : order) {
        rows.push_back(details[idx].row);
        row_manifest.push_back(detail_json(names[idx], details[idx]));
    }

    write_results_csv(rows, (fs::path(config.output_dir) / "results.csv").string());
    nlohmann::json manifest;
    manifest["command"] = "sweep";
    manifest["config"] = config_json(config);
    manifest["rows"] = std::move(row_manifest);
    write_manifest(manifest, config.output_dir);
    return rows;
}

namespace {

const char* classical_kernel_name(ClassicalKernelKind kind) {
    switch (kind) {
    case ClassicalKernelKind::Linear: return "linear";
    case ClassicalKernelKind::Poly: return "poly";
    case ClassicalKernelKind::Rbf: return "rbf";
    }
    return "?";
}

double classical_entry(ClassicalKernelKind kind, std::span<const double> a,
                       std::span<const double> b, double gamma, int degree) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    switch (kind) {
    case ClassicalKernelKind::Linear: return dot;
    case ClassicalKernelKind::Poly: return std::pow(gamma * dot, degree);
    case ClassicalKernelKind::Rbf: {
        double sq = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
        return std::exp(-gamma * sq);
    }
    }
    return 0.0;
}

Matrix classical_gram(const Dataset& rows_ds, std::span<const std::size_t> rows,
                      const Dataset& cols_ds, std::span<const std::size_t> cols,
                      ClassicalKernelKind kind, double gamma, int degree) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(i, j) = classical_entry(kind, rows_ds.features.row(rows[i]),
                                        cols_ds.features.row(cols[j]), gamma, degree);
        }
    }
    return out;
}

} // namespace

ResultRow classical_baseline(const Dataset& train, const Dataset& test,
                             const ClassicalGrids& grids) {
    validate_dataset(train);
    validate_dataset(test);
    if (train.dimension() != test.dimension()) {
        throw InvalidArgument("train/test dimensions differ");
    }
    if (grids.c_values.empty()) throw InvalidArgument("empty C grid");
    if (grids.gamma_values.empty()) throw InvalidArgument("empty gamma grid");

    const auto val_rows = stratified_sample(train.labels, grids.validation_fraction,
                                            derive_seed(grids.seed, fnv1a("baseline-val")));
    std::vector<char> is_val(train.size(), 0);
    for (std::size_t r : val_rows) is_val[r] = 1;
    std::vector<std::size_t> fit_rows;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (!is_val[i]) fit_rows.push_back(i);
    }
    std::vector<int> fit_labels;
    std::vector<int> val_labels;
    for (std::size_t r : fit_rows) fit_labels.push_back(train.labels[r]);
    for (std::size_t r : val_rows) val_labels.push_back(train.labels[r]);

    if (grids.kernels.empty()) throw InvalidArgument("empty kernel grid");

    struct Candidate {
        ClassicalKernelKind kind;
        double c;
        double gamma;
    };
    Candidate best{grids.kernels.front(), grids.c_values.front(), 0.0};
    double best_auc = -1.0;

    // Classical grams are not unit-normalized, so the KKT gap lives on a scale
    // of C * max K_ii; a fixed absolute tolerance would over-solve (or stall)
    // the large-gamma polynomial cells by orders of magnitude.
    const auto classical_solve = [](const Matrix& gram, std::span<const int> labels, double c) {
        double max_diag = 1.0;
        for (std::size_t i = 0; i < gram.rows(); ++i) {
            max_diag = std::max(max_diag, std::abs(gram(i, i)));
        }
        SvmOptions opts;
        opts.c = c;
        opts.tol = 1e-4 * std::max(1.0, c * max_diag);
        opts.psd_check = false;
        return solve_dual(gram, labels, opts);
    };

    for (ClassicalKernelKind kind : grids.kernels) {
        const std::vector<double> gammas =
            kind == ClassicalKernelKind::Linear ? std::vector<double>{0.0} : grids.gamma_values;
        for (double c : grids.c_values) {
            for (double gamma : gammas) {
                const Matrix gram = classical_gram(train, fit_rows, train, fit_rows, kind,
                                                   gamma, grids.poly_degree);
                const auto solution = classical_solve(gram, fit_labels, c);
                const Matrix cross = classical_gram(train, val_rows, train, fit_rows, kind,
                                                    gamma, grids.poly_degree);
                const double auc = roc_auc(decision_scores(solution, cross), val_labels);
                if (auc > best_auc) {
                    best_auc = auc;
                    best = {kind, c, gamma};
                }
            }
        }
    }

    std::vector<std::size_t> all_train(train.size());
    std::vector<std::size_t> all_test(test.size());
    for (std::size_t i = 0; i < all_train.size(); ++i) all_train[i] = i;
    for (std::size_t i = 0; i < all_test.size(); ++i) all_test[i] = i;

    const Matrix gram = classical_gram(train, all_train, train, all_train, best.kind,
                                       best.gamma, grids.poly_degree);
    const auto solution = classical_solve(gram, train.labels, best.c);
    const Matrix cross = classical_gram(test, all_test, train, all_train, best.kind, best.gamma,
                                        grids.poly_degree);
    const auto scores = decision_scores(solution, cross);
    std::vector<int> predictions(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) predictions[i] = scores[i] >= 0 ? 1 : -1;

    ResultRow row;
    row.ansatz = std::string("classical:") + classical_kernel_name(best.kind);
    row.optimizer = "grid";
    row.k = train.size();
    row.s = 1;
    row.roc_auc = roc_auc(scores, test.labels);
    row.f1 = f1_score(predictions, test.labels);
    row.queries = 0.0;
    row.speed_up = std::numeric_limits<double>::quiet_NaN();
    row.cv_std = 0.0;
    return row;
}

ResultRow run_classical_baseline(const ExperimentConfig& config) {
    validate_config(config);
    const auto [train, test] = resolve_dataset(config);

    ClassicalGrids grids;
    grids.c_values = config.c_grid;
    grids.gamma_values = config.gamma_grid;
    grids.poly_degree = config.poly_degree;
    grids.validation_fraction = config.validation_fraction;
    grids.seed = config.seed;

    const ResultRow row = classical_baseline(train, test, grids);
    fs::create_directories(config.output_dir);
    write_results_csv({row}, (fs::path(config.output_dir) / "results.csv").string());
    nlohmann::json manifest;
    manifest["command"] = "baseline";
    manifest["config"] = config_json(config);
    manifest["selected_kernel"] = row.ansatz;
    write_manifest(manifest, config.output_dir);
    return row;
}

} // namespace qka
