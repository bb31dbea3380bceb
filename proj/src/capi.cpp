#include "qka.h"

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "qka/errors.hpp"
#include "qka/experiment.hpp"

// Opaque handle definitions. Each wraps the corresponding C++ value; the C
// layer owns nothing but the heap allocations it hands out.

struct qka_dataset {
    qka::Dataset value;
};

struct qka_experiment {
    qka::ExperimentConfig config;
};

struct qka_report {
    std::vector<qka::ResultRow> rows;
};

namespace {

thread_local std::string g_last_error;

qka_status fail(qka_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
qka_status guarded(Fn&& fn) {
    try {
        fn();
        return QKA_OK;
    } catch (const qka::InvalidArgument& e) {
        return fail(QKA_ERROR_INVALID_ARGUMENT, e.what());
    } catch (const qka::ParseError& e) {
        return fail(QKA_ERROR_PARSE, e.what());
    } catch (const qka::IoError& e) {
        return fail(QKA_ERROR_IO, e.what());
    } catch (const qka::NumericError& e) {
        return fail(QKA_ERROR_NUMERIC, e.what());
    } catch (const std::exception& e) {
        return fail(QKA_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(QKA_ERROR_INTERNAL, "unknown error");
    }
}

qka_status require(bool condition, const char* message) {
    return condition ? QKA_OK : fail(QKA_ERROR_INVALID_ARGUMENT, message);
}

std::string render_cell(const qka::ResultRow& row, const std::string& column) {
    char buf[64];
    if (column == "ansatz") return row.ansatz;
    if (column == "optimizer") return row.optimizer;
    if (column == "k") return std::to_string(row.k);
    if (column == "s") return std::to_string(row.s);
    if (column == "roc_auc") {
        std::snprintf(buf, sizeof(buf), "%.4f", row.roc_auc);
        return buf;
    }
    if (column == "f1") {
        std::snprintf(buf, sizeof(buf), "%.4f", row.f1);
        return buf;
    }
    if (column == "queries") {
        std::snprintf(buf, sizeof(buf), "%.2f", row.queries);
        return buf;
    }
    if (column == "speed_up") {
        std::snprintf(buf, sizeof(buf), "%.2f", row.speed_up);
        return buf;
    }
    if (column == "cv_std") {
        std::snprintf(buf, sizeof(buf), "%.4f", row.cv_std);
        return buf;
    }
    throw qka::InvalidArgument("unknown report column: " + column);
}

} // namespace

extern "C" {

const char* qka_version(void) { return "0.1.0"; }

const char* qka_status_name(qka_status status) {
    switch (status) {
    case QKA_OK: return "ok";
    case QKA_ERROR_INVALID_ARGUMENT: return "invalid_argument";
    case QKA_ERROR_PARSE: return "parse_error";
    case QKA_ERROR_IO: return "io_error";
    case QKA_ERROR_NUMERIC: return "numeric_error";
    case QKA_ERROR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* qka_last_error(void) { return g_last_error.c_str(); }

qka_status qka_generate_havlicek(int n_qubits, int m_train, int m_test, double gap,
                                 uint64_t seed, int feature_map_reps,
                                 qka_dataset** out_train, qka_dataset** out_test) {
    if (auto s = require(out_train && out_test, "output pointers are NULL")) return s;
    *out_train = nullptr;
    *out_test = nullptr;
    return guarded([&] {
        qka::HavlicekParams params;
        params.n_qubits = n_qubits;
        params.m_train = static_cast<std::size_t>(m_train);
        params.m_test = static_cast<std::size_t>(m_test);
        params.gap = gap;
        params.seed = seed;
        params.feature_map_reps = feature_map_reps;
        if (m_train < 2 || m_test < 2) throw qka::InvalidArgument("splits need >= 2 points");
        auto [train, test] = qka::generate_havlicek(params);
        *out_train = new qka_dataset{std::move(train)};
        *out_test = new qka_dataset{std::move(test)};
    });
}

qka_status qka_generate_havlicek_files(int n_qubits, int m_train, int m_test, double gap,
                                       uint64_t seed, int feature_map_reps,
                                       const char* out_dir) {
    if (auto s = require(out_dir != nullptr, "out_dir is NULL")) return s;
    return guarded([&] {
        qka::HavlicekParams params;
        params.n_qubits = n_qubits;
        params.m_train = static_cast<std::size_t>(m_train);
        params.m_test = static_cast<std::size_t>(m_test);
        params.gap = gap;
        params.seed = seed;
        params.feature_map_reps = feature_map_reps;
        if (m_train < 2 || m_test < 2) throw qka::InvalidArgument("splits need >= 2 points");
        qka::generate_havlicek_files(params, out_dir);
    });
}

qka_status qka_dataset_load_csv(const char* path, qka_dataset** out) {
    if (auto s = require(path && out, "NULL argument")) return s;
    *out = nullptr;
    return guarded([&] { *out = new qka_dataset{qka::load_embeddings_csv(path)}; });
}

qka_status qka_dataset_save_csv(const qka_dataset* dataset, const char* path) {
    if (auto s = require(dataset && path, "NULL argument")) return s;
    return guarded([&] { qka::save_dataset_csv(dataset->value, path); });
}

int qka_dataset_rows(const qka_dataset* dataset) {
    return dataset ? static_cast<int>(dataset->value.size()) : 0;
}

int qka_dataset_features(const qka_dataset* dataset) {
    return dataset ? static_cast<int>(dataset->value.dimension()) : 0;
}

void qka_dataset_free(qka_dataset* dataset) { delete dataset; }

qka_status qka_experiment_create(qka_experiment** out) {
    if (auto s = require(out != nullptr, "output pointer is NULL")) return s;
    *out = nullptr;
    return guarded([&] { *out = new qka_experiment{}; });
}

qka_status qka_experiment_load(const char* config_path, qka_experiment** out) {
    if (auto s = require(config_path && out, "NULL argument")) return s;
    *out = nullptr;
    return guarded([&] { *out = new qka_experiment{qka::parse_config_file(config_path)}; });
}

qka_status qka_experiment_set(qka_experiment* experiment, const char* key, const char* value) {
    if (auto s = require(experiment && key && value, "NULL argument")) return s;
    return guarded([&] { qka::apply_config_key(experiment->config, key, value); });
}

qka_status qka_experiment_validate(const qka_experiment* experiment) {
    if (auto s = require(experiment != nullptr, "experiment is NULL")) return s;
    return guarded([&] { qka::validate_config(experiment->config); });
}

void qka_experiment_free(qka_experiment* experiment) { delete experiment; }

qka_status qka_run_train(const qka_experiment* experiment, qka_report** out) {
    if (auto s = require(experiment && out, "NULL argument")) return s;
    *out = nullptr;
    return guarded([&] {
        auto row = qka::run_single(experiment->config);
        *out = new qka_report{{row}};
    });
}

qka_status qka_run_sweep(const qka_experiment* experiment, qka_report** out) {
    if (auto s = require(experiment && out, "NULL argument")) return s;
    *out = nullptr;
    return guarded([&] { *out = new qka_report{qka::run_sweep(experiment->config)}; });
}

qka_status qka_run_baseline(const qka_experiment* experiment, qka_report** out) {
    if (auto s = require(experiment && out, "NULL argument")) return s;
    *out = nullptr;
    return guarded([&] {
        auto row = qka::run_classical_baseline(experiment->config);
        *out = new qka_report{{row}};
    });
}

int qka_report_rows(const qka_report* report) {
    return report ? static_cast<int>(report->rows.size()) : 0;
}

qka_status qka_report_cell(const qka_report* report, int row, const char* column, char* buf,
                           int buf_len) {
    if (auto s = require(report && column && buf && buf_len > 0, "NULL argument")) return s;
    if (row < 0 || row >= static_cast<int>(report->rows.size())) {
        return fail(QKA_ERROR_INVALID_ARGUMENT, "report row out of range");
    }
    return guarded([&] {
        const std::string cell = render_cell(report->rows[static_cast<std::size_t>(row)], column);
        std::snprintf(buf, static_cast<std::size_t>(buf_len), "%s", cell.c_str());
    });
}

void qka_report_free(qka_report* report) { delete report; }

} // extern "C"
