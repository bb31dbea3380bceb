/*
 * qka - variational fidelity-kernel training with sub-sampled kernel
 * alignment, behind a plain C interface.
 *
 * All functions return qka_status; QKA_OK is 0. On failure a thread-local
 * message is available via qka_last_error(). Every object handed out through
 * an out-parameter is owned by the caller and released with the matching
 * _free function.
 */

#ifndef QKA_H
#define QKA_H

#include <stdint.h>

#if defined(_WIN32)
#define QKA_API __declspec(dllexport)
#else
#define QKA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qka_status {
    QKA_OK = 0,
    QKA_ERROR_INVALID_ARGUMENT = 1,
    QKA_ERROR_PARSE = 2,
    QKA_ERROR_IO = 3,
    QKA_ERROR_NUMERIC = 4,
    QKA_ERROR_INTERNAL = 5
} qka_status;

typedef struct qka_dataset qka_dataset;       /* feature matrix + labels */
typedef struct qka_experiment qka_experiment; /* experiment configuration */
typedef struct qka_report qka_report;         /* result table of a run */

QKA_API const char* qka_version(void);
QKA_API const char* qka_status_name(qka_status status);

/* Message of the most recent failure on this thread; valid until the next
 * failing call. Never NULL. */
QKA_API const char* qka_last_error(void);

/* ---- datasets ---- */

QKA_API qka_status qka_generate_havlicek(int n_qubits, int m_train, int m_test, double gap,
                                         uint64_t seed, int feature_map_reps,
                                         qka_dataset** out_train, qka_dataset** out_test);

/* Writes train.csv, test.csv and manifest.json under out_dir. */
QKA_API qka_status qka_generate_havlicek_files(int n_qubits, int m_train, int m_test,
                                               double gap, uint64_t seed,
                                               int feature_map_reps, const char* out_dir);

QKA_API qka_status qka_dataset_load_csv(const char* path, qka_dataset** out);
QKA_API qka_status qka_dataset_save_csv(const qka_dataset* dataset, const char* path);
QKA_API int qka_dataset_rows(const qka_dataset* dataset);
QKA_API int qka_dataset_features(const qka_dataset* dataset);
QKA_API void qka_dataset_free(qka_dataset* dataset);

/* ---- experiment configuration ---- */

QKA_API qka_status qka_experiment_create(qka_experiment** out);
QKA_API qka_status qka_experiment_load(const char* config_path, qka_experiment** out);
/* Keys are the documented config-file keys (also the CLI long flags). */
QKA_API qka_status qka_experiment_set(qka_experiment* experiment, const char* key,
                                      const char* value);
QKA_API qka_status qka_experiment_validate(const qka_experiment* experiment);
QKA_API void qka_experiment_free(qka_experiment* experiment);

/* ---- runs; artifacts land under the configured output_dir ---- */

QKA_API qka_status qka_run_train(const qka_experiment* experiment, qka_report** out);
QKA_API qka_status qka_run_sweep(const qka_experiment* experiment, qka_report** out);
QKA_API qka_status qka_run_baseline(const qka_experiment* experiment, qka_report** out);

/* ---- report access ---- */

QKA_API int qka_report_rows(const qka_report* report);
/* Columns: ansatz, optimizer, k, s, roc_auc, f1, queries, speed_up, cv_std.
 * Values are rendered as text into buf (NUL-terminated, truncated if needed). */
QKA_API qka_status qka_report_cell(const qka_report* report, int row, const char* column,
                                   char* buf, int buf_len);
QKA_API void qka_report_free(qka_report* report);

#ifdef __cplusplus
}
#endif

#endif /* QKA_H */
