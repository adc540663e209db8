/* C interface to the SECRET dual-space classification library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns a secret_status; on failure secret_last_error()
 * describes what went wrong on the calling thread. Strings returned through
 * out-parameters are owned by the caller and released with secret_string_free.
 */
#ifndef SECRET_H
#define SECRET_H

#include <stddef.h>
#include <stdint.h>

#if defined(SECRET_BUILDING_LIBRARY)
#define SECRET_API __attribute__((visibility("default")))
#else
#define SECRET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum secret_status {
  SECRET_OK = 0,
  SECRET_ERR_INVALID_ARGUMENT = 1,
  SECRET_ERR_IO = 2,
  SECRET_ERR_PARSE = 3,
  SECRET_ERR_CONFIG = 4,
  SECRET_ERR_VOCABULARY = 5,
  SECRET_ERR_NUMERIC = 6,
  SECRET_ERR_UNSUPPORTED_FORMAT = 7,
  SECRET_ERR_INTERNAL = 99
} secret_status;

typedef enum secret_format { SECRET_FORMAT_JSON = 0, SECRET_FORMAT_CSV = 1 } secret_format;

typedef struct secret_experiment secret_experiment;
typedef struct secret_report secret_report;

SECRET_API const char* secret_version(void);
/* Message of the last failed call on this thread; empty when none. */
SECRET_API const char* secret_last_error(void);
SECRET_API const char* secret_status_name(secret_status status);
/* Accepts "json" or "csv" (any case). */
SECRET_API secret_status secret_parse_format(const char* name, secret_format* out);
SECRET_API void secret_string_free(char* text);

/* Experiments. */
SECRET_API secret_status secret_experiment_load(const char* config_path, secret_experiment** out);
/* `base_dir` resolves relative paths inside the document; may be NULL. */
SECRET_API secret_status secret_experiment_from_json(const char* json_text, const char* base_dir,
                                                     secret_experiment** out);
SECRET_API void secret_experiment_free(secret_experiment* experiment);
SECRET_API secret_status secret_experiment_set_seed(secret_experiment* experiment, uint64_t seed);
SECRET_API secret_status secret_experiment_set_jobs(secret_experiment* experiment, int jobs);
/* Resolved configuration with defaults, as JSON. */
SECRET_API secret_status secret_experiment_config_json(const secret_experiment* experiment, char** out);
/* Checks data and label-vector coverage; `summary_json` may be NULL. */
SECRET_API secret_status secret_experiment_validate(const secret_experiment* experiment, char** summary_json);
/* Pairwise Euclidean distances between the label vectors. */
SECRET_API secret_status secret_experiment_distances(const secret_experiment* experiment, secret_format format,
                                                     char** out);
SECRET_API secret_status secret_experiment_run(const secret_experiment* experiment, secret_report** out);

/* Reports. */
SECRET_API void secret_report_free(secret_report* report);
SECRET_API secret_status secret_report_to_string(const secret_report* report, secret_format format, char** out);
SECRET_API secret_status secret_report_write(const secret_report* report, const char* path, secret_format format);
SECRET_API secret_status secret_report_from_json(const char* json_text, secret_report** out);
SECRET_API size_t secret_report_fold_count(const secret_report* report);
/* Mean accuracy and macro-F1 of a named approach ("secret", "feature_only", ...). */
SECRET_API secret_status secret_report_mean_scores(const secret_report* report, const char* approach,
                                                   double* accuracy, double* macro_f1);

/* Low-level fusion.
 * All matrices are row-major. `outputs` is n x dim, `label_vectors` is
 * n_classes x dim, confidences are n x n_classes. `diverged` (n entries, may
 * be NULL) receives 1 for rows that hit a label vector exactly with
 * epsilon = 0; those rows hold zeros. */
SECRET_API secret_status secret_semantic_confidence(const double* outputs, size_t n, size_t dim,
                                                    const double* label_vectors, size_t n_classes,
                                                    double epsilon, double* confidences, int* diverged);
/* labels[i] = argmax_k (fs[i,k] + ss[i,k]) / 2, ties toward the lowest k. */
SECRET_API secret_status secret_fuse_and_decide(const double* fs, const double* ss, size_t n, size_t n_classes,
                                                int* labels);
/* Accuracy and macro-F1 over n_classes; a label of -1 counts as wrong. */
SECRET_API secret_status secret_scores(const int* y_true, const int* y_pred, size_t n, int n_classes,
                                       double* accuracy, double* macro_f1);

#ifdef __cplusplus
}
#endif

#endif
