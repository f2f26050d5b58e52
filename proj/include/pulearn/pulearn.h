/* pulearn: positive-unlabeled evaluation and training.
 *
 * C interface to the shared library. Objects are opaque handles created and
 * released by the library. Every fallible call returns a pul_status; on
 * failure a description of the last error on the calling thread is available
 * from pul_last_error(). Strings handed out by the library are released with
 * pul_string_free().
 */
#ifndef PULEARN_PULEARN_H
#define PULEARN_PULEARN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PULEARN_BUILDING_LIBRARY)
#    define PUL_API __declspec(dllexport)
#  else
#    define PUL_API __declspec(dllimport)
#  endif
#else
#  define PUL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pul_status {
    PUL_OK = 0,
    PUL_ERR_INVALID_ARGUMENT = 1,
    PUL_ERR_IO = 2,
    PUL_ERR_PARSE = 3,
    PUL_ERR_DEGENERATE = 4,
    PUL_ERR_VERSION = 5,
    PUL_ERR_INTERNAL = 6
} pul_status;

typedef enum pul_dataset_kind {
    PUL_KIND_PN = 0,       /* labels +1 / -1 */
    PUL_KIND_PU = 1,       /* observed flags 1 / 0 */
    PUL_KIND_FEATURES = 2, /* no target column */
    PUL_KIND_AUTO = 3      /* loading only: detect from the CSV header */
} pul_dataset_kind;

typedef enum pul_missing_policy {
    PUL_MISSING_ERROR = 0,
    PUL_MISSING_MEDIAN = 1,
    PUL_MISSING_DROP = 2
} pul_missing_policy;

typedef enum pul_observation_mode {
    PUL_OBSERVE_EXACT = 0,
    PUL_OBSERVE_BERNOULLI = 1
} pul_observation_mode;

typedef enum pul_tie_mode {
    PUL_TIES_CANONICAL = 0,
    PUL_TIES_AVERAGE = 1
} pul_tie_mode;

typedef struct pul_dataset pul_dataset;
typedef struct pul_model pul_model;

PUL_API const char* pul_version(void);
PUL_API const char* pul_last_error(void);
PUL_API const char* pul_status_name(pul_status status);
PUL_API void pul_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

PUL_API pul_status pul_dataset_load_csv(const char* path, pul_dataset_kind kind, pul_missing_policy missing,
                                        pul_dataset** out);
PUL_API pul_status pul_dataset_save_csv(const pul_dataset* data, const char* path);

/* values: row-major n x d. targets: n labels (PN, +1/-1) or flags (PU, 1/0);
 * ignored for PUL_KIND_FEATURES. */
PUL_API pul_status pul_dataset_create(size_t n, size_t d, const double* values, const int* targets,
                                      pul_dataset_kind kind, pul_dataset** out);
PUL_API void pul_dataset_free(pul_dataset* data);

PUL_API pul_status pul_dataset_shape(const pul_dataset* data, size_t* n, size_t* d, pul_dataset_kind* kind);
/* Number of +1 labels (PN) or observed positives (PU). */
PUL_API pul_status pul_dataset_positive_count(const pul_dataset* data, size_t* count);
/* Copies n labels or flags into out. */
PUL_API pul_status pul_dataset_targets(const pul_dataset* data, int* out, size_t len);
/* Copies n * d row-major features into out. */
PUL_API pul_status pul_dataset_features(const pul_dataset* data, double* out, size_t len);

PUL_API pul_status pul_make_pu(const pul_dataset* pn, double theta_o, uint64_t seed, pul_observation_mode mode,
                               pul_dataset** out);

/* spec_json: {"thetaP","thetaO","d","meanP","meanN","sharedStdDev","seed"} */
PUL_API pul_status pul_synth_generate(const char* spec_json, size_t n, pul_dataset** pn_out, pul_dataset** pu_out);

/* assignment receives n fold indices. */
PUL_API pul_status pul_split_folds(const int* strata, size_t n, size_t fold_count, uint64_t seed,
                                   size_t* assignment);

/* ---- metrics ----------------------------------------------------------- */

PUL_API pul_status pul_ecdf_at(const double* scores, size_t n, double xi, double* out);
PUL_API pul_status pul_quantile_threshold(const double* scores, size_t n, double p, double* out);
/* positive_mask[i] != 0 marks sample i positive. */
PUL_API pul_status pul_sensitivity(const double* scores, const int* positive_mask, size_t n, double s, double* out);
/* p_out and alpha_out receive n points each. */
PUL_API pul_status pul_lift_curve(const double* scores, const int* positive_mask, size_t n, pul_tie_mode ties,
                                  double* p_out, double* alpha_out);
PUL_API pul_status pul_aul(const double* scores, const int* positive_mask, size_t n, pul_tie_mode ties, double* out);
/* labels in {+1, -1} */
PUL_API pul_status pul_auc(const double* scores, const int* labels, size_t n, double* out);
PUL_API pul_status pul_relation_residual(double auc, double aul_pn, double theta_p, double* out);

#define PUL_METRIC_AUL 1
#define PUL_METRIC_AUC 2

/* Scores a labelled dataset. PN data: AUL over the true positives, AUC, and
 * the relation residual when both are requested (theta_p may be NULL to use
 * the label fraction). PU data: AUL_PU only; requesting AUC or passing
 * theta_p is an invalid argument. report_out receives a JSON object. */
PUL_API pul_status pul_evaluate(const double* scores, size_t n, const pul_dataset* data, int metrics,
                                const double* theta_p, pul_tie_mode ties, char** report_out);

/* Writes a CSV with a single `score` column. */
PUL_API pul_status pul_save_scores_csv(const double* scores, size_t n, const char* path);

/* ---- credibility ------------------------------------------------------- */

/* neighbors_out receives n * k indices. */
PUL_API pul_status pul_knn(const pul_dataset* data, size_t k, int standardize, int include_self, int threads,
                           size_t* neighbors_out);
/* cred_out receives n values; observed positives get 1. */
PUL_API pul_status pul_credibility(const pul_dataset* pu, size_t k, int standardize, int threads, double* cred_out);
/* ek_out receives k_max - k_min + 1 values. */
PUL_API pul_status pul_ek_curve(const pul_dataset* pu, size_t k_min, size_t k_max, int standardize, int threads,
                                double* ek_out);
/* ek holds E_k for consecutive k starting at k_min. */
PUL_API pul_status pul_select_k(const double* ek, size_t count, size_t k_min, double threshold, size_t window,
                                size_t* chosen, int* fallback);
/* CSV with header k,ek. */
PUL_API pul_status pul_ek_curve_csv(const double* ek, size_t count, size_t k_min, char** csv_out);

/* ---- training and prediction ------------------------------------------ */

/* config_json keys (all optional): method (probtagging|naive|bagging),
 * base {kind, gbdt{...}, logistic{...}}, k (integer or "auto"), kMin, kMax,
 * growthThreshold, window, standardize, includeSelf, m, negativesPerBag,
 * seed, threads. */
PUL_API pul_status pul_train(const pul_dataset* pu, const char* config_json, pul_model** out);
PUL_API void pul_model_free(pul_model* model);
PUL_API pul_status pul_model_save(const pul_model* model, const char* path);
PUL_API pul_status pul_model_load(const char* path, pul_model** out);
PUL_API pul_status pul_model_to_json(const pul_model* model, char** out);
PUL_API pul_status pul_model_from_json(const char* text, pul_model** out);
PUL_API pul_status pul_model_info(const pul_model* model, size_t* dim, size_t* k, size_t* m_effective);
/* out receives one score per row of data. */
PUL_API pul_status pul_predict(const pul_model* model, const pul_dataset* data, double* out, size_t len);

/* ---- harness ----------------------------------------------------------- */

/* config_json: {"train": {...as pul_train...}, "folds", "seed", "thetaO",
 * "mode": "exact"|"bernoulli"}. thetaO is required for PN input. Outputs the
 * per-fold CSV and a JSON summary; either pointer may be NULL. */
PUL_API pul_status pul_cross_validate(const pul_dataset* data, const char* config_json, char** csv_out,
                                      char** summary_out);

/* config_json: {"spec": {...}, "nGrid": [...], "repeats", "scorer":
 * "bayes-linear"|"trained", "trainedN", "ties": "average"|"canonical",
 * "threads"}. */
PUL_API pul_status pul_convergence(const char* config_json, char** csv_out, char** trials_csv_out);

/* config_json: {"thetaOGrid": [...], "methods": [{...}, ...], "folds",
 * "seed", "mode"}. */
PUL_API pul_status pul_sweep(const pul_dataset* pn, const char* config_json, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif
