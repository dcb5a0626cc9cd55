/* Stepping-stone toolkit C API.
 *
 * All functions return SST_OK (0) on success and a nonzero status
 * otherwise; sst_last_error() describes the most recent failure on the
 * calling thread. Objects returned through out-parameters are owned by
 * the caller and released with the matching _free function.
 */
#ifndef SST_H
#define SST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sst_status {
    SST_OK = 0,
    SST_ERR_IO = 1,
    SST_ERR_PARSE = 2,
    SST_ERR_INVALID = 3,
    SST_ERR_CONFIG = 4,
    SST_ERR_INTERNAL = 5
} sst_status;

const char* sst_version(void);
/* Message for the last failing call on this thread ("" if none). */
const char* sst_last_error(void);

/* ---- traces ---------------------------------------------------- */

typedef struct sst_trace sst_trace;

/* format: "csv" or "jsonl". */
sst_status sst_trace_load(const char* path, const char* format, sst_trace** out);
sst_status sst_trace_save(const sst_trace* trace, const char* path, const char* format);
size_t sst_trace_packet_count(const sst_trace* trace);
/* Fills up to cap packets; returns the number written. */
size_t sst_trace_packets(const sst_trace* trace, double* timestamps, int* directions,
                         int64_t* sizes, size_t cap);
void sst_trace_free(sst_trace* trace);

/* ---- burst model ------------------------------------------------ */

typedef struct sst_burst_model sst_burst_model;

/* Fits from every .csv/.jsonl trace under trace_dir. gap_threshold <= 0
 * derives the threshold from the given inter-packet delay percentile
 * (pooled across flows unless per_flow is nonzero). */
sst_status sst_burst_model_fit(const char* trace_dir, double gap_threshold, double percentile,
                               int per_flow, sst_burst_model** out);
sst_status sst_burst_model_load(const char* path, sst_burst_model** out);
sst_status sst_burst_model_save(const sst_burst_model* model, const char* path);
void sst_burst_model_free(sst_burst_model* model);

/* ---- pipeline commands ------------------------------------------ */
/* config_json: path to the experiment config document ("" for defaults
 * where permitted). Result records (JSON) are written to result_out
 * when it is non-NULL (truncated to result_cap, NUL-terminated). */

sst_status sst_simulate(const char* config_json, const char* out_dir, char* result_out,
                        size_t result_cap);
sst_status sst_featurize(const char* config_json, const char* manifest, const char* out_dir,
                         char* result_out, size_t result_cap);
sst_status sst_train(const char* config_json, const char* manifest, const char* out_checkpoint,
                     char* result_out, size_t result_cap);
sst_status sst_score(const char* config_json, const char* checkpoint, const char* manifest,
                     const char* out_csv, char* result_out, size_t result_cap);
/* taus: comma-separated FPR budgets, e.g. "1e-3,1e-4,1e-5".
 * links_csv may be "" when no chain reconstruction is wanted. */
sst_status sst_evaluate(const char* taus, const char* scores_csv, const char* links_csv,
                        const char* out_report, const char* out_roc_csv, char* result_out,
                        size_t result_cap);
sst_status sst_obfuscate(const char* config_json, const char* manifest, const char* out_dir,
                         char* result_out, size_t result_cap);
sst_status sst_predict_length(const char* config_json, const char* checkpoint,
                              const char* manifest, const char* out_csv, char* result_out,
                              size_t result_cap);

/* ---- pair scoring ------------------------------------------------ */

typedef struct sst_model sst_model;

sst_status sst_model_load(const char* checkpoint, sst_model** out);
/* Correlation probability for two traces on the shared chain clock. */
sst_status sst_correlation_score(const sst_model* model, const sst_trace* a, const sst_trace* b,
                                 double* score_out);
void sst_model_free(sst_model* model);

#ifdef __cplusplus
}
#endif

#endif /* SST_H */
