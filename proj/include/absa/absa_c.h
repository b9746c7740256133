#ifndef ABSA_C_H
#define ABSA_C_H

/* C ABI for the ABSA generation library. Handles are opaque; every fallible
 * call returns a status code and leaves a message in absa_last_error(). */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum absa_status {
  ABSA_OK = 0,
  ABSA_ERROR = 1,            /* runtime failure */
  ABSA_INVALID_ARGUMENT = 2  /* usage or config error */
} absa_status;

const char* absa_version(void);

/* Message from the most recent failing call on this thread; empty string
 * when the last call succeeded. Valid until the next library call. */
const char* absa_last_error(void);

/* ---- datasets ---- */

typedef struct absa_dataset absa_dataset;

absa_status absa_dataset_open(const char* path, absa_dataset** out);
void absa_dataset_close(absa_dataset* dataset);
long absa_dataset_size(const absa_dataset* dataset);
/* Number of gold annotations on one sentence, or -1 if out of range. */
long absa_dataset_annotations(const absa_dataset* dataset, long index);

/* ---- models ---- */

typedef struct absa_model absa_model;

absa_status absa_model_open(const char* checkpoint_path, absa_model** out);
void absa_model_close(absa_model* model);
/* Subtask the checkpoint was trained for; owned by the handle. */
const char* absa_model_subtask(const absa_model* model);

/* Generates for one sentence given as whitespace words. given_start/given_end
 * are word indexes for ALSC/AOE and must both be -1 otherwise. *json_out
 * receives a JSON document {"tokens", "raw", "decoded", "invalid"}; free it
 * with absa_string_free. */
absa_status absa_model_generate(const absa_model* model, const char* const* words,
                                long n_words, const char* subtask, int beam, int max_len,
                                long given_start, long given_end, char** json_out);

void absa_string_free(char* s);

/* ---- pipeline commands (the CLI is a thin shell over these) ---- */

absa_status absa_run_train(const char* config_json);
absa_status absa_run_train_file(const char* config_path, const char* const* override_keys,
                                const char* const* override_values, int n_overrides);
absa_status absa_run_predict(const char* checkpoint, const char* data, const char* subtask,
                             int beam, int max_len, const char* out_path);
absa_status absa_run_evaluate(const char* predictions, const char* gold, const char* subtask,
                              const char* out_json, const char* out_table);
absa_status absa_run_analyze(const char* predictions, const char* subtask,
                             const char* out_json);
absa_status absa_run_beam_sweep(const char* checkpoint, const char* data, const char* gold,
                                const char* subtask, const int* beams, int n_beams,
                                int max_len, const char* out_json);
absa_status absa_run_convert(const char* input, const char* output);

#ifdef __cplusplus
}
#endif

#endif /* ABSA_C_H */
