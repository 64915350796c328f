#ifndef INITRACK_H
#define INITRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InitrackMethod {
  INITRACK_METHOD_CONST = 0,
  INITRACK_METHOD_CONST_COUNTER = 1,
  INITRACK_METHOD_VAR_COUNTER = 2,
} InitrackMethod;

/**
 * Result codes.
 */
typedef enum InitrackStatus {
  INITRACK_STATUS_OK = 0,
  INITRACK_STATUS_NULL_ARGUMENT = 1,
  INITRACK_STATUS_INVALID_UTF8 = 2,
  INITRACK_STATUS_DOMAIN = 3,
  INITRACK_STATUS_TOTAL_CONFLICT = 4,
  INITRACK_STATUS_UNKNOWN_CUE = 5,
  INITRACK_STATUS_PARSE = 6,
  INITRACK_STATUS_MODEL_LOAD = 7,
  INITRACK_STATUS_CONFIG = 8,
  INITRACK_STATUS_DEGENERATE = 9,
  INITRACK_STATUS_IO = 10,
  INITRACK_STATUS_PANIC = 11,
} InitrackStatus;

/**
 * Parsed corpus.
 */
typedef struct InitrackCorpus InitrackCorpus;

/**
 * Cue bpa's and counters.
 */
typedef struct InitrackModel InitrackModel;

/**
 * Tracker settings; see [`initrack_config_default`].
 */
typedef struct InitrackConfig {
  double delta;
  enum InitrackMethod method;
  double default_task_x;
  double default_dialogue_x;
  double reset_strength;
  double min_uncommitted;
  bool anchor_first_turn;
  bool allow_large_delta;
} InitrackConfig;

typedef struct InitrackAccuracy {
  size_t task_correct;
  size_t task_total;
  size_t dialogue_correct;
  size_t dialogue_total;
} InitrackAccuracy;

/**
 * Masses on speaker, hearer, and the whole frame.
 */
typedef struct InitrackMass {
  double speaker;
  double hearer;
  double theta;
} InitrackMass;

typedef struct InitrackKappa {
  double observed;
  double chance;
  double kappa;
} InitrackKappa;

typedef struct InitrackCochranQ {
  double q;
  size_t df;
  double p;
} InitrackCochranQ;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *initrack_last_error(void);

/**
 * Fill `out` with the default settings.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `InitrackConfig`.
 */
enum InitrackStatus initrack_config_default(struct InitrackConfig *out);

/**
 * Parse corpus text into a new handle stored in `*out`.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
enum InitrackStatus initrack_corpus_parse(const char *text_ptr, struct InitrackCorpus **out);

/**
 * Number of turns in the corpus, or 0 for a null handle.
 *
 * # Safety
 * `corpus` must be null or a live handle.
 */
size_t initrack_corpus_turn_count(const struct InitrackCorpus *corpus);

/**
 * # Safety
 * `corpus` must be null or a handle not yet freed.
 */
void initrack_corpus_free(struct InitrackCorpus *corpus);

/**
 * A model with every bpa vacuous.
 */
struct InitrackModel *initrack_model_new(void);

/**
 * Load a model from its text form.
 *
 * # Safety
 * As for [`initrack_corpus_parse`].
 */
enum InitrackStatus initrack_model_load(const char *text_ptr, struct InitrackModel **out);

/**
 * Serialize a model. Free the string with [`initrack_string_free`].
 *
 * # Safety
 * `model` must be null or a live handle; `out` must be null or writable.
 */
enum InitrackStatus initrack_model_to_text(const struct InitrackModel *model, char **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void initrack_model_free(struct InitrackModel *model);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void initrack_string_free(char *s);

/**
 * One training pass over `corpus`, updating `model` in place. Training
 * accuracies are written to `out` when it is not null.
 *
 * # Safety
 * Handles must be live; `config` must be null (defaults) or valid; `out`
 * must be null or writable.
 */
enum InitrackStatus initrack_train(const struct InitrackCorpus *corpus,
                                   struct InitrackModel *model,
                                   const struct InitrackConfig *config,
                                   struct InitrackAccuracy *out);

/**
 * Accuracies of a frozen model on `corpus`.
 *
 * # Safety
 * As for [`initrack_train`]; `out` must not be null.
 */
enum InitrackStatus initrack_evaluate(const struct InitrackCorpus *corpus,
                                      const struct InitrackModel *model,
                                      const struct InitrackConfig *config,
                                      bool teacher_forcing,
                                      struct InitrackAccuracy *out);

/**
 * Accuracies of predicting that initiative never changes hands.
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum InitrackStatus initrack_baseline(const struct InitrackCorpus *corpus,
                                      struct InitrackAccuracy *out);

/**
 * Dempster combination of two mass functions.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum InitrackStatus initrack_combine(const struct InitrackMass *a,
                                     const struct InitrackMass *b,
                                     struct InitrackMass *out);

/**
 * Multi-rater kappa from a row-major `items x categories` count matrix.
 *
 * # Safety
 * `counts` must point to `items * categories` readable values.
 */
enum InitrackStatus initrack_kappa(const size_t *counts,
                                   size_t items,
                                   size_t categories,
                                   struct InitrackKappa *out);

/**
 * Cochran's Q from a row-major `subjects x treatments` matrix of 0/1 bytes.
 *
 * # Safety
 * `outcomes` must point to `subjects * treatments` readable bytes.
 */
enum InitrackStatus initrack_cochran_q(const uint8_t *outcomes,
                                       size_t subjects,
                                       size_t treatments,
                                       struct InitrackCochranQ *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INITRACK_H */
