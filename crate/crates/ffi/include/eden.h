#ifndef EDEN_H
#define EDEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EdenStatus {
  EDEN_STATUS_OK = 0,
  EDEN_STATUS_NULL_POINTER = 1,
  EDEN_STATUS_INVALID_UTF8 = 2,
  EDEN_STATUS_INVALID_ARGUMENT = 3,
  EDEN_STATUS_NOT_FOUND = 4,
  EDEN_STATUS_CONFLICT = 5,
  EDEN_STATUS_BUSY = 6,
  EDEN_STATUS_UPSTREAM = 7,
  EDEN_STATUS_INTERNAL = 8,
} EdenStatus;

// Opaque engine handle backed by an in-memory event store.
typedef struct EdenEngine EdenEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message for this thread, or null. Owned by the library and
// valid until the next call on the same thread.
const char *eden_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void eden_string_free(char *s);

// Engine answering every provider call from a JSON mock script.
//
// # Safety
// `mock_json` must be a NUL-terminated string; `out` must be writable.
enum EdenStatus eden_engine_new_mock(const char *mock_json, struct EdenEngine **out);

// # Safety
// `engine` must be null or a handle from [`eden_engine_new_mock`], freed once.
void eden_engine_free(struct EdenEngine *engine);

// Creates a session from `{"participant_id": ..., "topic_area": ..., "prefs": {...}}`.
// Writes `{"session_id": ..., "condition": ...}` to `out_json`.
//
// # Safety
// Pointers must be valid; `out_json` receives a string for [`eden_string_free`].
enum EdenStatus eden_session_start(const struct EdenEngine *engine,
                                   const char *request_json,
                                   char **out_json);

// Processes one user turn (`{"text": ..., "negative_affect": ..., "pause_durations": [...]}`)
// and writes the outcome JSON.
//
// # Safety
// Pointers must be valid; `out_json` receives a string for [`eden_string_free`].
enum EdenStatus eden_session_turn(const struct EdenEngine *engine,
                                  const char *session_id,
                                  const char *request_json,
                                  char **out_json);

// # Safety
// Pointers must be valid; `out_json` receives a string for [`eden_string_free`].
enum EdenStatus eden_session_end_conversation(const struct EdenEngine *engine,
                                              const char *session_id,
                                              char **out_json);

// Renders a built-in prompt template with a JSON object of string bindings.
//
// # Safety
// Pointers must be valid; `out` receives a string for [`eden_string_free`].
enum EdenStatus eden_render_prompt(const char *name, const char *bindings_json, char **out);

// Drops every sentence that ends in a question mark.
//
// # Safety
// Pointers must be valid; `out` receives a string for [`eden_string_free`].
enum EdenStatus eden_strip_questions(const char *text, char **out);

// Mean of the four attitude items, each on the 1 to 5 scale.
//
// # Safety
// `out` must be writable.
enum EdenStatus eden_metrics_pas(double enc, double list, double care, double app, double *out);

// Grit change from nine pre and nine post answers. `out_per_item` may be
// null; otherwise it must hold nine values.
//
// # Safety
// `pre` and `post` must point to nine values each; outputs must be writable.
enum EdenStatus eden_metrics_delta_l2(const double *pre,
                                      const double *post,
                                      double *out_total,
                                      double *out_per_item);

// Pearson r with a two-sided t-distribution p-value.
//
// # Safety
// `xs` and `ys` must point to `n` values; outputs must be writable.
enum EdenStatus eden_metrics_pearson(const double *xs,
                                     const double *ys,
                                     size_t n,
                                     double *out_r,
                                     double *out_p);

// Fleiss' kappa over a row-major `items x categories` count matrix.
//
// # Safety
// `counts` must point to `items * categories` values; `out` must be writable.
enum EdenStatus eden_metrics_fleiss_kappa(const uint32_t *counts,
                                          size_t items,
                                          size_t categories,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDEN_H */
