#ifndef ECIE_H
#define ECIE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum EcieLevel {
  ECIE_LEVEL_MENTION = 0,
  ECIE_LEVEL_HARD = 1,
  ECIE_LEVEL_SOFT = 2,
} EcieLevel;

typedef enum EcieStatus {
  ECIE_STATUS_OK = 0,
  ECIE_STATUS_NULL_POINTER = 1,
  ECIE_STATUS_INVALID_UTF8 = 2,
  ECIE_STATUS_IO = 3,
  ECIE_STATUS_PARSE = 4,
  ECIE_STATUS_VALIDATION = 5,
  ECIE_STATUS_INVALID_ARGUMENT = 6,
  ECIE_STATUS_UNDEFINED = 7,
  ECIE_STATUS_RULES = 8,
  ECIE_STATUS_INTERNAL = 9,
} EcieStatus;

typedef enum EcieTask {
  ECIE_TASK_NER = 0,
  ECIE_TASK_RE = 1,
} EcieTask;

// Opaque handle to a loaded, validated corpus.
typedef struct EcieCorpus EcieCorpus;

typedef struct EciePrf {
  double precision;
  double recall;
  double f1;
} EciePrf;

typedef struct EcieCorefScores {
  struct EciePrf muc;
  struct EciePrf b3;
  struct EciePrf ceafe;
  double avg_f1;
} EcieCorefScores;

typedef struct EcieRuleReport {
  size_t groundings;
  size_t violations;
} EcieRuleReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into the library on the same thread.
const char *ecie_last_error_message(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void ecie_string_free(char *s);

// Loads and validates a corpus file (`.jsonl` or a JSON array).
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum EcieStatus ecie_corpus_load(const char *path, struct EcieCorpus **out);

// Parses and validates JSON Lines text held in memory.
//
// # Safety
// `jsonl` must be a NUL-terminated string and `out` a writable pointer.
enum EcieStatus ecie_corpus_from_jsonl(const char *jsonl, struct EcieCorpus **out);

// # Safety
// `corpus` must be NULL or a handle from this library, not yet freed.
void ecie_corpus_free(struct EcieCorpus *corpus);

// Number of documents, 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t ecie_corpus_len(const struct EcieCorpus *corpus);

// Validates JSON Lines text and writes a JSON report with `errors` and
// `warnings` arrays to `*out_json`. Findings are not failures; only
// unreadable input is.
//
// # Safety
// `jsonl` must be a NUL-terminated string and `out_json` a writable pointer.
enum EcieStatus ecie_validate_json(const char *jsonl, char **out_json);

// Micro-averaged NER or RE scores at one level. `task` takes an
// `EcieTask` value and `level` an `EcieLevel` value.
//
// # Safety
// `gold` and `pred` must be live handles and `out` writable.
enum EcieStatus ecie_score(const struct EcieCorpus *gold,
                           const struct EcieCorpus *pred,
                           uint32_t task,
                           uint32_t level,
                           struct EciePrf *out);

// MUC, B-cubed, CEAF-e and their average F1.
//
// # Safety
// `gold` and `pred` must be live handles and `out` writable.
enum EcieStatus ecie_coref_score(const struct EcieCorpus *gold,
                                 const struct EcieCorpus *pred,
                                 struct EcieCorefScores *out);

// Checks the built-in consistency rules over a corpus.
//
// # Safety
// `corpus` must be a live handle and `out` writable.
enum EcieStatus ecie_rules_check(const struct EcieCorpus *corpus, struct EcieRuleReport *out);

// Cohen's kappa of two parallel label arrays of length `n`.
//
// # Safety
// `a` and `b` must point to `n` NUL-terminated strings each; `out` must be
// writable.
enum EcieStatus ecie_kappa(const char *const *a, const char *const *b, size_t n, double *out);

// Number of candidate spans of width at most `w_max` over `num_tokens`.
//
// # Safety
// `out` must be writable.
enum EcieStatus ecie_span_count(size_t num_tokens, size_t w_max, uint64_t *out);

// Decodes one JSON object of mention-level predictions (`p_cl`, `p_men`,
// `p_rel`) into entity-level JSON.
//
// # Safety
// `input_json` must be a NUL-terminated string and `out_json` writable.
enum EcieStatus ecie_decode_json(const char *input_json, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECIE_H */
