#ifndef TLP_H
#define TLP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlpLimitHit {
  TLP_LIMIT_HIT_NONE = 0,
  TLP_LIMIT_HIT_DEPTH = 1,
  TLP_LIMIT_HIT_STEPS = 2,
} TlpLimitHit;

typedef enum TlpStatus {
  TLP_STATUS_OK = 0,
  TLP_STATUS_NULL_ARGUMENT = 1,
  TLP_STATUS_INVALID_UTF8 = 2,
  TLP_STATUS_PARSE_ERROR = 3,
  TLP_STATUS_ENGINE_ERROR = 4,
  TLP_STATUS_OUT_OF_RANGE = 5,
  TLP_STATUS_INVALID_LIMITS = 6,
  TLP_STATUS_CHECKPOINT_ERROR = 7,
  TLP_STATUS_PANIC = 8,
} TlpStatus;

// A parsed program.
typedef struct TlpProgram TlpProgram;

// Distinct proof trees of a query in serialized form.
typedef struct TlpProofs TlpProofs;

// Answers to a query, already rendered as text.
typedef struct TlpSolutions TlpSolutions;

typedef struct TlpLimits {
  size_t max_solutions;
  uint32_t max_depth;
  uint64_t max_steps;
  bool occurs_check;
} TlpLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next call into this library from the same thread.
const char *tlp_last_error(void);

// Library version as a static string.
const char *tlp_version(void);

struct TlpLimits tlp_limits_default(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void tlp_string_free(char *s);

// # Safety
// `source` must be a nul-terminated string; `out` must be writable.
enum TlpStatus tlp_program_parse(const char *source, struct TlpProgram **out);

// # Safety
// `program` must be null or a handle from [`tlp_program_parse`], freed once.
void tlp_program_free(struct TlpProgram *program);

// Number of clauses in the program.
//
// # Safety
// `program` must be null or a live handle.
size_t tlp_program_len(const struct TlpProgram *program);

// Solves `query`. `limits` may be null for the defaults.
//
// # Safety
// Pointers must be valid as documented; `out` must be writable.
enum TlpStatus tlp_solve(const struct TlpProgram *program,
                         const char *query,
                         const struct TlpLimits *limits,
                         struct TlpSolutions **out);

// # Safety
// `sols` must be null or a live handle.
size_t tlp_solutions_count(const struct TlpSolutions *sols);

// # Safety
// `sols` must be null or a live handle.
enum TlpLimitHit tlp_solutions_limit_hit(const struct TlpSolutions *sols);

// Borrowed text of answer `index`, e.g. `X = 990.0`; valid while `sols`
// lives. Null when out of range.
//
// # Safety
// `sols` must be null or a live handle.
const char *tlp_solutions_get(const struct TlpSolutions *sols, size_t index);

// # Safety
// `sols` must be null or a handle from [`tlp_solve`], freed once.
void tlp_solutions_free(struct TlpSolutions *sols);

// Enumerates distinct proofs of `query`, at most `limits.max_solutions`.
//
// # Safety
// Pointers must be valid as documented; `out` must be writable.
enum TlpStatus tlp_prove(const struct TlpProgram *program,
                         const char *query,
                         const struct TlpLimits *limits,
                         struct TlpProofs **out);

// # Safety
// `proofs` must be null or a live handle.
size_t tlp_proofs_count(const struct TlpProofs *proofs);

// True when no further distinct proof exists.
//
// # Safety
// `proofs` must be null or a live handle.
bool tlp_proofs_exhausted(const struct TlpProofs *proofs);

// Borrowed serialized tree `index`; null when out of range.
//
// # Safety
// `proofs` must be null or a live handle.
const char *tlp_proofs_get(const struct TlpProofs *proofs, size_t index);

// # Safety
// `proofs` must be null or a handle from [`tlp_prove`], freed once.
void tlp_proofs_free(struct TlpProofs *proofs);

// Checks a serialized proof tree. `*valid` is set to the verdict; when
// `reason` is non-null and the tree is invalid, it receives an owned
// explanation to release with [`tlp_string_free`].
//
// # Safety
// Pointers must be valid as documented; `valid` must be writable.
enum TlpStatus tlp_check(const struct TlpProgram *program,
                         const char *tree,
                         bool *valid,
                         char **reason);

// Writes `alpha * base + (1 - alpha) * tuned` to the directory `out`.
//
// # Safety
// All strings must be nul-terminated.
enum TlpStatus tlp_average_checkpoints(const char *base,
                                       const char *tuned,
                                       double alpha,
                                       const char *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TLP_H */
