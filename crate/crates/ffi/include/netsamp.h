#ifndef NETSAMP_H
#define NETSAMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  NS_STATUS_NULL_POINTER = 1,
  /*
   A string argument was not valid UTF-8.
   */
  NS_STATUS_INVALID_UTF8 = 2,
  /*
   The network description could not be parsed or failed validation.
   */
  NS_STATUS_INVALID_NETWORK = 3,
  /*
   An analysis parameter was out of range or inconsistent.
   */
  NS_STATUS_INVALID_ARGUMENT = 4,
  /*
   The network structure does not support the requested method.
   */
  NS_STATUS_UNSUPPORTED = 5,
  /*
   A numerical kernel failed (non-convergence, unresolvable structure).
   */
  NS_STATUS_NUMERICAL = 6,
  /*
   Reading a file failed.
   */
  NS_STATUS_IO = 7,
  /*
   The requested quantity does not exist (e.g. no witness).
   */
  NS_STATUS_NOT_AVAILABLE = 8,
  /*
   An internal panic was caught at the boundary.
   */
  NS_STATUS_INTERNAL = 9,
} NsStatus;

typedef enum NsPattern {
  NS_PATTERN_SINGLE = 0,
  NS_PATTERN_SLOW_INTER = 1,
  NS_PATTERN_MULTI_SCALE = 2,
  NS_PATTERN_FAST_CONTROL = 3,
} NsPattern;

/*
 Controllability verdict, numerically equal to the CLI exit code.
 */
typedef enum NsVerdict {
  NS_VERDICT_CONTROLLABLE = 0,
  NS_VERDICT_UNCONTROLLABLE = 1,
  NS_VERDICT_INCONCLUSIVE = 2,
} NsVerdict;

/*
 Opaque network handle.
 */
typedef struct NsNetwork NsNetwork;

/*
 Opaque analysis outcome.
 */
typedef struct NsOutcome NsOutcome;

/*
 Analysis parameters. `method` may be NULL for automatic selection;
 non-positive `tol_rank` / `tol_eig` select the defaults.
 */
typedef struct NsAnalysisParams {
  double h;
  uint32_t l;
  enum NsPattern pattern;
  const char *method;
  double tol_rank;
  double tol_eig;
} NsAnalysisParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread (empty if none). The
 pointer stays valid until the next failing call on the same thread.
 */
const char *ns_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ns_version(void);

/*
 Parse a JSON network description.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum NsStatus ns_network_from_json(const char *json, struct NsNetwork **out);

/*
 Read and parse a JSON network file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum NsStatus ns_network_from_file(const char *path, struct NsNetwork **out);

/*
 Release a network. NULL is ignored.

 # Safety
 `net` must come from `ns_network_from_*` and not have been freed.
 */
void ns_network_free(struct NsNetwork *net);

/*
 Number of layers (0 for NULL).

 # Safety
 `net` must be NULL or a live handle.
 */
size_t ns_network_layers(const struct NsNetwork *net);

/*
 Nodes per layer (0 for NULL).

 # Safety
 `net` must be NULL or a live handle.
 */
size_t ns_network_nodes(const struct NsNetwork *net);

/*
 Dimension of the assembled state (0 for NULL).

 # Safety
 `net` must be NULL or a live handle.
 */
size_t ns_network_state_dim(const struct NsNetwork *net);

/*
 Default parameters for a single-rate analysis at period `h`.
 */
struct NsAnalysisParams ns_params_default(double h);

/*
 Analyze `net` with `params`.

 # Safety
 `net` must be a live handle, `params` a valid pointer (its `method` NULL
 or NUL-terminated), `out` writable.
 */
enum NsStatus ns_analyze(const struct NsNetwork *net,
                         const struct NsAnalysisParams *params,
                         struct NsOutcome **out);

/*
 Release an outcome. NULL is ignored.

 # Safety
 `o` must come from [`ns_analyze`] and not have been freed.
 */
void ns_outcome_free(struct NsOutcome *o);

/*
 Overall verdict (Inconclusive for NULL).

 # Safety
 `o` must be NULL or a live handle.
 */
enum NsVerdict ns_outcome_verdict(const struct NsOutcome *o);

/*
 State dimension of the analysed (possibly lifted) pair.

 # Safety
 `o` must be NULL or a live handle.
 */
size_t ns_outcome_state_dim(const struct NsOutcome *o);

/*
 Reachable-subspace dimension, when a rank-based method reported one.

 # Safety
 `o` must be a live handle and `rank` writable.
 */
enum NsStatus ns_outcome_reach_rank(const struct NsOutcome *o, size_t *rank);

/*
 Eigenvalue of the primary verdict's witness.

 # Safety
 `o` must be a live handle; `re` and `im` writable.
 */
enum NsStatus ns_outcome_witness_eigenvalue(const struct NsOutcome *o, double *re, double *im);

/*
 Copy the primary witness vector into `re[0..len)` / `im[0..len)`; `len`
 must equal the state dimension.

 # Safety
 `o` must be a live handle; `re` and `im` must each hold `len` doubles.
 */
enum NsStatus ns_outcome_witness_vector(const struct NsOutcome *o,
                                        double *re,
                                        double *im,
                                        size_t len);

/*
 Text report (as printed by the CLI); `source` labels the input and may be
 NULL. Returns NULL on failure. Free with [`ns_string_free`].

 # Safety
 `o` must be a live handle; `source` NULL or NUL-terminated.
 */
char *ns_outcome_report(const struct NsOutcome *o, const char *source);

/*
 One CSV row (no header, no newline) in the CLI's column layout.

 # Safety
 `o` must be a live handle.
 */
char *ns_outcome_csv_row(const struct NsOutcome *o);

/*
 Release a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void ns_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETSAMP_H */
