#ifndef SEEDBENCH_H
#define SEEDBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_ARGUMENT = 1,
  SB_STATUS_INVALID_ARGUMENT = 2,
  SB_STATUS_INVALID_TENSOR = 3,
  SB_STATUS_NOT_FOUND = 4,
  SB_STATUS_INSUFFICIENT_DATA = 5,
  SB_STATUS_UNTABULATED = 6,
  SB_STATUS_CACHE_VERSION = 7,
  SB_STATUS_CACHE_CHECKSUM = 8,
  SB_STATUS_IO = 9,
  SB_STATUS_TRIAL_FAILED = 10,
  SB_STATUS_PANIC = 255,
} SbStatus;

typedef enum SbLatexTable {
  SB_LATEX_TABLE_SUMMARY = 0,
  SB_LATEX_TABLE_PAIRWISE_T = 1,
  SB_LATEX_TABLE_PAIRWISE_WILCOXON = 2,
  SB_LATEX_TABLE_PAIRWISE_BOTH = 3,
} SbLatexTable;

// Opaque benchmark report.
typedef struct SbReport SbReport;

// Opaque metric tensor.
typedef struct SbTensor SbTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version; a static string, do not free.
const char *sb_version(void);

// Message for the last failed call on this thread, or NULL. Owned by the
// library and valid until the next call on the same thread.
const char *sb_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library, freed once.
void sb_string_free(char *s);

// Parses a tensor document (JSON) and validates it.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SbStatus sb_tensor_from_json(const char *json, struct SbTensor **out);

// # Safety
// `tensor` must be NULL or a handle from this library, freed once.
void sb_tensor_free(struct SbTensor *tensor);

// Builds a report. `config_json` may be NULL for the defaults.
//
// # Safety
// `tensor` must be a live handle; strings NUL-terminated; `out` writable.
enum SbStatus sb_report_build(const struct SbTensor *tensor,
                              const char *config_json,
                              struct SbReport **out);

// Loads and verifies a cached report.
//
// # Safety
// `path` must be NUL-terminated; `out` writable.
enum SbStatus sb_report_load(const char *path, struct SbReport **out);

// Writes the report cache atomically.
//
// # Safety
// `report` must be a live handle; `path` NUL-terminated.
enum SbStatus sb_report_save(const struct SbReport *report, const char *path);

// # Safety
// `report` must be NULL or a handle from this library, freed once.
void sb_report_free(struct SbReport *report);

// The full report as JSON.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum SbStatus sb_report_to_json(const struct SbReport *report, char **out);

// A LaTeX table. The macro names may be NULL.
//
// # Safety
// `report` must be a live handle; strings NUL-terminated; `out` writable.
enum SbStatus sb_report_to_latex(const struct SbReport *report,
                                 enum SbLatexTable which,
                                 const char *winner_macro,
                                 const char *tie_macro,
                                 char **out);

// The critical-difference diagram as SVG.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum SbStatus sb_report_cd_svg(const struct SbReport *report, char **out);

// # Safety
// `out` must be writable.
enum SbStatus sb_nemenyi_cd(size_t k, size_t n_tasks, double alpha, double *out);

// Quantile `p` of Student's t with `df` degrees of freedom.
//
// # Safety
// `out` must be writable.
enum SbStatus sb_t_quantile(double df, double p, double *out);

// Holm-adjusts `m` p-values from `p` into `out` (may alias `p`).
//
// # Safety
// `p` and `out` must point to `m` doubles.
enum SbStatus sb_holm_adjust(const double *p, size_t m, double *out);

// Two-sided Wilcoxon signed-rank test on `xs - ys`.
//
// # Safety
// `xs` and `ys` must point to `n` doubles; outputs writable.
enum SbStatus sb_wilcoxon(const double *xs,
                          const double *ys,
                          size_t n,
                          double *w_stat,
                          double *p_value);

// Two-sided paired t test on `xs - ys`.
//
// # Safety
// `xs` and `ys` must point to `n` doubles; outputs writable.
enum SbStatus sb_paired_t(const double *xs,
                          const double *ys,
                          size_t n,
                          double *t_stat,
                          double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEEDBENCH_H */
