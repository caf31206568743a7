#ifndef WALKLAB_H
#define WALKLAB_H

#include <stddef.h>
#include <stdint.h>

// Arithmetic operations for `wl_padic_binary`.
typedef enum wl_padic_op {
  WL_PADIC_OP_ADD = 0,
  WL_PADIC_OP_SUB = 1,
  WL_PADIC_OP_MUL = 2,
  WL_PADIC_OP_DIV = 3,
} wl_padic_op;

// Status codes returned by every fallible function.
typedef enum wl_status {
  WL_STATUS_OK = 0,
  // Bad argument, parse or configuration error.
  WL_STATUS_INVALID_ARGUMENT = 1,
  // A mathematical hypothesis of the model fails.
  WL_STATUS_HYPOTHESIS = 2,
  // Singular, defective or non-convergent numerics.
  WL_STATUS_NUMERICAL = 3,
  WL_STATUS_IO = 4,
  WL_STATUS_NULL_POINTER = 5,
  // A Rust panic was caught at the boundary.
  WL_STATUS_PANIC = 6,
} wl_status;

// Opaque finitely supported probability measure on GL(2, ℝ).
typedef struct wl_measure2 wl_measure2;

// Opaque p-adic number with fixed relative precision.
typedef struct wl_padic wl_padic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread; do not free it.
const char *wl_last_error(void);

// Library version as a static NUL-terminated string.
const char *wl_version(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void wl_string_free(char *s);

// Runs the command-line tool with `argv[0..argc]` (without the program name).
// Standard output is returned in `*out` (free with `wl_string_free`), the
// process exit code in `*exit_code`; diagnostics go to the last-error slot.
//
// # Safety
// `argv` must hold `argc` valid NUL-terminated strings.
enum wl_status wl_run(size_t argc, const char *const *argv, char **out, int32_t *exit_code);

// Creates `num/den` in ℚ_p with `prec` digits of relative precision.
//
// # Safety
// `out` must be a valid pointer.
enum wl_status wl_padic_from_rational(int64_t num,
                                      int64_t den,
                                      uint32_t p,
                                      size_t prec,
                                      struct wl_padic **out);

// Parses the textual form produced by `wl_padic_to_string`.
//
// # Safety
// `text` must be NUL-terminated; `out` must be valid.
enum wl_status wl_padic_parse(const char *text, struct wl_padic **out);

// Frees a p-adic handle. NULL is ignored.
//
// # Safety
// `x` must come from this library and not be freed twice.
void wl_padic_free(struct wl_padic *x);

// `*out = a op b`; both operands must share the prime.
//
// # Safety
// `a`, `b` must be live handles; `out` must be valid.
enum wl_status wl_padic_binary(enum wl_padic_op op,
                               const struct wl_padic *a,
                               const struct wl_padic *b,
                               struct wl_padic **out);

// Valuation of a nonzero element; zero gives `WL_STATUS_INVALID_ARGUMENT`.
//
// # Safety
// `x` must be a live handle; `out` must be valid.
enum wl_status wl_padic_valuation(const struct wl_padic *x, int64_t *out);

// Absolute value `p^{−v}` (0 for zero).
//
// # Safety
// `x` must be a live handle; `out` must be valid.
enum wl_status wl_padic_abs(const struct wl_padic *x, double *out);

// Textual form; free with `wl_string_free`.
//
// # Safety
// `x` must be a live handle; `out` must be valid.
enum wl_status wl_padic_to_string(const struct wl_padic *x, char **out);

// Measure with `n` atoms; atom k is the row-major matrix `entries[4k..4k+4]`
// with probability `weights[k]` (weights must sum to one).
//
// # Safety
// `entries` must hold `4n` doubles and `weights` `n` doubles; `out` must be valid.
enum wl_status wl_measure2_new(const double *entries,
                               const double *weights,
                               size_t n,
                               struct wl_measure2 **out);

// Frees a measure handle. NULL is ignored.
//
// # Safety
// `m` must come from this library and not be freed twice.
void wl_measure2_free(struct wl_measure2 *m);

// Time-average Lyapunov estimate `(1/n) log‖X_n v‖` over `chains` chains,
// with its standard error.
//
// # Safety
// `m` must be a live handle; `lambda` and `stderr_out` must be valid.
enum wl_status wl_measure2_lyapunov(const struct wl_measure2 *m,
                                    size_t n,
                                    size_t chains,
                                    uint64_t seed,
                                    double *lambda,
                                    double *stderr_out);

// Asymptotic variance `σ² = −k″(0)` of the norm cocycle from the transfer
// operator discretized on `bins` cells of ℙ¹.
//
// # Safety
// `m` must be a live handle; `sigma2` must be valid.
enum wl_status wl_measure2_sigma2(const struct wl_measure2 *m, size_t bins, double *sigma2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WALKLAB_H */
