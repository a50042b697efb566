#ifndef BERGKIT_H
#define BERGKIT_H

/* Generated by cbindgen; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define BK_OK 0

/**
 * Invalid argument: null pointer, unknown family, bad parameters.
 */
#define BK_ERR_ARGUMENT 1

/**
 * Numerical refusal: conditioning, truncation or sampling failure.
 */
#define BK_ERR_NUMERICAL 2

/**
 * Operation not available for this weight (no envelope path, wrong n).
 */
#define BK_ERR_UNSUPPORTED 3

/**
 * Output buffer too small.
 */
#define BK_ERR_BUFFER 4

/**
 * Panic caught at the boundary; state may be inconsistent.
 */
#define BK_ERR_INTERNAL 5

/**
 * Opaque Bergman model handle.
 */
typedef struct BkModel BkModel;

/**
 * Opaque equilibrium-potential oracle handle.
 */
typedef struct BkOracle BkOracle;

/**
 * Opaque weight handle.
 */
typedef struct BkWeight BkWeight;

/**
 * Builds a builtin weight. `params` may be null when `n_params` is 0.
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be a valid pointer.
 */
int bk_weight_builtin(const char *name,
                      const double *params,
                      size_t n_params,
                      size_t n,
                      struct BkWeight **out);

/**
 * # Safety
 * `w` must come from `bk_weight_builtin` and not be freed twice.
 */
void bk_weight_free(struct BkWeight *w);

/**
 * Builds the degree-k model with an automatically sized rule.
 *
 * # Safety
 * `w` must be a live weight handle; `out` must be valid.
 */
int bk_model_build(const struct BkWeight *w, uint32_t k, struct BkModel **out);

/**
 * # Safety
 * `m` must come from `bk_model_build` and not be freed twice.
 */
void bk_model_free(struct BkModel *m);

/**
 * dim H_k; 0 on a null handle.
 *
 * # Safety
 * `m` must be a live model handle or null.
 */
size_t bk_model_dim(const struct BkModel *m);

/**
 * B_k(z) at interleaved coordinates (2n doubles).
 *
 * # Safety
 * `m` live handle; `coords` holds `len` doubles; `out` valid.
 */
int bk_model_bergman(const struct BkModel *m, const double *coords, size_t len, double *out);

/**
 * k^{-1} ln K_k(z, z) at interleaved coordinates.
 *
 * # Safety
 * As `bk_model_bergman`.
 */
int bk_model_log_potential(const struct BkModel *m, const double *coords, size_t len, double *out);

/**
 * |integral of B_k minus dim| / dim on the model's rule.
 *
 * # Safety
 * `m` live handle; `out` valid.
 */
int bk_model_dimension_residual(const struct BkModel *m, double *out);

/**
 * Exact-envelope oracle; fails with BK_ERR_UNSUPPORTED unless the weight
 * is torus-invariant with n = 1.
 *
 * # Safety
 * `w` live handle; `out` valid.
 */
int bk_oracle_build(const struct BkWeight *w, struct BkOracle **out);

/**
 * # Safety
 * `o` must come from `bk_oracle_build` and not be freed twice.
 */
void bk_oracle_free(struct BkOracle *o);

/**
 * Equilibrium potential phi_e at interleaved coordinates (2 doubles).
 *
 * # Safety
 * `o` live handle; `coords` holds `len` doubles; `out` valid.
 */
int bk_oracle_phi_e(const struct BkOracle *o, const double *coords, size_t len, double *out);

/**
 * Draws one determinantal batch into a caller buffer of interleaved
 * (re, im) pairs. `capacity` counts points; dim H_k points are written
 * and `written` is set to that count.
 *
 * # Safety
 * `m` live n = 1 model handle; `points` holds at least `2 * capacity`
 * doubles; `written` valid.
 */
int bk_sample_dpp(const struct BkModel *m,
                  uint64_t seed,
                  double *points,
                  size_t capacity,
                  size_t *written);

/**
 * Static description of a status code.
 */
const char *bk_strerror(int code);

#endif  /* BERGKIT_H */
