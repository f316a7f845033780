#ifndef PBSURROGATE_FFI_H
#define PBSURROGATE_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function.
typedef enum PbsStatus {
  PBS_STATUS_OK = 0,
  PBS_STATUS_NULL_POINTER = 1,
  PBS_STATUS_INVALID_ARGUMENT = 2,
  PBS_STATUS_OUTSIDE_DOMAIN = 3,
  PBS_STATUS_MISSING_FILE = 4,
  PBS_STATUS_IO = 5,
  PBS_STATUS_FORMAT = 6,
  PBS_STATUS_NUMERIC = 7,
  PBS_STATUS_BUFFER_TOO_SMALL = 8,
  PBS_STATUS_PANIC = 9,
} PbsStatus;

// A centered-inclusion problem with fixed Neumann data.
typedef struct PbsOracle PbsOracle;

// A loaded surrogate store.
typedef struct PbsStore PbsStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `len` bytes, into `buf`. Returns the full message length
// excluding the terminator; pass a null `buf` to query it.
//
// # Safety
// `buf` must be null or valid for `len` bytes of writes.
uintptr_t pbs_last_error_message(char *buf, uintptr_t len);

// Loads a store written by the preprocessing stage.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for one write.
enum PbsStatus pbs_store_load(const char *path, struct PbsStore **out);

// Releases a store; null is ignored.
//
// # Safety
// `store` must be null or come from [`pbs_store_load`] and not be used again.
void pbs_store_free(struct PbsStore *store);

// Number of design points, or 0 for a null handle.
//
// # Safety
// `store` must be null or a live handle.
uintptr_t pbs_store_len(const struct PbsStore *store);

// Parameter dimension, or 0 for a null handle.
//
// # Safety
// `store` must be null or a live handle.
uintptr_t pbs_store_dim(const struct PbsStore *store);

// Observations per evaluation, or 0 for a null handle.
//
// # Safety
// `store` must be null or a live handle.
uintptr_t pbs_store_num_observations(const struct PbsStore *store);

// Number of neighbors the store was built for, or 0 for a null handle.
//
// # Safety
// `store` must be null or a live handle.
uintptr_t pbs_store_default_k(const struct PbsStore *store);

// Writes the surrogate observation vector at `theta` into `out`, which
// must hold at least [`pbs_store_num_observations`] values. `k = 0`
// selects the store's default.
//
// # Safety
// `theta` must point to `dim` values and `out` to `out_len` writable values.
enum PbsStatus pbs_store_evaluate(const struct PbsStore *store,
                                  const double *theta,
                                  uintptr_t dim,
                                  uintptr_t k,
                                  double *out,
                                  uintptr_t out_len);

// A-posteriori bounds at `theta`: the residual bound and the solution
// error bound (residual over the coercivity constant). `k = 0` selects the
// store's default.
//
// # Safety
// `theta` must point to `dim` values; the outputs must be valid for one write.
enum PbsStatus pbs_store_error_bound(const struct PbsStore *store,
                                     const double *theta,
                                     uintptr_t dim,
                                     uintptr_t k,
                                     double *residual,
                                     double *solution);

// Creates an oracle for an inclusion of conductivity `1 + contrast` and
// radius `radius` in the unit disk, with flux `Σ_n flux_coeffs[n-1] cos(nθ)`.
//
// # Safety
// `flux_coeffs` must point to `n_coeffs` values; `out` valid for one write.
enum PbsStatus pbs_oracle_new(double contrast,
                              double radius,
                              const double *flux_coeffs,
                              uintptr_t n_coeffs,
                              struct PbsOracle **out);

// Boundary potential `u(1, angle)`.
//
// # Safety
// `oracle` must be a live handle and `out` valid for one write.
enum PbsStatus pbs_oracle_eval(const struct PbsOracle *oracle, double angle, double *out);

// Releases an oracle; null is ignored.
//
// # Safety
// `oracle` must be null or come from [`pbs_oracle_new`] and not be used again.
void pbs_oracle_free(struct PbsOracle *oracle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBSURROGATE_FFI_H */
