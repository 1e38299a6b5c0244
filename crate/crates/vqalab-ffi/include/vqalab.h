#ifndef VQALAB_H
#define VQALAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum VqaStatus {
  VQA_STATUS_OK = 0,
  VQA_STATUS_NULL_POINTER = 1,
  VQA_STATUS_INVALID_ARGUMENT = 2,
  VQA_STATUS_DIMENSION = 3,
  VQA_STATUS_SIZE_LIMIT = 4,
  VQA_STATUS_NUMERICAL = 5,
  VQA_STATUS_PANIC = 6,
} VqaStatus;

// Opaque parameterized circuit.
typedef struct VqaAnsatz VqaAnsatz;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *vqa_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *vqa_version(void);

// MPS ansatz: `n - k + 1` width-`k` windows of brickwork depth `depth`.
enum VqaStatus vqa_ansatz_mps(size_t n, size_t k, size_t depth, struct VqaAnsatz **out);

// Hardware-efficient brickwork over all `n` qubits.
enum VqaStatus vqa_ansatz_hea(size_t n, size_t depth, struct VqaAnsatz **out);

// Convolution-pooling ansatz; `n` must be a power of two.
enum VqaStatus vqa_ansatz_qcnn(size_t n, size_t depth, struct VqaAnsatz **out);

// Releases a handle; null is ignored.
//
// # Safety
// `a` must be null or a handle from a `vqa_ansatz_*` constructor that has
// not been freed.
void vqa_ansatz_free(struct VqaAnsatz *a);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum VqaStatus vqa_ansatz_num_params(const struct VqaAnsatz *a, size_t *out);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum VqaStatus vqa_ansatz_num_qubits(const struct VqaAnsatz *a, size_t *out);

// `⟨σ| C(θ)† W C(θ) |σ⟩`.
//
// # Safety
// `a` must be a live handle, `w` a NUL-terminated string, `theta` valid
// for `theta_len` reads, `state` null or valid for `state_len` reads, and
// `out` writable.
enum VqaStatus vqa_expectation(const struct VqaAnsatz *a,
                               const char *w,
                               const double *theta,
                               size_t theta_len,
                               const double *state,
                               size_t state_len,
                               double *out);

// Parameter-shift gradient; `out` receives `theta_len` values.
//
// # Safety
// As [`vqa_expectation`], with `out` valid for `out_len` writes.
enum VqaStatus vqa_gradient(const struct VqaAnsatz *a,
                            const char *w,
                            const double *theta,
                            size_t theta_len,
                            const double *state,
                            size_t state_len,
                            double *out,
                            size_t out_len);

// `‖C(θ)† W C(θ)‖_𝕂`.
//
// # Safety
// `a` must be a live handle, `w` a NUL-terminated string, `theta` valid
// for `theta_len` reads, and `out` writable.
enum VqaStatus vqa_k_norm(const struct VqaAnsatz *a,
                          const char *w,
                          const double *theta,
                          size_t theta_len,
                          double *out);

// Haar moment of the global projector for bit strings `p, q, r, s`, each
// `n` bytes of 0/1 with qubit 1 first.
//
// # Safety
// Each bit pointer must be valid for `n` reads and `out` writable.
enum VqaStatus vqa_mu_global(size_t n,
                             size_t k,
                             const uint8_t *p,
                             const uint8_t *q,
                             const uint8_t *r,
                             const uint8_t *s,
                             double *out);

// Second moment of `tr(Z_n |0⟩⟨0|_C)` over Haar windows.
//
// # Safety
// `out` must be writable.
enum VqaStatus vqa_mu_local_zero(size_t n, size_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VQALAB_H */
