#ifndef VRLITE_H
#define VRLITE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define VR_ALGO_SGD 0

#define VR_ALGO_SVRG 1

#define VR_ALGO_SAGA 2

#define VR_ALGO_VRLITE 3

#define VR_TASK_CLASSIFICATION 0

#define VR_TASK_REGRESSION 1

#define VR_DEFAULT_LAMBDA 1e-4

#define VR_TAG_SYNC_REPORT 0

#define VR_TAG_ASYNC_DELTA 1

#define VR_TAG_GLOBAL_STATE 2

typedef enum {
  VR_STATUS_OK = 0,
  VR_STATUS_NULL_POINTER = 1,
  VR_STATUS_INVALID_ARGUMENT = 2,
  VR_STATUS_DIMENSION_MISMATCH = 3,
  VR_STATUS_PARSE = 4,
  VR_STATUS_IO = 5,
  VR_STATUS_DECODE = 6,
  VR_STATUS_DIVERGED = 7,
  VR_STATUS_BUFFER_TOO_SMALL = 8,
  VR_STATUS_PANIC = 9,
} VrStatus;

/**
 * Opaque dataset handle.
 */
typedef struct VrDataset VrDataset;

/**
 * Opaque optimizer handle. Owns a copy of the dataset it trains on.
 */
typedef struct VrRun VrRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *vr_last_error(void);

/**
 * Builds a dataset from a row-major `n x d` feature matrix and `n` labels.
 *
 * # Safety
 * `features` must point to `n * d` doubles and `labels` to `n` doubles.
 */
VrStatus vr_dataset_from_dense(const double *features,
                               const double *labels,
                               size_t n,
                               size_t d,
                               uint32_t task,
                               VrDataset **out);

/**
 * Generates the 5000 x 20 synthetic toy problem for `task`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
VrStatus vr_dataset_toy(uint32_t task, uint64_t seed, VrDataset **out);

/**
 * Reads a LIBSVM file. The task is inferred from the labels.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
VrStatus vr_dataset_read_libsvm(const char *path, VrDataset **out);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t vr_dataset_len(const VrDataset *ds);

/**
 * Feature dimension, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t vr_dataset_dim(const VrDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void vr_dataset_free(VrDataset *ds);

/**
 * Starts an optimizer at `x = 0`. The loss follows the dataset task.
 * With `reuse_step_gradient` set, the averaged gradient reuses the one
 * computed for the step instead of a fresh evaluation after it.
 *
 * # Safety
 * `ds` must be a live handle and `out` writable.
 */
VrStatus vr_run_new(const VrDataset *ds,
                    uint32_t algo,
                    double eta,
                    double lambda,
                    uint64_t seed,
                    bool reuse_step_gradient,
                    VrRun **out);

/**
 * Runs `epochs` more epochs. Stops with [`VrStatus::Diverged`] as soon as
 * the iterate is no longer finite.
 *
 * # Safety
 * `run` must be a live handle.
 */
VrStatus vr_run_advance(VrRun *run, size_t epochs);

/**
 * Epochs completed so far, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t vr_run_epochs(const VrRun *run);

/**
 * Copies the current iterate into `out`, which must hold exactly the
 * dataset dimension.
 *
 * # Safety
 * `run` must be a live handle and `out` must point to `len` doubles.
 */
VrStatus vr_run_copy_x(const VrRun *run, double *out, size_t len);

/**
 * `||grad f(x)|| / ||grad f(0)||` over the whole dataset.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
VrStatus vr_run_rel_grad_norm(const VrRun *run, double *out);

/**
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
VrStatus vr_run_objective(const VrRun *run, double *out);

/**
 * # Safety
 * `run` must be null or a handle not yet freed.
 */
void vr_run_free(VrRun *run);

/**
 * Size in bytes of one encoded message frame, length prefix included.
 */
size_t vr_message_frame_len(size_t d);

/**
 * Encodes a protocol message into `buf`. `written` receives the frame size;
 * on [`VrStatus::BufferTooSmall`] it receives the size required.
 *
 * # Safety
 * `v1`, `v2` and `v3` must each point to `d` doubles, `buf` to `cap` bytes.
 */
VrStatus vr_message_encode(uint8_t tag,
                           uint32_t worker_id,
                           uint32_t epoch,
                           const double *v1,
                           const double *v2,
                           const double *v3,
                           size_t d,
                           uint8_t *buf,
                           size_t cap,
                           size_t *written);

/**
 * Decodes one complete frame of dimension `d`. The vectors are written to
 * `v1`, `v2` and `v3`, each of which must hold `d` doubles.
 *
 * # Safety
 * `buf` must point to `len` bytes and every output pointer must be writable.
 */
VrStatus vr_message_decode(const uint8_t *buf,
                           size_t len,
                           size_t d,
                           uint8_t *tag,
                           uint32_t *worker_id,
                           uint32_t *epoch,
                           double *v1,
                           double *v2,
                           double *v3);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VRLITE_H */
