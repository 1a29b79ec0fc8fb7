#ifndef FEPLAB_H
#define FEPLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FeplabStatus {
  FEPLAB_STATUS_OK = 0,
  FEPLAB_STATUS_INVALID_ARGUMENT = 1,
  FEPLAB_STATUS_DIMENSION = 2,
  FEPLAB_STATUS_PARSE = 3,
  FEPLAB_STATUS_IO = 4,
  FEPLAB_STATUS_CONFIG = 5,
  FEPLAB_STATUS_DATA = 6,
  FEPLAB_STATUS_NUMERIC = 7,
  FEPLAB_STATUS_NULL_POINTER = 8,
  FEPLAB_STATUS_PANIC = 9,
} FeplabStatus;

// Calibrated EESM predictor.
typedef struct FeplabEesm FeplabEesm;

// Link chain (codec plus interleaver seed).
typedef struct FeplabLink FeplabLink;

// Trained neural predictor.
typedef struct FeplabMlp FeplabMlp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *feplab_last_error(void);

// Library version as a static NUL-terminated string.
const char *feplab_version(void);

// Loads a model file. On success `*out` owns a handle for
// [`feplab_mlp_free`].
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum FeplabStatus feplab_mlp_load(const char *path, struct FeplabMlp **out_model);

// # Safety
// `model` must come from [`feplab_mlp_load`] and not be used afterwards.
void feplab_mlp_free(struct FeplabMlp *model);

// Number of subcarriers the model expects; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
uintptr_t feplab_mlp_input_dim(const struct FeplabMlp *model);

// Number of configurations the model predicts; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
uintptr_t feplab_mlp_output_dim(const struct FeplabMlp *model);

// Predicted FEP of every configuration from linear per-subcarrier SINRs.
//
// # Safety
// `sinr` must point to `sinr_len` doubles and `fep_out` to `fep_len`.
enum FeplabStatus feplab_mlp_predict(const struct FeplabMlp *model,
                                     const double *sinr,
                                     uintptr_t sinr_len,
                                     double *fep_out,
                                     uintptr_t fep_len);

// Loads an EESM predictor manifest together with its β and curve files.
//
// # Safety
// `manifest` must be a NUL-terminated string and `out_eesm` valid.
enum FeplabStatus feplab_eesm_load(const char *manifest, struct FeplabEesm **out_eesm);

// # Safety
// `eesm` must come from [`feplab_eesm_load`] and not be used afterwards.
void feplab_eesm_free(struct FeplabEesm *eesm);

// # Safety
// `eesm` must be null or a live handle.
uintptr_t feplab_eesm_num_configs(const struct FeplabEesm *eesm);

// Calibrated β of configuration `k` (1-based).
//
// # Safety
// `eesm` must be a live handle and `beta_out` valid.
enum FeplabStatus feplab_eesm_beta(const struct FeplabEesm *eesm, uintptr_t k, double *beta_out);

// # Safety
// `sinr` must point to `sinr_len` doubles and `fep_out` to `fep_len`.
enum FeplabStatus feplab_eesm_predict(const struct FeplabEesm *eesm,
                                      const double *sinr,
                                      uintptr_t sinr_len,
                                      double *fep_out,
                                      uintptr_t fep_len);

// Effective SINR (linear) of `sinr` for parameter `beta`. `as_printed`
// selects the optimistic variant of the mapping.
//
// # Safety
// `sinr` must point to `sinr_len` doubles and `out_gamma` be valid.
enum FeplabStatus feplab_eesm_compress(const double *sinr,
                                       uintptr_t sinr_len,
                                       double beta,
                                       bool as_printed,
                                       double *out_gamma);

// 1-based configuration maximizing `payload_k (1 - fep_k)`, ties to the
// smaller k.
//
// # Safety
// `fep` and `payloads` must each point to `len` elements.
enum FeplabStatus feplab_select_rate(const double *fep,
                                     const uintptr_t *payloads,
                                     uintptr_t len,
                                     uintptr_t *k_out);

// Creates a link chain for the named codec (`"conv_k7_r13"`).
//
// # Safety
// `codec` must be a NUL-terminated string and `out_link` valid.
enum FeplabStatus feplab_link_new(const char *codec,
                                  uint64_t interleaver_seed,
                                  struct FeplabLink **out_link);

// # Safety
// `link` must come from [`feplab_link_new`] and not be used afterwards.
void feplab_link_free(struct FeplabLink *link);

// Monte Carlo FEP of one configuration over `trials` frames on the
// channel with linear SINRs `sinr` (one per subcarrier).
//
// # Safety
// `sinr` must point to `sinr_len` doubles and `fep_out` be valid.
enum FeplabStatus feplab_link_estimate_fep(const struct FeplabLink *link,
                                           uintptr_t frame_symbols,
                                           double code_rate,
                                           const double *sinr,
                                           uintptr_t sinr_len,
                                           uintptr_t trials,
                                           uint64_t seed,
                                           double *fep_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEPLAB_H */
