#ifndef MULTIFAULT_H
#define MULTIFAULT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Number of channels in one observation: generator currents a, b, c and
// vibration, then the same four for the motor.
#define MF_CHANNEL_COUNT 8

#define MF_LABEL_COUNT 2

typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_ARGUMENT = 2,
  MF_STATUS_IO = 3,
  MF_STATUS_PARSE = 4,
  MF_STATUS_NUMERICAL = 5,
  MF_STATUS_BUFFER_TOO_SMALL = 6,
  MF_STATUS_PANIC = 7,
} MfStatus;

// Trained model bundle.
typedef struct MfModel MfModel;

// DPSS taper set.
typedef struct MfTaperSet MfTaperSet;

typedef struct MfDiagnosis {
  uint8_t is_unbalance;
  uint8_t is_misalignment;
  // Tree prediction, 0 = good through 3 = unacceptable.
  int32_t severity;
  // Chart lookup of the larger vibration RMS, same coding.
  int32_t chart_severity;
  double vibration_rms_mm_s[2];
} MfDiagnosis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *mf_last_error_message(void);

const char *mf_version(void);

// Looks up the severity zone (0..=3) of an RMS vibration velocity in mm/s
// for machine class 0..=3 (I..IV).
//
// # Safety
// `out_severity` must be valid for writes.
enum MfStatus mf_iso_severity(double v_rms_mm_s, int32_t machine_class_code, int32_t *out_severity);

// Computes `k` DPSS tapers of length `n` with time-bandwidth product `nw`.
//
// # Safety
// `out` must be valid for writes.
enum MfStatus mf_taper_set_new(size_t n, double nw, size_t k, struct MfTaperSet **out);

// Copies taper `index` (length `n`) into `out`.
//
// # Safety
// `set` must come from [`mf_taper_set_new`]; `out` must hold `out_len`
// values; `written` must be valid for writes.
enum MfStatus mf_taper_set_get(const struct MfTaperSet *set,
                               size_t index,
                               double *out,
                               size_t out_len,
                               size_t *written);

// Fraction of taper `index`'s energy inside the design band.
//
// # Safety
// `set` must come from [`mf_taper_set_new`]; `out` must be valid for writes.
enum MfStatus mf_taper_set_concentration(const struct MfTaperSet *set, size_t index, double *out);

// # Safety
// `set` must come from [`mf_taper_set_new`] and not be used afterwards.
void mf_taper_set_free(struct MfTaperSet *set);

// One-sided FFT amplitude spectrum of `n` samples; bin `i` is at
// `i * fs_hz / n` and `n / 2 + 1` values are produced.
//
// # Safety
// `samples` must hold `n` values, `out` `out_len` values; `written` must be
// valid for writes.
enum MfStatus mf_fft_magnitude(const double *samples,
                               size_t n,
                               double fs_hz,
                               double *out,
                               size_t out_len,
                               size_t *written);

// One-sided multitaper PSD of `n` samples with `k` DPSS tapers; bin `i` is
// at `i * fs_hz / n` and `n / 2 + 1` values are produced.
//
// # Safety
// `samples` must hold `n` values, `out` `out_len` values; `written` must be
// valid for writes.
enum MfStatus mf_multitaper_psd(const double *samples,
                                size_t n,
                                double fs_hz,
                                double nw,
                                size_t k,
                                double *out,
                                size_t out_len,
                                size_t *written);

// Loads a model bundle written by the `train` command.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for writes.
enum MfStatus mf_model_load(const char *path, struct MfModel **out);

// Length of the raw feature vector the model expects.
//
// # Safety
// `model` must come from [`mf_model_load`]; `out` must be valid for writes.
enum MfStatus mf_model_num_features(const struct MfModel *model, size_t *out);

// Number of samples per channel the model's feature extractor expects.
//
// # Safety
// `model` must come from [`mf_model_load`]; `out` must be valid for writes.
enum MfStatus mf_model_samples_per_channel(const struct MfModel *model, size_t *out);

// Predicts the unbalance and misalignment labels from an unscaled feature
// vector; `labels` receives [`MF_LABEL_COUNT`] values.
//
// # Safety
// `model` must come from [`mf_model_load`]; `features` must hold `len`
// values and `labels` two.
enum MfStatus mf_model_predict(const struct MfModel *model,
                               const double *features,
                               size_t len,
                               uint8_t *labels);

// Predicts the severity zone from the generator and motor vibration RMS.
//
// # Safety
// `model` must come from [`mf_model_load`]; `out_severity` must be valid
// for writes.
enum MfStatus mf_model_predict_severity(const struct MfModel *model,
                                        double vib_rms_generator,
                                        double vib_rms_motor,
                                        int32_t *out_severity);

// Extracts the unscaled feature vector of one observation. `channels`
// holds [`MF_CHANNEL_COUNT`] consecutive blocks of `n_per_channel` samples.
//
// # Safety
// `model` must come from [`mf_model_load`]; `channels` must hold
// `8 * n_per_channel` values, `out` `out_len` values; `written` must be
// valid for writes.
enum MfStatus mf_model_extract_features(const struct MfModel *model,
                                        const double *channels,
                                        size_t n_per_channel,
                                        double *out,
                                        size_t out_len,
                                        size_t *written);

// Full diagnosis of one observation laid out as for
// [`mf_model_extract_features`].
//
// # Safety
// `model` must come from [`mf_model_load`]; `channels` must hold
// `8 * n_per_channel` values; `out` must be valid for writes.
enum MfStatus mf_model_diagnose(const struct MfModel *model,
                                const double *channels,
                                size_t n_per_channel,
                                struct MfDiagnosis *out);

// # Safety
// `model` must come from [`mf_model_load`] and not be used afterwards.
void mf_model_free(struct MfModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIFAULT_H */
