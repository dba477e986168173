#ifndef OTFS_H
#define OTFS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `OTFS_STATUS_OK` is zero; everything else is an error.
 */
typedef enum OtfsStatus {
  OTFS_STATUS_OK = 0,
  OTFS_STATUS_NULL_POINTER = 1,
  OTFS_STATUS_INPUT_SHAPE = 2,
  OTFS_STATUS_CONFIG = 3,
  OTFS_STATUS_SINGULAR = 4,
  OTFS_STATUS_RESOURCE = 5,
  OTFS_STATUS_PARSE = 6,
  OTFS_STATUS_IO = 7,
  OTFS_STATUS_PANIC = 8,
} OtfsStatus;

typedef enum OtfsScheme {
  OTFS_SCHEME_OTFS = 0,
  OTFS_SCHEME_OFDM = 1,
} OtfsScheme;

/**
 * Opaque channel handle.
 */
typedef struct OtfsChannel OtfsChannel;

/**
 * Opaque receiver handle; owns its factorization.
 */
typedef struct OtfsReceiver OtfsReceiver;

/**
 * Layout-compatible with `double _Complex` and `std::complex<double>`.
 */
typedef struct OtfsComplex {
  double re;
  double im;
} OtfsComplex;

/**
 * One delay-Doppler path.
 */
typedef struct OtfsPath {
  struct OtfsComplex gain;
  size_t delay_bin;
  int64_t doppler_bin;
} OtfsPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *otfs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *otfs_version(void);

/**
 * Builds a channel on an `m x n` grid from explicit paths.
 *
 * # Safety
 * `paths` must point to `count` paths (or be null with `count == 0`);
 * `out` must be writable.
 */
enum OtfsStatus otfs_channel_new(size_t m,
                                 size_t n,
                                 double delta_f,
                                 const struct OtfsPath *paths,
                                 size_t count,
                                 struct OtfsChannel **out);

/**
 * Draws a random channel from a built-in profile name (`"eva"`, `"evb"`)
 * or a profile file path.
 *
 * # Safety
 * `profile` must be a NUL-terminated string; `out` must be writable.
 */
enum OtfsStatus otfs_channel_from_profile(size_t m,
                                          size_t n,
                                          double delta_f,
                                          const char *profile,
                                          double speed_kmh,
                                          double fc_ghz,
                                          uint64_t seed,
                                          struct OtfsChannel **out);

/**
 * Delay length `alpha` of the channel, or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live channel handle.
 */
size_t otfs_channel_alpha(const struct OtfsChannel *ch);

/**
 * Doppler length `beta` of the channel, or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live channel handle.
 */
size_t otfs_channel_beta(const struct OtfsChannel *ch);

/**
 * `out = H s`; both vectors have `len = MN` entries.
 *
 * # Safety
 * `ch` must be a live handle; `s` and `out` must hold `len` elements.
 */
enum OtfsStatus otfs_channel_apply(const struct OtfsChannel *ch,
                                   const struct OtfsComplex *s,
                                   size_t len,
                                   struct OtfsComplex *out);

/**
 * Releases a channel. Null is ignored.
 *
 * # Safety
 * `ch` must be null or a handle from `otfs_channel_*` not yet freed.
 */
void otfs_channel_free(struct OtfsChannel *ch);

/**
 * Modulates a row-major `m x n` delay-Doppler frame (`len = m n`) into
 * `len` time-domain samples.
 *
 * # Safety
 * `frame` and `out` must hold `len` elements.
 */
enum OtfsStatus otfs_modulate(enum OtfsScheme scheme,
                              size_t m,
                              size_t n,
                              const struct OtfsComplex *frame,
                              size_t len,
                              struct OtfsComplex *out);

/**
 * Factors the LMMSE receiver for `ch` at noise-to-signal ratio `nsr`.
 * The channel is copied; it may be freed afterwards.
 *
 * # Safety
 * `ch` must be a live handle; `out` must be writable.
 */
enum OtfsStatus otfs_receiver_new(const struct OtfsChannel *ch,
                                  double nsr,
                                  enum OtfsScheme scheme,
                                  struct OtfsReceiver **out);

/**
 * Equalizes `len = MN` received samples into a row-major estimate of the
 * delay-Doppler frame. Safe to call concurrently on one receiver.
 *
 * # Safety
 * `rx` must be a live handle; `r` and `out` must hold `len` elements.
 */
enum OtfsStatus otfs_receiver_equalize(const struct OtfsReceiver *rx,
                                       const struct OtfsComplex *r,
                                       size_t len,
                                       struct OtfsComplex *out);

/**
 * Releases a receiver. Null is ignored.
 *
 * # Safety
 * `rx` must be null or a handle from `otfs_receiver_new` not yet freed.
 */
void otfs_receiver_free(struct OtfsReceiver *rx);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OTFS_H */
