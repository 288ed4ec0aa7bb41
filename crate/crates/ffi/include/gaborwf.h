#ifndef GABORWF_H
#define GABORWF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GwfStatus {
  GWF_STATUS_OK = 0,
  GWF_STATUS_NULL_POINTER = 1,
  GWF_STATUS_INVALID_ARGUMENT = 2,
  GWF_STATUS_GRID_MISMATCH = 3,
  GWF_STATUS_NUMERICAL = 4,
  GWF_STATUS_UNSUPPORTED = 5,
  GWF_STATUS_IO = 6,
  GWF_STATUS_PANIC = 7,
} GwfStatus;

/*
 Sampled signal on a periodic grid.
 */
typedef struct GwfSignal GwfSignal;

/*
 Short-time Fourier transform on the full lattice.
 */
typedef struct GwfStft GwfStft;

/*
 Directional wave front estimate.
 */
typedef struct GwfWavefront GwfWavefront;

/*
 Analysis window.
 */
typedef struct GwfWindow GwfWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty if none. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *gwf_last_error(void);

/*
 Creates a signal from `n_points` real and imaginary parts. `imag` may be
 null for a real signal. `n_points` must be a power of two.

 # Safety
 `real` (and `imag` if non-null) must point to `n_points` doubles.
 */
enum GwfStatus gwf_signal_new(size_t n_points,
                              double extent,
                              const double *real,
                              const double *imag,
                              struct GwfSignal **out);

/*
 # Safety
 `s` must be null or a handle returned by this library, not yet freed.
 */
void gwf_signal_free(struct GwfSignal *s);

/*
 Number of samples, or 0 for a null handle.

 # Safety
 `s` must be null or a live handle.
 */
size_t gwf_signal_len(const struct GwfSignal *s);

/*
 Copies the samples into `real` and `imag`, each of length `len`.

 # Safety
 `s` must be a live handle; `real` and `imag` must hold `len` doubles.
 */
enum GwfStatus gwf_signal_values(const struct GwfSignal *s, double *real, double *imag, size_t len);

/*
 L2 norm of the signal.

 # Safety
 `s` must be a live handle and `out` a valid pointer.
 */
enum GwfStatus gwf_signal_norm(const struct GwfSignal *s, double *out);

/*
 Gaussian window (`hermite == 0`) or first Hermite window, L2-normalized.

 # Safety
 `out` must be a valid pointer.
 */
enum GwfStatus gwf_window_new(size_t n_points,
                              double extent,
                              int32_t hermite,
                              struct GwfWindow **out);

/*
 # Safety
 `w` must be null or a live handle.
 */
void gwf_window_free(struct GwfWindow *w);

/*
 STFT of `s` against `w` on the full time-frequency lattice.

 # Safety
 `s`, `w` must be live handles and `out` a valid pointer.
 */
enum GwfStatus gwf_stft_new(const struct GwfSignal *s,
                            const struct GwfWindow *w,
                            struct GwfStft **out);

/*
 # Safety
 `a` must be null or a live handle.
 */
void gwf_stft_free(struct GwfStft *a);

/*
 Lattice shape: rows are positions, columns are frequencies.

 # Safety
 `a` must be a live handle; `n_x`, `n_xi` valid pointers.
 */
enum GwfStatus gwf_stft_shape(const struct GwfStft *a, size_t *n_x, size_t *n_xi);

/*
 Copies `|V_g f|` row-major into `buf` of length `n_x * n_xi`.

 # Safety
 `a` must be a live handle; `buf` must hold `len` doubles.
 */
enum GwfStatus gwf_stft_abs(const struct GwfStft *a, double *buf, size_t len);

/*
 Free Schrodinger evolution `e^{it Delta}` (exact in Fourier space).

 # Safety
 `s` must be a live handle and `out` a valid pointer.
 */
enum GwfStatus gwf_evolve_free(const struct GwfSignal *s, double t, struct GwfSignal **out);

/*
 Harmonic oscillator evolution by Strang splitting.

 # Safety
 `s` must be a live handle and `out` a valid pointer.
 */
enum GwfStatus gwf_evolve_harmonic(const struct GwfSignal *s,
                                   double t,
                                   double steps_per_unit,
                                   struct GwfSignal **out);

/*
 Wave front estimate with default parameters.

 # Safety
 `s`, `w` must be live handles and `out` a valid pointer.
 */
enum GwfStatus gwf_wavefront_new(const struct GwfSignal *s,
                                 const struct GwfWindow *w,
                                 struct GwfWavefront **out);

/*
 # Safety
 `e` must be null or a live handle.
 */
void gwf_wavefront_free(struct GwfWavefront *e);

/*
 Number of angular bins, or 0 for a null handle.

 # Safety
 `e` must be null or a live handle.
 */
size_t gwf_wavefront_n_bins(const struct GwfWavefront *e);

/*
 Angle of bin `bin` and whether it belongs to the estimated set.

 # Safety
 `e` must be a live handle; `angle`, `in_wf` valid pointers.
 */
enum GwfStatus gwf_wavefront_bin(const struct GwfWavefront *e,
                                 size_t bin,
                                 double *angle,
                                 int32_t *in_wf);

/*
 Applies the harmonic oscillator flow at time `t` to `(x, xi)` in place.

 # Safety
 `x` and `xi` must be valid pointers.
 */
enum GwfStatus gwf_flow_harmonic(double t, double *x, double *xi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GABORWF_H */
