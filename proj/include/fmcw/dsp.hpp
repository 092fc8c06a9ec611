#ifndef FMCW_DSP_HPP
#define FMCW_DSP_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "fmcw/config.hpp"
#include "fmcw/core.hpp"
#include "fmcw/fft.hpp"
#include "fmcw/simulate.hpp"

namespace fmcw {

/// Range spectra [element][chirp][range_bin] for one frame.
struct RangeProfiles {
  NdArray<cdouble, 3> data;

  std::size_t elements() const { return data.extent(0); }
  std::size_t chirps() const { return data.extent(1); }
  std::size_t range_bins() const { return data.extent(2); }
};

/// Range-Doppler spectra [element][range_bin][doppler_bin], Doppler axis
/// shifted so bin doppler_bins()/2 is zero velocity.
struct RdMap {
  NdArray<cdouble, 3> data;
  double range_scale = 0.0;     // m per bin
  double velocity_scale = 0.0;  // m/s per bin

  std::size_t elements() const { return data.extent(0); }
  std::size_t range_bins() const { return data.extent(1); }
  std::size_t doppler_bins() const { return data.extent(2); }
  std::size_t zero_doppler_bin() const { return doppler_bins() / 2; }

  std::vector<cdouble> snapshot(std::size_t range_bin, std::size_t doppler_bin) const {
    std::vector<cdouble> out(elements());
    for (std::size_t e = 0; e < elements(); ++e) out[e] = data(e, range_bin, doppler_bin);
    return out;
  }
};

/// Non-negative magnitude image [range_bin][angle_bin]; angle axis is sin-spaced.
struct RaHeatmap {
  Grid<double> values;

  std::size_t range_bins() const { return values.extent(0); }
  std::size_t angle_bins() const { return values.extent(1); }
};

/// Complex range-angle slices [chirp_time][range][angle] over a rectangular
/// window of the full range x angle grid.
struct PerChirpRaTensor {
  NdArray<cdouble, 3> data;
  std::size_t range_offset = 0;
  std::size_t angle_offset = 0;
  std::size_t grid_range_bins = 0;
  std::size_t grid_angle_bins = 0;
  std::size_t frames = 0;

  std::size_t chirp_time() const { return data.extent(0); }
  std::size_t range_bins() const { return data.extent(1); }
  std::size_t angle_bins() const { return data.extent(2); }

  bool covers(std::size_t range_bin, std::size_t angle_bin) const {
    return range_bin >= range_offset && range_bin < range_offset + range_bins() &&
           angle_bin >= angle_offset && angle_bin < angle_offset + angle_bins();
  }
};

struct Spectrogram {
  Grid<double> values;  // [frequency_bin][time_window], frequency axis shifted
  std::size_t window = 0;
  std::size_t hop = 0;
  std::size_t nfft = 0;

  std::size_t frequency_bins() const { return values.extent(0); }
  std::size_t time_windows() const { return values.extent(1); }
};

struct StftParams {
  std::size_t window = 255;
  std::size_t hop = 15;
  std::size_t nfft = 256;
  WindowKind window_kind = WindowKind::hann;
};

inline std::size_t stft_window_count(std::size_t length, std::size_t window, std::size_t hop) {
  if (length < window) return 0;
  return (length - window) / hop + 1;
}

// ---------------------------------------------------------------------------

/// Windowed, zero-padded forward FFT of one sequence. The result has n_fft
/// bins and is not shifted.
inline std::vector<cdouble> windowed_fft(std::span<const cdouble> x, const std::vector<double>& w,
                                         const FftPlan& plan) {
  if (x.size() > plan.size()) throw ShapeError("sequence longer than FFT size");
  if (w.size() != x.size()) throw ShapeError("window length does not match sequence");
  std::vector<cdouble> buf(plan.size(), cdouble{});
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i] * w[i];
  plan.forward(buf);
  return buf;
}

/// Range FFT of every chirp of every element in one frame.
inline RangeProfiles range_fft(const DataCube& cube, std::size_t frame, const RadarConfig& cfg,
                               WindowKind window = WindowKind::hann) {
  if (frame >= cube.frames()) throw ShapeError("frame index out of range");
  if (cube.samples_per_chirp() > cfg.range_fft_size)
    throw ShapeError("samples per chirp exceed range FFT size");
  const std::size_t E = cube.elements(), L = cube.chirps(), N = cube.samples_per_chirp();
  const FftPlan plan(cfg.range_fft_size);
  const auto w = make_window(window, N);
  RangeProfiles out{NdArray<cdouble, 3>({E, L, cfg.range_fft_size})};
  std::vector<cdouble> buf(cfg.range_fft_size);
  for (std::size_t e = 0; e < E; ++e) {
    for (std::size_t l = 0; l < L; ++l) {
      std::fill(buf.begin(), buf.end(), cdouble{});
      const cfloat* in = cube.samples.row(frame, e, l);
      for (std::size_t n = 0; n < N; ++n) buf[n] = cdouble(in[n].real(), in[n].imag()) * w[n];
      plan.forward(buf);
      std::copy(buf.begin(), buf.end(), out.data.row(e, l));
    }
  }
  return out;
}

/// Velocity FFT across chirps for each element and range bin.
inline RdMap doppler_fft(const RangeProfiles& rp, const RadarConfig& cfg,
                         WindowKind window = WindowKind::hann) {
  if (rp.chirps() > cfg.doppler_fft_size) throw ShapeError("chirp count exceeds Doppler FFT size");
  const std::size_t E = rp.elements(), L = rp.chirps(), R = rp.range_bins();
  const std::size_t D = cfg.doppler_fft_size;
  const FftPlan plan(D);
  const auto w = make_window(window, L);
  RdMap out{NdArray<cdouble, 3>({E, R, D}), cfg.range_bin_spacing(), cfg.doppler_bin_spacing()};
  std::vector<cdouble> buf(D);
  for (std::size_t e = 0; e < E; ++e) {
    for (std::size_t r = 0; r < R; ++r) {
      std::fill(buf.begin(), buf.end(), cdouble{});
      for (std::size_t l = 0; l < L; ++l) buf[l] = rp.data(e, l, r) * w[l];
      plan.forward(buf);
      fftshift(std::span<cdouble>(buf));
      std::copy(buf.begin(), buf.end(), out.data.row(e, r));
    }
  }
  return out;
}

inline RdMap range_doppler(const DataCube& cube, std::size_t frame, const RadarConfig& cfg,
                           WindowKind window = WindowKind::hann) {
  return doppler_fft(range_fft(cube, frame, cfg, window), cfg, window);
}

/// Zero-padded, shifted FFT across array elements. Bin n_fft/2 is broadside.
inline std::vector<cdouble> angle_fft(std::span<const cdouble> snapshot, const FftPlan& plan) {
  if (snapshot.empty() || snapshot.size() > plan.size())
    throw ShapeError("snapshot length must be in [1, angle FFT size]");
  std::vector<cdouble> buf(plan.size(), cdouble{});
  std::copy(snapshot.begin(), snapshot.end(), buf.begin());
  plan.forward(buf);
  fftshift(std::span<cdouble>(buf));
  return buf;
}

inline std::vector<cdouble> angle_fft(std::span<const cdouble> snapshot, std::size_t n_fft) {
  return angle_fft(snapshot, FftPlan(n_fft));
}

/// Element-summed magnitude [range][doppler].
inline Grid<double> summed_magnitude(const RdMap& rd) {
  Grid<double> out({rd.range_bins(), rd.doppler_bins()}, 0.0);
  for (std::size_t e = 0; e < rd.elements(); ++e)
    for (std::size_t r = 0; r < rd.range_bins(); ++r)
      for (std::size_t d = 0; d < rd.doppler_bins(); ++d) out(r, d) += std::abs(rd.data(e, r, d));
  return out;
}

struct RaHeatmapOptions {
  bool exclude_zero_doppler = false;
};

/// 3DFFT heatmap: per range bin, the Doppler bin with the largest
/// element-summed magnitude (lowest index on ties) feeds the angle FFT.
inline RaHeatmap ra_heatmap(const RdMap& rd, const RadarConfig& cfg,
                            const RaHeatmapOptions& opt = {}) {
  if (rd.elements() != cfg.n_virtual()) throw ShapeError("RD map element count mismatch");
  const std::size_t R = rd.range_bins(), D = rd.doppler_bins(), A = cfg.angle_fft_size;
  const FftPlan plan(A);
  const auto mag = summed_magnitude(rd);
  RaHeatmap out{Grid<double>({R, A}, 0.0)};
  for (std::size_t r = 0; r < R; ++r) {
    std::size_t best = D;
    double best_v = -1.0;
    for (std::size_t d = 0; d < D; ++d) {
      if (opt.exclude_zero_doppler && d == rd.zero_doppler_bin()) continue;
      if (mag(r, d) > best_v) {
        best_v = mag(r, d);
        best = d;
      }
    }
    if (best == D) continue;
    const auto spec = angle_fft(rd.snapshot(r, best), plan);
    for (std::size_t a = 0; a < A; ++a) out.values(r, a) = std::abs(spec[a]);
  }
  return out;
}

inline RaHeatmap ra_heatmap(const DataCube& cube, std::size_t frame, const RadarConfig& cfg,
                            WindowKind window = WindowKind::hann,
                            const RaHeatmapOptions& opt = {}) {
  return ra_heatmap(range_doppler(cube, frame, cfg, window), cfg, opt);
}

/// Rectangular sub-window of the range x angle grid.
struct RaWindow {
  std::size_t range_first = 0;
  std::size_t range_count = 0;
  std::size_t angle_first = 0;
  std::size_t angle_count = 0;
};

/// Per-chirp range FFT then angle FFT (no Doppler FFT) over all frames of the
/// cube, stacked in chirp-time order. With a window, only that block of the
/// range x angle grid is stored.
inline PerChirpRaTensor per_chirp_ra_tensor(const DataCube& cube, const RadarConfig& cfg,
                                            WindowKind window = WindowKind::hann,
                                            std::optional<RaWindow> region = std::nullopt) {
  if (cube.frames() == 0) throw ShapeError("per-chirp RA tensor needs at least one frame");
  if (cube.elements() != cfg.n_virtual()) throw ShapeError("cube element count mismatch");
  if (cube.samples_per_chirp() > cfg.range_fft_size)
    throw ShapeError("samples per chirp exceed range FFT size");
  const std::size_t R = cfg.range_fft_size, A = cfg.angle_fft_size;
  RaWindow win = region.value_or(RaWindow{0, R, 0, A});
  if (win.range_first + win.range_count > R || win.angle_first + win.angle_count > A ||
      win.range_count == 0 || win.angle_count == 0)
    throw ShapeError("RA window outside the range x angle grid");

  const std::size_t F = cube.frames(), E = cube.elements(), L = cube.chirps();
  const std::size_t N = cube.samples_per_chirp();
  const FftPlan range_plan(R);
  const FftPlan angle_plan(A);
  const auto w = make_window(window, N);

  PerChirpRaTensor out;
  out.data = NdArray<cdouble, 3>({F * L, win.range_count, win.angle_count});
  out.range_offset = win.range_first;
  out.angle_offset = win.angle_first;
  out.grid_range_bins = R;
  out.grid_angle_bins = A;
  out.frames = F;

  std::vector<cdouble> spectra(E * R);
  std::vector<cdouble> buf(R);
  std::vector<cdouble> snap(E);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t e = 0; e < E; ++e) {
        std::fill(buf.begin(), buf.end(), cdouble{});
        const cfloat* in = cube.samples.row(f, e, l);
        for (std::size_t n = 0; n < N; ++n) buf[n] = cdouble(in[n].real(), in[n].imag()) * w[n];
        range_plan.forward(buf);
        std::copy(buf.begin(), buf.end(), spectra.begin() + static_cast<std::ptrdiff_t>(e * R));
      }
      const std::size_t t = f * L + l;
      for (std::size_t r = 0; r < win.range_count; ++r) {
        for (std::size_t e = 0; e < E; ++e) snap[e] = spectra[e * R + win.range_first + r];
        const auto spec = angle_fft(snap, angle_plan);
        for (std::size_t a = 0; a < win.angle_count; ++a)
          out.data(t, r, a) = spec[win.angle_first + a];
      }
    }
  }
  return out;
}

/// Magnitude STFT with windows of `window` samples at stride `hop`, each
/// zero-padded to `nfft` and shifted so bin nfft/2 is zero frequency.
inline Spectrogram stft(std::span<const cdouble> signal, const StftParams& p = {}) {
  if (p.window == 0 || p.hop == 0) throw ShapeError("STFT window and hop must be positive");
  if (p.nfft < p.window) throw ShapeError("STFT FFT size smaller than window");
  if (signal.size() < p.window)
    throw ShapeError("signal length " + std::to_string(signal.size()) +
                     " shorter than STFT window " + std::to_string(p.window));
  const std::size_t T = stft_window_count(signal.size(), p.window, p.hop);
  const FftPlan plan(p.nfft);
  const auto w = make_window(p.window_kind, p.window);
  Spectrogram out{Grid<double>({p.nfft, T}, 0.0), p.window, p.hop, p.nfft};
  for (std::size_t t = 0; t < T; ++t) {
    auto spec = windowed_fft(signal.subspan(t * p.hop, p.window), w, plan);
    fftshift(std::span<cdouble>(spec));
    for (std::size_t k = 0; k < p.nfft; ++k) out.values(k, t) = std::abs(spec[k]);
  }
  return out;
}

/// Frequency bin of the largest magnitude in one time window.
inline std::size_t dominant_bin(const Spectrogram& s, std::size_t time_window) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.frequency_bins(); ++k)
    if (s.values(k, time_window) > s.values(best, time_window)) best = k;
  return best;
}

/// Velocity of a shifted slow-time spectrum bin for a chirp-rate sampled signal.
inline double stft_bin_velocity(const RadarConfig& cfg, std::size_t nfft, double bin) {
  return (bin - static_cast<double>(nfft / 2)) * cfg.wavelength() /
         (2.0 * static_cast<double>(nfft) * cfg.chirp_duration);
}

}  // namespace fmcw

#endif  // FMCW_DSP_HPP
