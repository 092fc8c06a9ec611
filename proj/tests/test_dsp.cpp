#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fmcw/doa.hpp"
#include "fmcw/dsp.hpp"
#include "fmcw/simulate.hpp"

using namespace fmcw;

namespace {

SceneObject point_at(double x, double y, double vx = 0, double vy = 0, double rcs = 1.0) {
  auto o = SceneObject::make(ObjectClass::point, {x, y}, {vx, vy});
  o.motion.rcs = rcs;
  return o;
}

SceneObject point_polar(double r, double az_deg, double rcs = 1.0) {
  const double a = deg_to_rad(az_deg);
  return point_at(r * std::sin(a), r * std::cos(a), 0, 0, rcs);
}

std::vector<cdouble> dft(const std::vector<cdouble>& x, std::size_t n) {
  std::vector<cdouble> out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < x.size(); ++i)
      out[k] += x[i] * std::polar(1.0, -2.0 * pi * static_cast<double>((k * i) % n) / static_cast<double>(n));
  return out;
}

template <typename V>
std::size_t argmax_abs(const V& v) {
  std::size_t b = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[b])) b = i;
  return b;
}

std::pair<std::size_t, std::size_t> argmax2(const Grid<double>& g) {
  std::size_t br = 0, bc = 0;
  for (std::size_t r = 0; r < g.extent(0); ++r)
    for (std::size_t c = 0; c < g.extent(1); ++c)
      if (g(r, c) > g(br, bc)) {
        br = r;
        bc = c;
      }
  return {br, bc};
}

// Noise-only cube: a noisy synthesis minus its clean twin.
DataCube noise_cube(const RadarConfig& cfg, std::uint64_t seed) {
  const Scene sc{point_at(0, 5, 0, 0, 25.0)};
  SynthesisOptions o;
  o.snr_db = 0;
  o.seed = seed;
  auto cube = synthesize(sc, cfg, 1, o);
  const auto clean = synthesize(sc, cfg, 1);
  for (std::size_t i = 0; i < cube.samples.size(); ++i) cube.samples.data()[i] -= clean.samples.data()[i];
  return cube;
}

}  // namespace

// ---------------------------------------------------------------------------
// Range FFT
// ---------------------------------------------------------------------------

TEST(RangeFft, CanonicalPeakAtBin10) {
  RadarConfig cfg;
  const auto rp = range_fft(synthesize({point_at(0, 2.232)}, cfg, 1), 0, cfg);
  std::vector<cdouble> row(rp.data.row(0, 0), rp.data.row(0, 0) + rp.range_bins());
  EXPECT_EQ(argmax_abs(row), 10u);
  EXPECT_EQ(rp.range_bins(), 128u);
}

TEST(RangeFft, ZeroInZeroOut) {
  RadarConfig cfg;
  const auto rp = range_fft(synthesize({}, cfg, 1), 0, cfg);
  for (auto v : rp.data.data()) ASSERT_EQ(v, cdouble{});
}

TEST(RangeFft, MatchesDirectDft) {
  RadarConfig cfg;
  SynthesisOptions o;
  o.snr_db = 10;
  o.seed = 2;
  const auto cube = synthesize({point_at(1, 6)}, cfg, 1, o);
  const auto rp = range_fft(cube, 0, cfg);
  const auto w = make_window(WindowKind::hann, 128);
  for (std::size_t l : {0u, 200u}) {
    std::vector<cdouble> x(128);
    for (std::size_t n = 0; n < 128; ++n) x[n] = std::complex<double>(cube(0, 5, l, n)) * w[n];
    const auto ref = dft(x, 128);
    double err = 0, top = 0;
    for (std::size_t k = 0; k < 128; ++k) {
      err = std::max(err, std::abs(rp.data(5, l, k) - ref[k]));
      top = std::max(top, std::abs(ref[k]));
    }
    EXPECT_LT(err, 1e-9 * top);
  }
}

TEST(RangeFft, TwoScatterers0p9mApartResolve) {
  RadarConfig cfg;
  const auto rp = range_fft(synthesize({point_at(0, 5), point_at(0, 5.9)}, cfg, 1), 0, cfg,
                            WindowKind::rectangular);
  std::vector<double> mag(128);
  for (std::size_t k = 0; k < 128; ++k) mag[k] = std::abs(rp.data(0, 0, k));
  const auto peaks = local_peaks(mag, 6.0);
  ASSERT_EQ(peaks.size(), 2u);
  const double saddle = *std::min_element(mag.begin() + static_cast<long>(peaks[0]),
                                          mag.begin() + static_cast<long>(peaks[1]));
  for (auto p : peaks) EXPECT_GE(20 * std::log10(mag[p] / saddle), 3.0);
}

TEST(RangeFft, ShapeErrors) {
  RadarConfig cfg;
  const auto cube = synthesize({}, cfg, 1);
  RadarConfig small = cfg;
  small.range_fft_size = 64;
  EXPECT_THROW(range_fft(cube, 0, small), ShapeError);
  EXPECT_THROW(range_fft(cube, 1, cfg), ShapeError);
}

// ---------------------------------------------------------------------------
// Doppler FFT
// ---------------------------------------------------------------------------

TEST(DopplerFft, StaticAtCenterMovingOffset) {
  RadarConfig cfg;
  const double v = 16 * cfg.doppler_bin_spacing();
  for (auto [vel, bin] : {std::pair{0.0, 128u}, std::pair{v, 144u}, std::pair{-v, 112u}}) {
    const auto rd = range_doppler(synthesize({point_at(0, 5, 0, vel)}, cfg, 1), 0, cfg);
    EXPECT_EQ(argmax2(summed_magnitude(rd)).second, bin) << vel;
    EXPECT_EQ(rd.zero_doppler_bin(), 128u);
    EXPECT_DOUBLE_EQ(rd.velocity_scale, cfg.doppler_bin_spacing());
  }
}

TEST(DopplerFft, MatchesDirectDft) {
  RadarConfig cfg;
  SynthesisOptions o;
  o.snr_db = 10;
  o.seed = 3;
  const auto rp = range_fft(synthesize({point_at(1, 6, 0, 0.7)}, cfg, 1, o), 0, cfg);
  const auto rd = doppler_fft(rp, cfg);
  const auto w = make_window(WindowKind::hann, 255);
  std::vector<cdouble> x(255);
  for (std::size_t l = 0; l < 255; ++l) x[l] = rp.data(2, l, 27) * w[l];
  auto ref = dft(x, 256);
  fftshift(std::span<cdouble>(ref));
  double err = 0, top = 0;
  for (std::size_t k = 0; k < 256; ++k) {
    err = std::max(err, std::abs(rd.data(2, 27, k) - ref[k]));
    top = std::max(top, std::abs(ref[k]));
  }
  EXPECT_LT(err, 1e-9 * top);
}

TEST(DopplerFft, TooManyChirps) {
  RadarConfig cfg;
  const auto rp = range_fft(synthesize({}, cfg, 1), 0, cfg);
  RadarConfig small = cfg;
  small.doppler_fft_size = 128;
  EXPECT_THROW(doppler_fft(rp, small), ShapeError);
}

// ---------------------------------------------------------------------------
// Angle FFT
// ---------------------------------------------------------------------------

TEST(AngleFft, UniformIsBroadside) {
  const std::vector<cdouble> ones(8, 1.0);
  const auto s = angle_fft(ones, 128);
  EXPECT_EQ(argmax_abs(s), 64u);
  EXPECT_NEAR(std::abs(s[64]), 8.0, 1e-12);
}

TEST(AngleFft, ThirtyDegreesAtBin96AndMirrored) {
  std::vector<cdouble> snap(8), conj(8);
  for (std::size_t m = 0; m < 8; ++m) {
    snap[m] = std::polar(1.0, 2 * pi * 0.5 * std::sin(deg_to_rad(30)) * static_cast<double>(m));
    conj[m] = std::conj(snap[m]);
  }
  EXPECT_EQ(argmax_abs(angle_fft(snap, 128)), 96u);
  EXPECT_EQ(argmax_abs(angle_fft(conj, 128)), 32u);
  EXPECT_NEAR(azimuth_of_fft_bin(96, 128, 0.5), 30.0, 1e-12);
}

TEST(AngleFft, MatchesDirectDft) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<cdouble> snap(8);
  for (auto& v : snap) v = {g(rng), g(rng)};
  auto ref = dft(snap, 128);
  fftshift(std::span<cdouble>(ref));
  const auto s = angle_fft(snap, 128);
  for (std::size_t k = 0; k < 128; ++k) EXPECT_LT(std::abs(s[k] - ref[k]), 1e-12);
}

TEST(AngleFft, ShapeErrors) {
  EXPECT_THROW(angle_fft(std::vector<cdouble>{}, 128), ShapeError);
  EXPECT_THROW(angle_fft(std::vector<cdouble>(9), 8), ShapeError);
}

// ---------------------------------------------------------------------------
// RA heatmap
// ---------------------------------------------------------------------------

TEST(RaHeatmap, CanonicalMaximum) {
  RadarConfig cfg;
  const auto hm = ra_heatmap(synthesize({point_at(0, 2.232)}, cfg, 1), 0, cfg);
  EXPECT_EQ(hm.range_bins(), 128u);
  EXPECT_EQ(hm.angle_bins(), 128u);
  EXPECT_EQ(argmax2(hm.values), (std::pair<std::size_t, std::size_t>{10, 64}));
  for (double v : hm.values.data()) ASSERT_GE(v, 0.0);
}

TEST(RaHeatmap, NoiseOnlyStaysBelow12Sigma) {
  RadarConfig cfg;
  int ok = 0;
  const int trials = 10;
  for (int s = 0; s < trials; ++s) {
    const auto hm = ra_heatmap(noise_cube(cfg, 1000 + static_cast<std::uint64_t>(s)), 0, cfg);
    const auto& v = hm.values.data();
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    ok += *std::max_element(v.begin(), v.end()) <= mean + 12 * sd;
  }
  EXPECT_EQ(ok, trials);
}

TEST(RaHeatmap, TwoTargetsSameRangeGiveTwoAnglePeaks) {
  RadarConfig cfg;
  const auto hm = ra_heatmap(synthesize({point_polar(6, -10), point_polar(6, 10)}, cfg, 1), 0, cfg);
  const std::size_t row = argmax2(hm.values).first;
  std::vector<double> mag(128);
  for (std::size_t a = 0; a < 128; ++a) mag[a] = hm.values(row, a);
  auto peaks = separated_peaks(mag, 3.0);
  std::sort(peaks.begin(), peaks.end());
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_NEAR(static_cast<double>(peaks[0]), cfg.angle_bin_of(deg_to_rad(-10)), 1.0);
  EXPECT_NEAR(static_cast<double>(peaks[1]), cfg.angle_bin_of(deg_to_rad(10)), 1.0);
}

TEST(RaHeatmap, SuperpositionKeepsBothTargets) {
  RadarConfig cfg;
  const auto a = point_polar(4, -20), b = point_polar(15, 25, 14.0);
  const auto hm = ra_heatmap(synthesize({a, b}, cfg, 1), 0, cfg);
  for (const auto& o : {a, b}) {
    const auto single = ra_heatmap(synthesize({o}, cfg, 1), 0, cfg);
    const auto [r, c] = argmax2(single.values);
    // the superposed map has a local maximum at the same cell
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc)
        EXPECT_GE(hm.values(r, c), hm.values(r + static_cast<std::size_t>(dr), c + static_cast<std::size_t>(dc)));
  }
}

TEST(RaHeatmap, DopplerTieGoesToLowestBin) {
  RadarConfig cfg;
  RdMap rd{NdArray<cdouble, 3>({8, 128, 256})};
  for (std::size_t e = 0; e < 8; ++e) {
    rd.data(e, 3, 5) = 1.0;  // broadside
    rd.data(e, 3, 9) = std::polar(1.0, pi * static_cast<double>(e) / 2);  // same magnitude, off axis
  }
  const auto hm = ra_heatmap(rd, cfg);
  std::vector<double> row(128);
  for (std::size_t a = 0; a < 128; ++a) row[a] = hm.values(3, a);
  EXPECT_EQ(argmax_abs(row), 64u);
}

TEST(RaHeatmap, ZeroDopplerExclusion) {
  RadarConfig cfg;
  const auto cube = synthesize({point_at(0, 5), point_at(3, 4, 0, 1)}, cfg, 1);
  const auto rd = range_doppler(cube, 0, cfg);
  const std::size_t row = argmax2(summed_magnitude(rd)).first;
  RaHeatmapOptions o;
  o.exclude_zero_doppler = true;
  const auto with = ra_heatmap(rd, cfg), without = ra_heatmap(rd, cfg, o);
  std::vector<double> a(128), b(128);
  for (std::size_t k = 0; k < 128; ++k) {
    a[k] = with.values(row, k);
    b[k] = without.values(row, k);
  }
  EXPECT_EQ(argmax_abs(a), 64u);        // static broadside target wins
  EXPECT_NE(argmax_abs(b), 64u);        // the mover takes over
}

TEST(RaHeatmap, Pure) {
  RadarConfig cfg;
  SynthesisOptions o;
  o.snr_db = 10;
  o.seed = 4;
  const auto cube = synthesize({point_at(1, 7)}, cfg, 1, o);
  EXPECT_TRUE(ra_heatmap(cube, 0, cfg).values == ra_heatmap(cube, 0, cfg).values);
}

// ---------------------------------------------------------------------------
// Per-chirp RA tensor
// ---------------------------------------------------------------------------

TEST(PerChirpTensor, StaticSlicesEqual) {
  RadarConfig cfg;
  const auto t = per_chirp_ra_tensor(synthesize({point_at(0.5, 4)}, cfg, 2), cfg);
  EXPECT_EQ(t.chirp_time(), 510u);
  EXPECT_EQ(t.range_bins(), 128u);
  EXPECT_EQ(t.angle_bins(), 128u);
  for (std::size_t k : {1u, 254u, 255u, 509u})
    for (std::size_t r = 15; r < 21; ++r)
      for (std::size_t a = 60; a < 70; ++a) ASSERT_EQ(t.data(k, r, a), t.data(0, r, a));
}

TEST(PerChirpTensor, SixteenFramesGive4080) {
  RadarConfig cfg;
  const auto t = per_chirp_ra_tensor(synthesize({point_at(0, 4)}, cfg, 16), cfg, WindowKind::hann,
                                     RaWindow{10, 11, 60, 5});
  EXPECT_EQ(t.chirp_time(), 16u * 255u);
  EXPECT_EQ(t.range_bins(), 11u);
  EXPECT_EQ(t.angle_bins(), 5u);
  EXPECT_TRUE(t.covers(20, 64));
  EXPECT_FALSE(t.covers(21, 64));
}

TEST(PerChirpTensor, WindowMatchesFullTensor) {
  RadarConfig cfg;
  SynthesisOptions o;
  o.snr_db = 5;
  o.seed = 6;
  const auto cube = synthesize({point_at(1, 4, 0, 0.5)}, cfg, 1, o);
  const auto full = per_chirp_ra_tensor(cube, cfg);
  const auto part = per_chirp_ra_tensor(cube, cfg, WindowKind::hann, RaWindow{12, 7, 40, 9});
  for (std::size_t k = 0; k < 255; k += 50)
    for (std::size_t r = 0; r < 7; ++r)
      for (std::size_t a = 0; a < 9; ++a) ASSERT_EQ(part.data(k, r, a), full.data(k, 12 + r, 40 + a));
  EXPECT_THROW(per_chirp_ra_tensor(cube, cfg, WindowKind::hann, RaWindow{125, 7, 0, 1}), ShapeError);
}

TEST(PerChirpTensor, MovingPhaseAdvance) {
  RadarConfig cfg;
  const double v = 0.6;
  const auto cube = synthesize({point_at(0, 5, 0, v)}, cfg, 1);
  const auto t = per_chirp_ra_tensor(cube, cfg, WindowKind::hann, RaWindow{15, 10, 64, 1});
  std::size_t br = 0;
  for (std::size_t r = 1; r < 10; ++r)
    if (std::abs(t.data(0, r, 0)) > std::abs(t.data(0, br, 0))) br = r;
  const double f_eff = cfg.start_frequency + cfg.sweep_slope * 63.5 / cfg.sampling_frequency;
  const double expected = std::remainder(4 * pi * v * cfg.chirp_duration * f_eff / speed_of_light, 2 * pi);
  for (std::size_t k = 0; k + 1 < 255; k += 31)
    EXPECT_NEAR(std::arg(t.data(k + 1, br, 0) * std::conj(t.data(k, br, 0))), expected, 1e-3);
}

// ---------------------------------------------------------------------------
// STFT
// ---------------------------------------------------------------------------

TEST(Stft, PaperGeometry) {
  std::vector<cdouble> x(4080, 1.0);
  const auto s = stft(x);
  EXPECT_EQ(s.time_windows(), 256u);
  EXPECT_EQ(s.frequency_bins(), 256u);
  EXPECT_EQ(stft_window_count(4080, 255, 15), 256u);
  for (std::size_t t = 0; t < 256; t += 17) EXPECT_EQ(dominant_bin(s, t), 128u);
}

TEST(Stft, ConstantSignalOnlyInZeroRow) {
  std::vector<cdouble> x(600, cdouble(0.3, -0.2));
  StftParams p;
  p.window_kind = WindowKind::rectangular;
  const auto s = stft(x, p);
  for (std::size_t t = 0; t < s.time_windows(); ++t) {
    double other = 0;
    for (std::size_t k = 0; k < 256; ++k)
      if (k != 128) other = std::max(other, s.values(k, t));
    EXPECT_GT(s.values(128, t), 10 * other);
  }
}

TEST(Stft, QuarterRateTone) {
  std::vector<cdouble> x(1000);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::polar(1.0, pi / 2 * static_cast<double>(n));
  const auto s = stft(x);
  for (std::size_t t = 0; t < s.time_windows(); ++t) EXPECT_EQ(dominant_bin(s, t), 192u);
}

TEST(Stft, EnergyPerWindow) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<cdouble> x(700);
  for (auto& v : x) v = {g(rng), g(rng)};
  StftParams p;
  p.window_kind = WindowKind::rectangular;
  const auto s = stft(x, p);
  for (std::size_t t = 0; t < s.time_windows(); ++t) {
    double et = 0, ef = 0;
    for (std::size_t i = 0; i < 255; ++i) et += std::norm(x[t * 15 + i]);
    for (std::size_t k = 0; k < 256; ++k) ef += s.values(k, t) * s.values(k, t);
    EXPECT_NEAR(ef / 256.0, et, 1e-9 * et);
  }
}

TEST(Stft, Errors) {
  std::vector<cdouble> x(254);
  EXPECT_THROW(stft(x), ShapeError);
  StftParams p;
  p.hop = 0;
  EXPECT_THROW(stft(std::vector<cdouble>(300), p), ShapeError);
  p = {};
  p.nfft = 128;
  EXPECT_THROW(stft(std::vector<cdouble>(300), p), ShapeError);
  EXPECT_EQ(stft_window_count(254, 255, 15), 0u);
}

TEST(Stft, BinVelocity) {
  RadarConfig cfg;
  EXPECT_DOUBLE_EQ(stft_bin_velocity(cfg, 256, 128), 0.0);
  EXPECT_NEAR(stft_bin_velocity(cfg, 256, 144), 16 * cfg.doppler_bin_spacing(), 1e-12);
}
