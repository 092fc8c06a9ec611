#ifndef FMCW_SIMULATE_HPP
#define FMCW_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fmcw/config.hpp"
#include "fmcw/core.hpp"
#include "fmcw/scene.hpp"

namespace fmcw {

/// Dechirped complex samples indexed [frame][virtual element][chirp][sample].
struct DataCube {
  NdArray<cfloat, 4> samples;
  std::uint64_t seed = 0;

  DataCube() = default;
  DataCube(std::size_t frames, std::size_t elements, std::size_t chirps, std::size_t n,
           std::uint64_t seed_ = 0)
      : samples({frames, elements, chirps, n}), seed(seed_) {}

  std::size_t frames() const { return samples.extent(0); }
  std::size_t elements() const { return samples.extent(1); }
  std::size_t chirps() const { return samples.extent(2); }
  std::size_t samples_per_chirp() const { return samples.extent(3); }

  cfloat& operator()(std::size_t f, std::size_t e, std::size_t c, std::size_t n) {
    return samples(f, e, c, n);
  }
  const cfloat& operator()(std::size_t f, std::size_t e, std::size_t c, std::size_t n) const {
    return samples(f, e, c, n);
  }

  /// Copy of a contiguous frame range.
  DataCube frames_slice(std::size_t first, std::size_t count) const {
    if (first + count > frames()) throw ShapeError("frame slice out of range");
    DataCube out(count, elements(), chirps(), samples_per_chirp(), seed);
    const std::size_t per = elements() * chirps() * samples_per_chirp();
    std::copy(samples.data().begin() + static_cast<std::ptrdiff_t>(first * per),
              samples.data().begin() + static_cast<std::ptrdiff_t>((first + count) * per),
              out.samples.data().begin());
    return out;
  }

  friend bool operator==(const DataCube& a, const DataCube& b) { return a.samples == b.samples; }
};

struct SynthesisOptions {
  std::optional<double> snr_db;  // nullopt: noise off
  std::uint64_t seed = 0;
  bool allow_alias = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent random stream per (seed, frame).
inline std::mt19937_64 frame_stream(std::uint64_t seed, std::size_t frame) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (0xA24BAED4963EE407ull * (frame + 1))));
}

inline double frac(double x) { return x - std::floor(x); }

inline void check_alias(const Scatterer& s, const RadarConfig& cfg) {
  const double fb = beat_frequency(cfg, s.range());
  if (fb >= cfg.sampling_frequency) {
    throw AliasingError("range aliasing: scatterer at " + std::to_string(s.range()) +
                        " m exceeds unambiguous range " +
                        std::to_string(cfg.max_unambiguous_range()) + " m");
  }
  if (std::abs(s.radial_velocity) >= cfg.max_unambiguous_velocity()) {
    throw AliasingError("velocity aliasing: radial velocity " + std::to_string(s.radial_velocity) +
                        " m/s exceeds +/-" + std::to_string(cfg.max_unambiguous_velocity()) +
                        " m/s");
  }
}

}  // namespace detail

inline double chirp_time(const RadarConfig& cfg, std::size_t frame, std::size_t chirp) {
  return static_cast<double>(frame) * cfg.frame_period() +
         static_cast<double>(chirp) * cfg.chirp_duration;
}

/// Scatterers of the whole scene at time t, tagged with object index.
inline std::vector<Scatterer> scene_scatterers(const Scene& scene, double t) {
  std::vector<Scatterer> out;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    auto s = scatterers_of(scene[i], t, i);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

/// Synthesizes the dechirped cube for a scene under the stop-and-hop model.
///
/// Each scatterer contributes a·exp(j2π[2·f_c·d_c/c + (2S·d/c)·n/fs + m·h·sinθ])
/// where d is re-evaluated at every chirp start, d_c adds the micro-motion
/// displacement, and a = rcs_amplitude / d². Noise is circular complex
/// Gaussian with variance set so the strongest scatterer's per-sample SNR is
/// `snr_db`.
inline DataCube synthesize(const Scene& scene, const RadarConfig& cfg, std::size_t n_frames,
                           const SynthesisOptions& opt = {}) {
  require_valid(cfg);
  const std::size_t E = cfg.n_virtual();
  const std::size_t L = cfg.chirps_per_frame;
  const std::size_t N = cfg.samples_per_chirp;
  DataCube cube(n_frames, E, L, N, opt.seed);

  // strongest amplitude over frame starts sets the noise floor
  double max_amp = 0.0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (const auto& s : scene_scatterers(scene, chirp_time(cfg, f, 0))) {
      if (!opt.allow_alias) detail::check_alias(s, cfg);
      const double d = s.range();
      if (!(d > 0)) throw DomainError("scatterer at zero range");
      max_amp = std::max(max_amp, s.rcs_amplitude / (d * d));
    }
  }
  double noise_sigma = 0.0;
  if (opt.snr_db && max_amp > 0) noise_sigma = max_amp / std::sqrt(db_to_linear(*opt.snr_db));

  const double two_over_c = 2.0 / speed_of_light;
  std::vector<cdouble> acc(N);
  for (std::size_t f = 0; f < n_frames; ++f) {
    auto rng = detail::frame_stream(opt.seed, f);
    std::normal_distribution<double> gauss(0.0, noise_sigma / std::sqrt(2.0));
    for (std::size_t l = 0; l < L; ++l) {
      const auto scat = scene_scatterers(scene, chirp_time(cfg, f, l));
      struct Term { cdouble base, step; double spatial; };
      std::vector<Term> terms;
      terms.reserve(scat.size());
      for (const auto& s : scat) {
        if (!opt.allow_alias) detail::check_alias(s, cfg);
        const double d = s.range();
        const double dc = d + s.micro_displacement;
        const double a = s.rcs_amplitude / (d * d);
        const double carrier = detail::frac(cfg.start_frequency * two_over_c * dc);
        const double beat_cycles = cfg.sweep_slope * two_over_c * d / cfg.sampling_frequency;
        const double spatial = detail::frac(cfg.element_spacing * std::sin(azimuth_of(s.position)));
        terms.push_back({std::polar(a, 2 * pi * carrier), std::polar(1.0, 2 * pi * beat_cycles),
                         spatial});
      }
      for (std::size_t e = 0; e < E; ++e) {
        std::fill(acc.begin(), acc.end(), cdouble{});
        for (const auto& t : terms) {
          cdouble v = t.base * std::polar(1.0, 2 * pi * detail::frac(static_cast<double>(e) * t.spatial));
          for (std::size_t n = 0; n < N; ++n) {
            acc[n] += v;
            v *= t.step;
          }
        }
        cfloat* out = cube.samples.row(f, e, l);
        for (std::size_t n = 0; n < N; ++n) {
          cdouble x = acc[n];
          if (noise_sigma > 0) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            x += cdouble(re, im);
          }
          out[n] = cfloat(static_cast<float>(x.real()), static_cast<float>(x.imag()));
        }
      }
    }
  }
  return cube;
}

}  // namespace fmcw

#endif  // FMCW_SIMULATE_HPP
