#ifndef FMCW_DETECT_HPP
#define FMCW_DETECT_HPP

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "fmcw/config.hpp"
#include "fmcw/core.hpp"
#include "fmcw/doa.hpp"
#include "fmcw/dsp.hpp"

namespace fmcw {

// ---------------------------------------------------------------------------
// CA-CFAR
// ---------------------------------------------------------------------------

struct CfarParams {
  std::size_t train = 8;   // training cells per side
  std::size_t guard = 2;   // guard cells per side
  double threshold_db = 2.0;
};

namespace detail {

inline void check_cfar_extent(std::size_t n, const CfarParams& p, const char* axis) {
  if (p.train < 1) throw DomainError("CFAR needs at least one training cell");
  if (n <= 2 * (p.train + p.guard) + 1)
    throw ShapeError(std::string("CFAR grid too small along ") + axis + " axis");
}

/// Adds the magnitudes of the training cells around index i on a line of
/// length n into (sum, count). Cells past an edge are dropped; the opposite
/// side is kept whole, so at least `train` cells remain.
template <typename Get>
void accumulate_arm(std::size_t i, std::size_t n, const CfarParams& p, Get get, double& sum,
                    std::size_t& count) {
  const auto ii = static_cast<long>(i);
  const auto g = static_cast<long>(p.guard), t = static_cast<long>(p.train);
  for (long k = ii - g - t; k <= ii - g - 1; ++k) {
    if (k < 0) continue;
    sum += get(static_cast<std::size_t>(k));
    ++count;
  }
  for (long k = ii + g + 1; k <= ii + g + t; ++k) {
    if (k >= static_cast<long>(n)) break;
    sum += get(static_cast<std::size_t>(k));
    ++count;
  }
}

}  // namespace detail

/// 1-D cell-averaging CFAR on magnitudes. A cell is flagged when it exceeds
/// the training-cell mean times 10^(threshold_db/20).
inline std::vector<bool> ca_cfar(std::span<const double> line, const CfarParams& p) {
  detail::check_cfar_extent(line.size(), p, "line");
  const double alpha = std::pow(10.0, p.threshold_db / 20.0);
  std::vector<bool> mask(line.size(), false);
  for (std::size_t i = 0; i < line.size(); ++i) {
    double sum = 0;
    std::size_t count = 0;
    detail::accumulate_arm(i, line.size(), p, [&](std::size_t k) { return line[k]; }, sum, count);
    mask[i] = line[i] > alpha * (sum / static_cast<double>(count));
  }
  return mask;
}

/// Detection mask; nonzero marks a detected cell.
using Mask = Grid<std::uint8_t>;

/// 2-D CA-CFAR with a cross-shaped training region (both axes, same
/// train/guard sizes).
inline Mask ca_cfar(const Grid<double>& grid, const CfarParams& p) {
  const std::size_t R = grid.extent(0), C = grid.extent(1);
  detail::check_cfar_extent(R, p, "row");
  detail::check_cfar_extent(C, p, "column");
  const double alpha = std::pow(10.0, p.threshold_db / 20.0);
  Mask mask({R, C}, 0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      double sum = 0;
      std::size_t count = 0;
      detail::accumulate_arm(r, R, p, [&](std::size_t k) { return grid(k, c); }, sum, count);
      detail::accumulate_arm(c, C, p, [&](std::size_t k) { return grid(r, k); }, sum, count);
      mask(r, c) = grid(r, c) > alpha * (sum / static_cast<double>(count));
    }
  }
  return mask;
}

/// True when no 8-neighbour is larger; ties resolve toward the lowest
/// (row, column) so a plateau yields one peak.
inline bool is_local_peak(const Grid<double>& g, std::size_t r, std::size_t c) {
  const double v = g(r, c);
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (!dr && !dc) continue;
      const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(g.extent(0)) ||
          cc >= static_cast<long>(g.extent(1)))
        continue;
      const double u = g(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
      const bool earlier = dr < 0 || (dr == 0 && dc < 0);
      if (u > v || (earlier && u == v)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Point cloud
// ---------------------------------------------------------------------------

struct DetectionPoint {
  std::size_t range_bin = 0;
  std::optional<std::size_t> doppler_bin;
  std::size_t angle_bin = 0;
  double range = 0.0;      // m
  double velocity = 0.0;   // m/s
  double azimuth = 0.0;    // deg
  double amplitude = 0.0;  // linear, per-sample scatterer units
};

struct DetectorParams {
  CfarParams cfar{8, 2, 10.0};
  bool peak_grouping = true;
  double angle_peak_db = 6.0;
  // cells further than this below the map maximum are ignored; <= 0 disables
  double dynamic_range_db = 60.0;
  WindowKind window = WindowKind::hann;
};

inline double dynamic_floor(const Grid<double>& g, double dynamic_range_db) {
  if (!(dynamic_range_db > 0) || g.empty()) return 0.0;
  return *std::max_element(g.data().begin(), g.data().end()) * std::pow(10.0, -dynamic_range_db / 20.0);
}

/// Coherent gain of the range, Doppler and angle FFTs for a unit-amplitude
/// scatterer; dividing a spectrum magnitude by it recovers the scatterer's
/// per-sample amplitude.
inline double processing_gain(const RadarConfig& cfg, WindowKind window) {
  return window_sum(make_window(window, cfg.samples_per_chirp)) *
         window_sum(make_window(window, cfg.chirps_per_frame)) *
         static_cast<double>(cfg.n_virtual());
}

/// CFAR over the element-summed RD magnitude, a dynamic-range floor and
/// optional 3x3 peak grouping,
/// then an angle FFT per detection emitting one point per angle peak within
/// angle_peak_db of that spectrum's maximum.
inline std::vector<DetectionPoint> point_cloud(const RdMap& rd, const RadarConfig& cfg,
                                               const DetectorParams& p = {}) {
  if (rd.elements() != cfg.n_virtual()) throw ShapeError("RD map element count mismatch");
  const auto mag = summed_magnitude(rd);
  const auto mask = ca_cfar(mag, p.cfar);
  const double floor = dynamic_floor(mag, p.dynamic_range_db);
  const FftPlan plan(cfg.angle_fft_size);
  const double gain = processing_gain(cfg, p.window);
  std::vector<DetectionPoint> out;
  std::vector<double> amag(cfg.angle_fft_size);
  for (std::size_t r = 0; r < rd.range_bins(); ++r) {
    for (std::size_t d = 0; d < rd.doppler_bins(); ++d) {
      if (!mask(r, d) || mag(r, d) < floor) continue;
      if (p.peak_grouping && !is_local_peak(mag, r, d)) continue;
      const auto spec = angle_fft(rd.snapshot(r, d), plan);
      for (std::size_t a = 0; a < spec.size(); ++a) amag[a] = std::abs(spec[a]);
      for (auto a : local_peaks(amag, p.angle_peak_db)) {
        DetectionPoint pt;
        pt.range_bin = r;
        pt.doppler_bin = d;
        pt.angle_bin = a;
        pt.range = cfg.range_of_bin(static_cast<double>(r));
        pt.velocity = cfg.velocity_of_bin(static_cast<double>(d));
        pt.azimuth = cfg.azimuth_of_angle_bin(static_cast<double>(a));
        pt.amplitude = amag[a] / gain;
        out.push_back(pt);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// DBSCAN
// ---------------------------------------------------------------------------

struct ObjectCluster {
  std::vector<DetectionPoint> members;
  std::size_t center_range_bin = 0;
  std::size_t center_angle_bin = 0;
  double center_range = 0.0;    // m
  double center_azimuth = 0.0;  // deg
  std::size_t range_extent = 0;  // S_R: distinct range bins
  double mean_amplitude = 0.0;   // A
};

struct DbscanParams {
  double eps = 5.0;
  std::size_t min_pts = 2;
};

namespace detail {

inline auto point_key(const DetectionPoint& p) {
  return std::make_tuple(p.range_bin, p.angle_bin, p.doppler_bin.value_or(0),
                         p.doppler_bin.has_value(), p.amplitude);
}

}  // namespace detail

/// Density clustering in (range bin, angle bin) space, Euclidean metric.
/// Points are ordered canonically first, so the result does not depend on
/// input order; clusters come out by ascending center range, then angle.
inline std::vector<ObjectCluster> dbscan(std::vector<DetectionPoint> points,
                                         const RadarConfig& cfg, const DbscanParams& p = {}) {
  if (!(p.eps > 0)) throw DomainError("DBSCAN eps must be positive");
  if (p.min_pts < 1) throw DomainError("DBSCAN min_pts must be at least 1");
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return detail::point_key(a) < detail::point_key(b);
  });
  const std::size_t n = points.size();
  auto dist2 = [&](std::size_t i, std::size_t j) {
    const double dr = static_cast<double>(points[i].range_bin) - static_cast<double>(points[j].range_bin);
    const double da = static_cast<double>(points[i].angle_bin) - static_cast<double>(points[j].angle_bin);
    return dr * dr + da * da;
  };
  const double eps2 = p.eps * p.eps;
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
      if (dist2(i, j) <= eps2) out.push_back(j);
    return out;
  };

  constexpr long unvisited = -2, noise = -1;
  std::vector<long> label(n, unvisited);
  long next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != unvisited) continue;
    auto nb = neighbours(i);
    if (nb.size() < p.min_pts) {
      label[i] = noise;
      continue;
    }
    const long id = next++;
    label[i] = id;
    std::vector<std::size_t> queue(nb.begin(), nb.end());
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t j = queue[q];
      if (label[j] == noise) label[j] = id;
      if (label[j] != unvisited) continue;
      label[j] = id;
      auto nj = neighbours(j);
      if (nj.size() >= p.min_pts) queue.insert(queue.end(), nj.begin(), nj.end());
    }
  }

  std::vector<ObjectCluster> clusters(static_cast<std::size_t>(next));
  for (std::size_t i = 0; i < n; ++i)
    if (label[i] >= 0) clusters[static_cast<std::size_t>(label[i])].members.push_back(points[i]);

  for (auto& c : clusters) {
    double wsum = 0, rsum = 0, asum = 0, amp = 0;
    std::set<std::size_t> ranges;
    for (const auto& m : c.members) {
      const double w = m.amplitude > 0 ? m.amplitude : 0.0;
      wsum += w;
      rsum += w * static_cast<double>(m.range_bin);
      asum += w * static_cast<double>(m.angle_bin);
      amp += m.amplitude;
      ranges.insert(m.range_bin);
    }
    double rc = 0, ac = 0;
    if (wsum > 0) {
      rc = rsum / wsum;
      ac = asum / wsum;
    } else {
      for (const auto& m : c.members) {
        rc += static_cast<double>(m.range_bin);
        ac += static_cast<double>(m.angle_bin);
      }
      rc /= static_cast<double>(c.members.size());
      ac /= static_cast<double>(c.members.size());
    }
    c.center_range_bin = static_cast<std::size_t>(std::lround(rc));
    c.center_angle_bin = static_cast<std::size_t>(std::lround(ac));
    c.center_range = cfg.range_of_bin(static_cast<double>(c.center_range_bin));
    c.center_azimuth = cfg.azimuth_of_angle_bin(static_cast<double>(c.center_angle_bin));
    c.range_extent = ranges.size();
    c.mean_amplitude = amp / static_cast<double>(c.members.size());
  }
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    return std::tie(a.center_range_bin, a.center_angle_bin, a.range_extent, a.mean_amplitude) <
           std::tie(b.center_range_bin, b.center_angle_bin, b.range_extent, b.mean_amplitude);
  });
  return clusters;
}

// ---------------------------------------------------------------------------
// Radar-cube crop
// ---------------------------------------------------------------------------

struct BoxSize {
  std::size_t range = 11;
  std::size_t angle = 5;
};

/// Complex values [range][angle][chirp_time] of a fixed-size box cut from
/// the per-chirp RA tensor. Cells falling off the grid are zero and flagged.
struct RadarCubeCrop {
  NdArray<cdouble, 3> data;
  Mask outside;  // [range][angle]
  std::size_t center_range_bin = 0;
  std::size_t center_angle_bin = 0;

  std::size_t range_cells() const { return data.extent(0); }
  std::size_t angle_cells() const { return data.extent(1); }
  std::size_t chirp_time() const { return data.extent(2); }
};

/// Region of the range x angle grid a centered box needs, clipped to the grid.
inline RaWindow crop_window(const RadarConfig& cfg, std::size_t center_range,
                            std::size_t center_angle, BoxSize box = {}) {
  const long r0 = static_cast<long>(center_range) - static_cast<long>(box.range / 2);
  const long a0 = static_cast<long>(center_angle) - static_cast<long>(box.angle / 2);
  const long r1 = std::min<long>(r0 + static_cast<long>(box.range), static_cast<long>(cfg.range_fft_size));
  const long a1 = std::min<long>(a0 + static_cast<long>(box.angle), static_cast<long>(cfg.angle_fft_size));
  const long rs = std::max<long>(r0, 0), as = std::max<long>(a0, 0);
  return {static_cast<std::size_t>(rs), static_cast<std::size_t>(r1 - rs),
          static_cast<std::size_t>(as), static_cast<std::size_t>(a1 - as)};
}

inline RadarCubeCrop crop_cube(const PerChirpRaTensor& t, std::size_t center_range,
                               std::size_t center_angle, BoxSize box = {}) {
  if (center_range >= t.grid_range_bins || center_angle >= t.grid_angle_bins)
    throw DomainError("crop center outside the range-angle grid");
  const std::size_t T = t.chirp_time();
  RadarCubeCrop out;
  out.data = NdArray<cdouble, 3>({box.range, box.angle, T});
  out.outside = Mask({box.range, box.angle}, 0);
  out.center_range_bin = center_range;
  out.center_angle_bin = center_angle;
  const long r0 = static_cast<long>(center_range) - static_cast<long>(box.range / 2);
  const long a0 = static_cast<long>(center_angle) - static_cast<long>(box.angle / 2);
  for (std::size_t i = 0; i < box.range; ++i) {
    for (std::size_t j = 0; j < box.angle; ++j) {
      const long r = r0 + static_cast<long>(i), a = a0 + static_cast<long>(j);
      if (r < 0 || a < 0 || r >= static_cast<long>(t.grid_range_bins) ||
          a >= static_cast<long>(t.grid_angle_bins)) {
        out.outside(i, j) = 1;
        continue;
      }
      const auto ru = static_cast<std::size_t>(r), au = static_cast<std::size_t>(a);
      if (!t.covers(ru, au)) throw ShapeError("tensor window does not cover the crop box");
      for (std::size_t k = 0; k < T; ++k)
        out.data(i, j, k) = t.data(k, ru - t.range_offset, au - t.angle_offset);
    }
  }
  return out;
}

/// Crop straight from a cube, computing only the tensor block the box needs.
inline RadarCubeCrop crop_from_cube(const DataCube& cube, const RadarConfig& cfg,
                                    std::size_t center_range, std::size_t center_angle,
                                    BoxSize box = {}, WindowKind window = WindowKind::hann) {
  if (center_range >= cfg.range_fft_size || center_angle >= cfg.angle_fft_size)
    throw DomainError("crop center outside the range-angle grid");
  const auto tensor = per_chirp_ra_tensor(cube, cfg, window,
                                          crop_window(cfg, center_range, center_angle, box));
  return crop_cube(tensor, center_range, center_angle, box);
}

}  // namespace fmcw

#endif  // FMCW_DETECT_HPP
