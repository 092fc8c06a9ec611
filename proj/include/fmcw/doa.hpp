#ifndef FMCW_DOA_HPP
#define FMCW_DOA_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fmcw/core.hpp"
#include "fmcw/dsp.hpp"
#include "fmcw/fft.hpp"

namespace fmcw {

/// Complex array snapshots, one column per snapshot, one row per element.
using SnapshotSet = Eigen::MatrixXcd;
using CovarianceMatrix = Eigen::MatrixXcd;

struct CovarianceOptions {
  bool forward_backward = false;
  std::size_t smoothing_subarray = 0;  // 0: no spatial smoothing
};

/// Sample covariance, optionally forward-backward averaged, then spatially
/// smoothed over all sliding subarrays of the given size.
inline CovarianceMatrix covariance(const SnapshotSet& y, const CovarianceOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(y.rows());
  if (y.cols() == 0) throw ShapeError("covariance needs at least one snapshot");
  if (!y.allFinite()) throw DomainError("snapshots contain non-finite values");
  if (opt.smoothing_subarray > n) throw ShapeError("smoothing subarray larger than the array");

  CovarianceMatrix r = (y * y.adjoint()) / static_cast<double>(y.cols());
  if (opt.forward_backward) {
    // J conj(R) J with J the exchange matrix
    CovarianceMatrix back = r.conjugate().reverse();
    r = 0.5 * (r + back);
  }
  const std::size_t m = opt.smoothing_subarray;
  if (m == 0 || m == n) return r;
  const std::size_t count = n - m + 1;
  CovarianceMatrix s = CovarianceMatrix::Zero(static_cast<Eigen::Index>(m),
                                              static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < count; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const auto mm = static_cast<Eigen::Index>(m);
    s += r.block(k, k, mm, mm);
  }
  return s / static_cast<double>(count);
}

/// Uniform linear array steering vector; element spacing in wavelengths.
inline Eigen::VectorXcd steering_vector(std::size_t elements, double element_spacing,
                                        double azimuth_rad) {
  Eigen::VectorXcd a(static_cast<Eigen::Index>(elements));
  const double s = element_spacing * std::sin(azimuth_rad);
  for (std::size_t m = 0; m < elements; ++m) {
    const double cycles = static_cast<double>(m) * s;
    a(static_cast<Eigen::Index>(m)) = std::polar(1.0, 2.0 * pi * (cycles - std::floor(cycles)));
  }
  return a;
}

struct Pseudospectrum {
  std::vector<double> angles_deg;
  std::vector<double> values;
};

/// Strictly increasing azimuth grid over (-90, 90) degrees, endpoints excluded.
inline std::vector<double> azimuth_grid(double step_deg = 0.1) {
  if (!(step_deg > 0)) throw DomainError("grid step must be positive");
  std::vector<double> g;
  const auto count = static_cast<long>(std::floor(90.0 / step_deg - 1e-9));
  for (long i = -count; i <= count; ++i) g.push_back(static_cast<double>(i) * step_deg);
  return g;
}

/// MUSIC null spectrum f(θ) = a^H (I - Z Z^H) a, where Z spans the K
/// principal eigenvectors. Source directions sit at its minima.
inline Pseudospectrum music_spectrum(const CovarianceMatrix& cov, std::size_t sources,
                                     const std::vector<double>& grid_deg,
                                     double element_spacing = 0.5) {
  const auto n = static_cast<std::size_t>(cov.rows());
  if (sources == 0 || sources >= n)
    throw DomainError("source count must satisfy 0 < K < effective array size");
  Eigen::SelfAdjointEigenSolver<CovarianceMatrix> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
  // eigenvalues ascend; the last K columns are the signal subspace
  const Eigen::MatrixXcd z = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(sources));
  Pseudospectrum out;
  out.angles_deg = grid_deg;
  out.values.resize(grid_deg.size());
  for (std::size_t i = 0; i < grid_deg.size(); ++i) {
    const auto a = steering_vector(n, element_spacing, deg_to_rad(grid_deg[i]));
    const double proj = (z.adjoint() * a).squaredNorm();
    out.values[i] = std::max(0.0, a.squaredNorm() - proj);
  }
  return out;
}

/// Azimuths (ascending) of the K deepest local minima of a pseudospectrum.
inline std::vector<double> music_estimate(const Pseudospectrum& ps, std::size_t sources) {
  const auto& v = ps.values;
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool left = i == 0 || v[i] < v[i - 1];
    const bool right = i + 1 == v.size() || v[i] <= v[i + 1];
    if (left && right) minima.push_back(i);
  }
  std::stable_sort(minima.begin(), minima.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  if (minima.size() > sources) minima.resize(sources);
  std::vector<double> out;
  for (auto i : minima) out.push_back(ps.angles_deg[i]);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// FFT-based DoA
// ---------------------------------------------------------------------------

struct AnglePeak {
  std::size_t bin = 0;
  double azimuth_deg = 0.0;
  double magnitude = 0.0;
};

/// Local maxima of a magnitude sequence that reach within `threshold_db` of
/// the global maximum. Plateaus report their first index.
inline std::vector<std::size_t> local_peaks(std::span<const double> mag, double threshold_db) {
  std::vector<std::size_t> out;
  if (mag.empty()) return out;
  const double top = *std::max_element(mag.begin(), mag.end());
  if (!(top > 0)) return out;
  const double floor = top * std::pow(10.0, -threshold_db / 20.0);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const bool left = i == 0 || mag[i] > mag[i - 1];
    const bool right = i + 1 == mag.size() || mag[i] >= mag[i + 1];
    if (left && right && mag[i] >= floor) out.push_back(i);
  }
  return out;
}

inline double azimuth_of_fft_bin(std::size_t bin, std::size_t n_fft, double element_spacing) {
  const double s = (static_cast<double>(bin) - static_cast<double>(n_fft / 2)) /
                   (static_cast<double>(n_fft) * element_spacing);
  return rad_to_deg(std::asin(std::clamp(s, -1.0, 1.0)));
}

/// Angle FFT plus peak extraction (peaks within threshold_db of the maximum).
inline std::vector<AnglePeak> fft_doa(std::span<const cdouble> snapshot, std::size_t n_fft,
                                      double element_spacing = 0.5, double threshold_db = 6.0) {
  const auto spec = angle_fft(snapshot, n_fft);
  std::vector<double> mag(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
  std::vector<AnglePeak> out;
  for (auto b : local_peaks(mag, threshold_db))
    out.push_back({b, azimuth_of_fft_bin(b, n_fft, element_spacing), mag[b]});
  return out;
}

/// Peaks of `mag` that stand apart from the global maximum: each is within
/// `dip_db` of the maximum and the valley between them lies at least
/// `dip_db` below the weaker of the two. The global maximum is always first.
inline std::vector<std::size_t> separated_peaks(std::span<const double> mag, double dip_db) {
  std::vector<std::size_t> out;
  if (mag.empty()) return out;
  const auto top = static_cast<std::size_t>(
      std::max_element(mag.begin(), mag.end()) - mag.begin());
  if (!(mag[top] > 0)) return out;
  out.push_back(top);
  const double ratio = std::pow(10.0, -dip_db / 20.0);
  for (auto p : local_peaks(mag, dip_db)) {
    if (p == top) continue;
    const auto lo = std::min(p, top), hi = std::max(p, top);
    const double valley = *std::min_element(mag.begin() + static_cast<std::ptrdiff_t>(lo),
                                            mag.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    if (valley <= ratio * std::min(mag[p], mag[top])) out.push_back(p);
  }
  return out;
}

}  // namespace fmcw

#endif  // FMCW_DOA_HPP
