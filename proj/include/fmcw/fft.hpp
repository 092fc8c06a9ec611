#ifndef FMCW_FFT_HPP
#define FMCW_FFT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fmcw/core.hpp"

namespace fmcw {

/// Unscaled forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N).
///
/// Power-of-two sizes use an iterative radix-2 transform with a precomputed
/// twiddle table. Other sizes go through Bluestein's chirp-z identity on a
/// padded power-of-two plan. A plan is immutable once built and may be shared
/// across threads.
class FftPlan {
public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw ShapeError("FFT size must be positive");
    if (is_pow2(n)) {
      build_radix2(n);
    } else {
      std::size_t m = 1;
      while (m < 2 * n - 1) m <<= 1;
      inner_ = std::make_shared<FftPlan>(m);
      chirp_.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle argument small.
        const auto k2 = static_cast<double>((k * k) % (2 * n));
        chirp_[k] = std::polar(1.0, -pi * k2 / static_cast<double>(n));
      }
      std::vector<cdouble> b(m, cdouble{});
      b[0] = std::conj(chirp_[0]);
      for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp_[k]);
      inner_->forward(b);
      chirp_spectrum_ = std::move(b);
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// In-place forward transform; data.size() must equal size().
  void forward(std::span<cdouble> data) const {
    if (data.size() != n_) throw ShapeError("FFT input length does not match plan size");
    if (!inner_) {
      radix2(data);
      return;
    }
    const std::size_t m = inner_->size();
    std::vector<cdouble> a(m, cdouble{});
    for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
    inner_->forward(a);
    for (std::size_t k = 0; k < m; ++k) a[k] *= chirp_spectrum_[k];
    // inverse via conjugation
    for (auto& v : a) v = std::conj(v);
    inner_->forward(a);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(a[k]) * scale * chirp_[k];
  }

  /// Unscaled inverse transform.
  void inverse(std::span<cdouble> data) const {
    for (auto& v : data) v = std::conj(v);
    forward(data);
    for (auto& v : data) v = std::conj(v);
  }

  static bool is_pow2(std::size_t n) noexcept { return n && !(n & (n - 1)); }

private:
  void build_radix2(std::size_t n) {
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * pi * static_cast<double>(k) / static_cast<double>(n));
    bitrev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bitrev_[i] = r;
    }
  }

  void radix2(std::span<cdouble> x) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i)
      if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const cdouble t = twiddle_[k * stride] * x[start + k + half];
          x[start + k + half] = x[start + k] - t;
          x[start + k] += t;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<cdouble> twiddle_;
  std::vector<std::size_t> bitrev_;
  std::shared_ptr<FftPlan> inner_;
  std::vector<cdouble> chirp_;
  std::vector<cdouble> chirp_spectrum_;
};

/// Rotates so that bin 0 moves to index n/2 (zero frequency at the center).
template <typename T>
void fftshift(std::span<T> x) {
  std::rotate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>((x.size() + 1) / 2), x.end());
}

enum class WindowKind { rectangular, hann };

/// Symmetric window of the given length.
inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::hann && n > 1) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

/// Sum of the window coefficients (coherent gain times length).
inline double window_sum(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace fmcw

#endif  // FMCW_FFT_HPP
