#ifndef FMCW_CORE_HPP
#define FMCW_CORE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmcw {

using cdouble = std::complex<double>;
using cfloat = std::complex<float>;

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class AliasingError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Unit helpers (power convention)
// ---------------------------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double deg_to_rad(double d) { return d * pi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / pi; }

// ---------------------------------------------------------------------------
// NdArray: dense row-major N-dimensional array with value semantics.
// ---------------------------------------------------------------------------

template <typename T, std::size_t Rank>
class NdArray {
public:
  using value_type = T;
  using shape_type = std::array<std::size_t, Rank>;

  NdArray() { shape_.fill(0); }

  explicit NdArray(const shape_type& shape, const T& fill = T{})
      : shape_(shape), data_(product(shape), fill) {}

  const shape_type& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  template <typename... I>
  T& operator()(I... idx) {
    static_assert(sizeof...(I) == Rank, "index count must match rank");
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  template <typename... I>
  const T& operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank, "index count must match rank");
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  /// Pointer to the contiguous innermost run starting at the given leading index.
  template <typename... I>
  T* row(I... idx) {
    static_assert(sizeof...(I) == Rank - 1);
    std::array<std::size_t, Rank> full{static_cast<std::size_t>(idx)..., 0};
    return data_.data() + offset(full);
  }

  template <typename... I>
  const T* row(I... idx) const {
    static_assert(sizeof...(I) == Rank - 1);
    std::array<std::size_t, Rank> full{static_cast<std::size_t>(idx)..., 0};
    return data_.data() + offset(full);
  }

  friend bool operator==(const NdArray& a, const NdArray& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

private:
  static std::size_t product(const shape_type& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>{});
  }

  std::size_t offset(const std::array<std::size_t, Rank>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < Rank; ++a) off = off * shape_[a] + idx[a];
    return off;
  }

  shape_type shape_;
  std::vector<T> data_;
};

template <typename T>
using Grid = NdArray<T, 2>;

}  // namespace fmcw

#endif  // FMCW_CORE_HPP
