#ifndef FMCW_IO_HPP
#define FMCW_IO_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fmcw/classify.hpp"
#include "fmcw/config.hpp"
#include "fmcw/core.hpp"
#include "fmcw/detect.hpp"
#include "fmcw/eval.hpp"
#include "fmcw/simulate.hpp"

namespace fmcw {

using Bytes = std::vector<std::uint8_t>;

struct TruncatedFile : ParseError {
  std::size_t expected, actual;
  TruncatedFile(const std::string& what, std::size_t exp, std::size_t act)
      : ParseError(what + ": expected " + std::to_string(exp) + " bytes, got " + std::to_string(act)),
        expected(exp),
        actual(act) {}
};
struct BadMagic : ParseError { using ParseError::ParseError; };
struct BadVersion : ParseError { using ParseError::ParseError; };
struct DigestMismatch : ParseError { using ParseError::ParseError; };
struct LengthMismatch : ParseError { using ParseError::ParseError; };
struct ImpossibleLayout : ParseError { using ParseError::ParseError; };

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw Error("write failed for " + path);
}

inline void write_file(const std::string& path, const Bytes& b) { write_file(path, b.data(), b.size()); }
inline void write_file(const std::string& path, const std::string& s) { write_file(path, s.data(), s.size()); }

inline std::string read_text(const std::string& path) {
  const auto b = read_file(path);
  return std::string(b.begin(), b.end());
}

namespace detail {

template <typename T>
void put_le(Bytes& out, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  return static_cast<T>(u);
}

inline void put_f32(Bytes& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }
inline float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }

inline std::int16_t to_int16(float v) {
  const float r = std::nearbyint(v);
  if (!(r >= -32768.0f && r <= 32767.0f))
    throw DomainError("sample " + std::to_string(v) + " does not fit int16");
  return static_cast<std::int16_t>(r);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cube container: 32-byte header then little-endian payload
//   0  "RADC"
//   4  u16 version
//   6  u16 sample kind
//   8  u32 frames, elements, chirps, samples
//  24  u64 config digest
// ---------------------------------------------------------------------------

enum class SampleKind : std::uint16_t { complex_float32 = 1, complex_int16 = 2 };

inline constexpr std::array<char, 4> cube_magic{'R', 'A', 'D', 'C'};
inline constexpr std::uint16_t cube_version = 1;
inline constexpr std::size_t cube_header_size = 32;

inline std::size_t sample_bytes(SampleKind k) { return k == SampleKind::complex_float32 ? 8 : 4; }

struct CubeFile {
  DataCube cube;
  SampleKind kind = SampleKind::complex_float32;
  std::uint64_t digest = 0;
};

inline Bytes encode_cube(const DataCube& cube, std::uint64_t digest,
                         SampleKind kind = SampleKind::complex_float32) {
  Bytes out;
  out.reserve(cube_header_size + cube.samples.size() * sample_bytes(kind));
  for (char c : cube_magic) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_le(out, cube_version);
  detail::put_le(out, static_cast<std::uint16_t>(kind));
  for (auto d : cube.samples.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ShapeError("cube dimension exceeds u32");
    detail::put_le(out, static_cast<std::uint32_t>(d));
  }
  detail::put_le(out, digest);
  for (const auto& s : cube.samples.data()) {
    if (kind == SampleKind::complex_float32) {
      detail::put_f32(out, s.real());
      detail::put_f32(out, s.imag());
    } else {
      detail::put_le(out, detail::to_int16(s.real()));
      detail::put_le(out, detail::to_int16(s.imag()));
    }
  }
  return out;
}

inline CubeFile decode_cube(const Bytes& in, std::optional<std::uint64_t> expected_digest = {}) {
  if (in.size() < cube_header_size) throw TruncatedFile("cube header", cube_header_size, in.size());
  if (std::memcmp(in.data(), cube_magic.data(), 4) != 0)
    throw BadMagic("cube file: bad magic at byte offset 0");
  const auto version = detail::get_le<std::uint16_t>(&in[4]);
  if (version != cube_version)
    throw BadVersion("cube file: unsupported version " + std::to_string(version) + " at byte offset 4");
  const auto kind_raw = detail::get_le<std::uint16_t>(&in[6]);
  if (kind_raw != 1 && kind_raw != 2)
    throw ParseError("cube file: unknown sample kind " + std::to_string(kind_raw) + " at byte offset 6");
  CubeFile out;
  out.kind = static_cast<SampleKind>(kind_raw);
  std::array<std::size_t, 4> dims{};
  for (std::size_t i = 0; i < 4; ++i) dims[i] = detail::get_le<std::uint32_t>(&in[8 + 4 * i]);
  out.digest = detail::get_le<std::uint64_t>(&in[24]);
  if (expected_digest && *expected_digest != out.digest)
    throw DigestMismatch("cube file: config digest does not match the supplied config");
  const std::size_t count = dims[0] * dims[1] * dims[2] * dims[3];
  const std::size_t need = cube_header_size + count * sample_bytes(out.kind);
  if (in.size() < need) throw TruncatedFile("cube payload truncated", need, in.size());
  if (in.size() > need) throw LengthMismatch("cube file: " + std::to_string(in.size() - need) +
                                             " trailing bytes after payload at byte offset " +
                                             std::to_string(need));
  out.cube = DataCube(dims[0], dims[1], dims[2], dims[3]);
  const std::uint8_t* p = in.data() + cube_header_size;
  for (auto& s : out.cube.samples.data()) {
    if (out.kind == SampleKind::complex_float32) {
      s = cfloat(detail::get_f32(p), detail::get_f32(p + 4));
      p += 8;
    } else {
      s = cfloat(detail::get_le<std::int16_t>(p), detail::get_le<std::int16_t>(p + 2));
      p += 4;
    }
  }
  return out;
}

inline void write_cube(const std::string& path, const DataCube& cube, std::uint64_t digest,
                       SampleKind kind = SampleKind::complex_float32) {
  write_file(path, encode_cube(cube, digest, kind));
}

inline CubeFile read_cube(const std::string& path, std::optional<std::uint64_t> expected_digest = {}) {
  return decode_cube(read_file(path), expected_digest);
}

// ---------------------------------------------------------------------------
// Raw 16-bit captures
// ---------------------------------------------------------------------------

/// Byte layout of a headerless-or-prefixed interleaved ADC capture.
/// `order` lists the four axes outermost first using f (frame), c (chirp),
/// e (channel) and s (sample); each sample is an I/Q pair in `iq_order`.
struct RawCaptureLayout {
  std::size_t channels = 8;
  std::size_t bytes_per_sample = 2;
  std::string order = "fces";
  std::string iq_order = "IQ";
  std::size_t header_skip = 0;
  std::optional<std::size_t> frames;
};

namespace detail {

inline std::array<std::size_t, 4> axis_positions(const std::string& order) {
  // position of f, e, c, s inside the descriptor
  std::array<std::size_t, 4> pos{};
  const std::string axes = "fecs";
  if (order.size() != 4) throw ImpossibleLayout("layout order must name four axes, got '" + order + "'");
  for (std::size_t a = 0; a < 4; ++a) {
    const auto i = order.find(axes[a]);
    if (i == std::string::npos || order.find(axes[a], i + 1) != std::string::npos)
      throw ImpossibleLayout("layout order '" + order + "' must contain each of f, c, e, s once");
    pos[a] = i;
  }
  return pos;
}

}  // namespace detail

/// Serializes a cube into a raw capture following `layout` (values must fit int16).
inline Bytes export_raw(const DataCube& cube, const RawCaptureLayout& layout) {
  if (layout.bytes_per_sample != 2) throw ImpossibleLayout("only 2-byte samples are supported");
  if (layout.channels != cube.elements()) throw ImpossibleLayout("layout channel count differs from cube");
  const bool iq = layout.iq_order == "IQ";
  if (!iq && layout.iq_order != "QI") throw ImpossibleLayout("iq_order must be IQ or QI");
  const auto pos = detail::axis_positions(layout.order);
  const std::array<std::size_t, 4> ext{cube.frames(), cube.elements(), cube.chirps(), cube.samples_per_chirp()};
  std::array<std::size_t, 4> ord_ext{};
  for (std::size_t a = 0; a < 4; ++a) ord_ext[pos[a]] = ext[a];
  Bytes out(layout.header_skip, 0);
  out.reserve(layout.header_skip + cube.samples.size() * 4);
  std::array<std::size_t, 4> k{};
  for (k[0] = 0; k[0] < ord_ext[0]; ++k[0])
    for (k[1] = 0; k[1] < ord_ext[1]; ++k[1])
      for (k[2] = 0; k[2] < ord_ext[2]; ++k[2])
        for (k[3] = 0; k[3] < ord_ext[3]; ++k[3]) {
          const cfloat v = cube(k[pos[0]], k[pos[1]], k[pos[2]], k[pos[3]]);
          detail::put_le(out, detail::to_int16(iq ? v.real() : v.imag()));
          detail::put_le(out, detail::to_int16(iq ? v.imag() : v.real()));
        }
  return out;
}

/// De-interleaves a raw 16-bit capture into [frame][element][chirp][sample].
inline DataCube import_raw(const Bytes& raw, const RawCaptureLayout& layout, const RadarConfig& cfg) {
  if (layout.bytes_per_sample != 2)
    throw ImpossibleLayout("bytes_per_sample must be 2, got " + std::to_string(layout.bytes_per_sample));
  if (layout.channels == 0) throw ImpossibleLayout("channel count must be positive");
  const bool iq = layout.iq_order == "IQ";
  if (!iq && layout.iq_order != "QI") throw ImpossibleLayout("iq_order must be IQ or QI");
  const auto pos = detail::axis_positions(layout.order);
  if (layout.header_skip > raw.size())
    throw LengthMismatch("header_skip " + std::to_string(layout.header_skip) + " exceeds file size " +
                         std::to_string(raw.size()));
  const std::size_t L = cfg.chirps_per_frame, N = cfg.samples_per_chirp;
  const std::size_t frame_bytes = layout.channels * L * N * 2 * layout.bytes_per_sample;
  const std::size_t payload = raw.size() - layout.header_skip;
  std::size_t F = 0;
  if (layout.frames) {
    F = *layout.frames;
    if (payload != F * frame_bytes)
      throw LengthMismatch("raw payload is " + std::to_string(payload) + " bytes, layout declares " +
                           std::to_string(F * frame_bytes));
  } else {
    if (payload % frame_bytes != 0)
      throw LengthMismatch("raw payload of " + std::to_string(payload) +
                           " bytes is not a whole number of " + std::to_string(frame_bytes) +
                           "-byte frames");
    F = payload / frame_bytes;
  }
  if (layout.channels != cfg.n_virtual())
    throw ImpossibleLayout("layout has " + std::to_string(layout.channels) + " channels, config has " +
                           std::to_string(cfg.n_virtual()) + " virtual elements");

  DataCube cube(F, layout.channels, L, N);
  const std::array<std::size_t, 4> ext{F, layout.channels, L, N};
  std::array<std::size_t, 4> ord_ext{};
  for (std::size_t a = 0; a < 4; ++a) ord_ext[pos[a]] = ext[a];
  const std::uint8_t* p = raw.data() + layout.header_skip;
  std::array<std::size_t, 4> k{};
  for (k[0] = 0; k[0] < ord_ext[0]; ++k[0])
    for (k[1] = 0; k[1] < ord_ext[1]; ++k[1])
      for (k[2] = 0; k[2] < ord_ext[2]; ++k[2])
        for (k[3] = 0; k[3] < ord_ext[3]; ++k[3]) {
          const float a = detail::get_le<std::int16_t>(p), b = detail::get_le<std::int16_t>(p + 2);
          p += 4;
          cube(k[pos[0]], k[pos[1]], k[pos[2]], k[pos[3]]) = iq ? cfloat(a, b) : cfloat(b, a);
        }
  return cube;
}

// ---------------------------------------------------------------------------
// STFT cube container: "RSTC", u16 version, u16 reserved, u32 dims x3,
// u32 angle cells, float32 payload [frequency][time][channel]
// ---------------------------------------------------------------------------

inline Bytes encode_stft_cube(const StftCube& c) {
  Bytes out{'R', 'S', 'T', 'C'};
  detail::put_le(out, std::uint16_t{1});
  detail::put_le(out, std::uint16_t{0});
  for (auto d : c.values.shape()) detail::put_le(out, static_cast<std::uint32_t>(d));
  detail::put_le(out, static_cast<std::uint32_t>(c.angle_cells));
  for (float v : c.values.data()) detail::put_f32(out, v);
  return out;
}

inline StftCube decode_stft_cube(const Bytes& in) {
  constexpr std::size_t header = 24;
  if (in.size() < header) throw TruncatedFile("STFT cube header", header, in.size());
  if (std::memcmp(in.data(), "RSTC", 4) != 0) throw BadMagic("STFT cube: bad magic at byte offset 0");
  if (detail::get_le<std::uint16_t>(&in[4]) != 1) throw BadVersion("STFT cube: unsupported version at byte offset 4");
  std::array<std::size_t, 3> dims{};
  for (std::size_t i = 0; i < 3; ++i) dims[i] = detail::get_le<std::uint32_t>(&in[8 + 4 * i]);
  StftCube out;
  out.angle_cells = detail::get_le<std::uint32_t>(&in[20]);
  const std::size_t need = header + dims[0] * dims[1] * dims[2] * 4;
  if (in.size() != need) throw TruncatedFile("STFT cube payload", need, in.size());
  out.values = NdArray<float, 3>({dims[0], dims[1], dims[2]});
  const std::uint8_t* p = in.data() + header;
  for (auto& v : out.values.data()) {
    v = detail::get_f32(p);
    p += 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV and PGM
// ---------------------------------------------------------------------------

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string grid_to_csv(const Grid<double>& g) {
  std::string out;
  for (std::size_t r = 0; r < g.extent(0); ++r) {
    for (std::size_t c = 0; c < g.extent(1); ++c) {
      if (c) out += ',';
      out += fmt9(g(r, c));
    }
    out += '\n';
  }
  return out;
}

inline Grid<double> grid_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0, col = 0;
    while (true) {
      ++col;
      const auto comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw ParseError("CSV line " + std::to_string(lineno) + ", column " + std::to_string(col) +
                         ": '" + cell + "' is not a number");
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("CSV line " + std::to_string(lineno) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV grid is empty");
  Grid<double> g({rows.size(), rows.front().size()});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) g(r, c) = rows[r][c];
  return g;
}

/// 8-bit binary PGM of 20·log10(v / max), clamped at `floor_db` and mapped to 0..255.
inline Bytes render_pgm(const Grid<double>& g, double floor_db = -60.0) {
  if (!(floor_db < 0)) throw DomainError("PGM floor must be negative dB");
  const std::string head = "P5\n" + std::to_string(g.extent(1)) + " " + std::to_string(g.extent(0)) + "\n255\n";
  Bytes out(head.begin(), head.end());
  double top = 0.0;
  for (double v : g.data()) top = std::max(top, std::abs(v));
  for (double v : g.data()) {
    std::uint8_t px = 0;
    if (top > 0 && std::abs(v) > 0) {
      const double db = std::max(floor_db, 20.0 * std::log10(std::abs(v) / top));
      px = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - db / floor_db)));
    }
    out.push_back(px);
  }
  return out;
}

inline std::string points_to_csv(const std::vector<DetectionPoint>& pts, std::size_t frame = 0) {
  std::string out = "frame,range_bin,doppler_bin,angle_bin,range_m,velocity_mps,azimuth_deg,amplitude\n";
  for (const auto& p : pts) {
    out += std::to_string(frame) + ',' + std::to_string(p.range_bin) + ',' +
           (p.doppler_bin ? std::to_string(*p.doppler_bin) : std::string()) + ',' +
           std::to_string(p.angle_bin) + ',' + fmt9(p.range) + ',' + fmt9(p.velocity) + ',' +
           fmt9(p.azimuth) + ',' + fmt9(p.amplitude) + '\n';
  }
  return out;
}

inline std::string clusters_csv_header() {
  return "frame,cluster,members,center_range_bin,center_angle_bin,range_m,azimuth_deg,range_extent,mean_amplitude\n";
}

inline std::string clusters_to_csv_rows(const std::vector<ObjectCluster>& cs, std::size_t frame) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& c = cs[i];
    out += std::to_string(frame) + ',' + std::to_string(i) + ',' + std::to_string(c.members.size()) +
           ',' + std::to_string(c.center_range_bin) + ',' + std::to_string(c.center_angle_bin) + ',' +
           fmt9(c.center_range) + ',' + fmt9(c.center_azimuth) + ',' + std::to_string(c.range_extent) +
           ',' + fmt9(c.mean_amplitude) + '\n';
  }
  return out;
}

// Labeled object records `frame,label,range_m,azimuth_deg`, shared by
// predictions and ground truth.
inline constexpr const char* labels_header = "frame,label,range_m,azimuth_deg\n";

inline std::string label_record(std::size_t frame, ObjectClass label, double range, double azimuth) {
  return std::to_string(frame) + ',' + to_string(label) + ',' + fmt9(range) + ',' + fmt9(azimuth) + '\n';
}

inline std::string predictions_to_csv(const std::vector<Prediction>& ps) {
  std::string out = labels_header;
  for (const auto& p : ps) out += label_record(p.frame, p.label, p.range, p.azimuth);
  return out;
}

inline std::string truth_to_csv(const std::vector<GroundTruthObject>& ts) {
  std::string out = labels_header;
  for (const auto& t : ts) out += label_record(t.frame, t.label, t.range, t.azimuth);
  return out;
}

inline std::vector<Prediction> labels_from_csv(const std::string& text) {
  std::vector<Prediction> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("frame,", 0) == 0)) continue;
    std::array<std::string, 4> f;
    std::istringstream ls(line);
    std::size_t n = 0;
    for (std::string cell; n < 5 && std::getline(ls, cell, ',');) {
      if (n == 4) { ++n; break; }
      f[n++] = cell;
    }
    if (n != 4) throw ParseError("label line " + std::to_string(lineno) + ": expected 4 fields");
    auto where = [&](const char* field) {
      return "label line " + std::to_string(lineno) + ", field " + field + ": ";
    };
    Prediction p;
    try {
      std::size_t used = 0;
      const long long fr = std::stoll(f[0], &used);
      if (used != f[0].size() || fr < 0) throw std::invalid_argument("frame");
      p.frame = static_cast<std::size_t>(fr);
    } catch (const std::exception&) {
      throw ParseError(where("frame") + "'" + f[0] + "' is not a frame index");
    }
    const auto label = object_class_from(f[1]);
    if (!label) throw ParseError(where("label") + "unknown class '" + f[1] + "'");
    p.label = *label;
    for (std::size_t k = 2; k < 4; ++k) {
      char* end = nullptr;
      const double v = std::strtod(f[k].c_str(), &end);
      if (f[k].empty() || end != f[k].c_str() + f[k].size())
        throw ParseError(where(k == 2 ? "range_m" : "azimuth_deg") + "'" + f[k] + "' is not a number");
      (k == 2 ? p.range : p.azimuth) = v;
    }
    out.push_back(p);
  }
  return out;
}

inline std::vector<GroundTruthObject> truth_from_csv(const std::string& text) {
  std::vector<GroundTruthObject> out;
  for (const auto& p : labels_from_csv(text)) out.push_back({p.label, p.range, p.azimuth, p.frame});
  return out;
}

}  // namespace fmcw

#endif  // FMCW_IO_HPP
