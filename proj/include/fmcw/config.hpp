#ifndef FMCW_CONFIG_HPP
#define FMCW_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fmcw/core.hpp"

namespace fmcw {

/// Chirp, frame and array parameters of an FMCW radar, plus FFT sizes used by
/// the processing chain. Defaults reproduce the AWR1642 test-bed setup.
struct RadarConfig {
  double start_frequency = 77e9;      // Hz
  double sweep_bandwidth = 670e6;     // Hz
  double sweep_slope = 21e12;         // Hz/s
  double sampling_frequency = 4e6;    // samples/s
  std::size_t samples_per_chirp = 128;
  std::size_t chirps_per_frame = 255;
  double chirp_duration = 120e-6;     // s
  double frame_rate = 30.0;           // frames/s
  std::size_t n_tx = 2;
  std::size_t n_rx = 4;
  double element_spacing = 0.5;       // wavelengths
  std::size_t range_fft_size = 128;
  std::size_t doppler_fft_size = 256;
  std::size_t angle_fft_size = 128;

  static RadarConfig table1() { return RadarConfig{}; }

  std::size_t n_virtual() const noexcept { return n_tx * n_rx; }

  /// Evaluated at the start frequency.
  double wavelength() const { return speed_of_light / start_frequency; }

  double element_spacing_m() const { return element_spacing * wavelength(); }

  /// Meters per range-FFT bin: c·fs / (2·S·N_fft).
  double range_bin_spacing() const {
    return speed_of_light * sampling_frequency /
           (2.0 * sweep_slope * static_cast<double>(range_fft_size));
  }

  double range_of_bin(double bin) const { return bin * range_bin_spacing(); }

  /// m/s per Doppler bin: λ / (2·N_dfft·T_c).
  double doppler_bin_spacing() const {
    return wavelength() / (2.0 * static_cast<double>(doppler_fft_size) * chirp_duration);
  }

  /// Velocity of a shifted Doppler bin (center bin is zero velocity).
  double velocity_of_bin(double bin) const {
    return (bin - static_cast<double>(doppler_fft_size / 2)) * doppler_bin_spacing();
  }

  /// sin(θ) of a shifted angle bin: (b - N/2)·λ / (N·h).
  double sin_of_angle_bin(double bin) const {
    return (bin - static_cast<double>(angle_fft_size / 2)) /
           (static_cast<double>(angle_fft_size) * element_spacing);
  }

  /// Azimuth in degrees; bins whose sine falls outside [-1, 1] are clamped.
  double azimuth_of_angle_bin(double bin) const {
    double s = sin_of_angle_bin(bin);
    s = std::clamp(s, -1.0, 1.0);
    return rad_to_deg(std::asin(s));
  }

  /// Fractional angle bin a source at the given azimuth (radians) falls on.
  double angle_bin_of(double azimuth) const {
    return static_cast<double>(angle_fft_size / 2) +
           std::sin(azimuth) * static_cast<double>(angle_fft_size) * element_spacing;
  }

  double frame_period() const { return 1.0 / frame_rate; }

  /// Largest |v| that does not wrap the Doppler FFT: λ / (4·T_c).
  double max_unambiguous_velocity() const { return wavelength() / (4.0 * chirp_duration); }

  /// Largest range whose beat frequency stays below fs (complex baseband).
  double max_unambiguous_range() const {
    return speed_of_light * sampling_frequency / (2.0 * sweep_slope);
  }
};

/// Radar range-equation inputs. Power-type quantities in dB/dBm, gains
/// given as "1" are linear unity.
struct LinkBudget {
  double tx_power = 12.5;            // dBm
  double tx_gain = 1.0;              // linear
  double rx_gain = 24.0;             // dB
  double wavelength = 0.0038961;     // m
  double rcs = 1.0;                  // m^2
  double boltzmann = 1.38e-23;       // J/K
  double temperature = 290.0;        // K
  double receiver_bandwidth = 4e6;   // Hz
  double noise_figure = 15.0;        // dB
  double min_snr = 2.0;              // dB

  static LinkBudget table2() { return LinkBudget{}; }
};

// ---------------------------------------------------------------------------
// Measurement formulas
// ---------------------------------------------------------------------------

inline double range_resolution(const RadarConfig& cfg) {
  if (!(cfg.sweep_bandwidth > 0.0)) throw InvalidConfig("sweep_bandwidth must be positive");
  return speed_of_light / (2.0 * cfg.sweep_bandwidth);
}

inline double velocity_resolution(const RadarConfig& cfg) {
  if (cfg.chirps_per_frame == 0) throw InvalidConfig("chirps_per_frame must be positive");
  if (!(cfg.chirp_duration > 0.0)) throw InvalidConfig("chirp_duration must be positive");
  return cfg.wavelength() /
         (2.0 * static_cast<double>(cfg.chirps_per_frame) * cfg.chirp_duration);
}

/// FFT angle resolution in radians at the given azimuth.
inline double angle_resolution(const RadarConfig& cfg, double azimuth) {
  if (!(cfg.element_spacing > 0.0)) throw InvalidConfig("element_spacing must be positive");
  if (!(std::abs(azimuth) < pi / 2.0))
    throw DomainError("angle_resolution is singular at |azimuth| >= 90 deg");
  const double c = std::cos(azimuth);
  if (c <= 1e-12) throw DomainError("angle_resolution is singular at |azimuth| >= 90 deg");
  return cfg.wavelength() /
         (static_cast<double>(cfg.n_virtual()) * cfg.element_spacing_m() * c);
}

inline double beat_frequency(const RadarConfig& cfg, double distance) {
  if (!(distance >= 0.0)) throw DomainError("distance must be non-negative");
  return 2.0 * cfg.sweep_slope * distance / speed_of_light;
}

namespace detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidConfig(std::string("link budget field '") + name + "' must be positive");
}
}  // namespace detail

/// k·T·B_R·F·(S/N)_min in watts.
inline double min_detectable_power(const LinkBudget& lb) {
  detail::require_positive(lb.boltzmann, "boltzmann");
  detail::require_positive(lb.temperature, "temperature");
  detail::require_positive(lb.receiver_bandwidth, "receiver_bandwidth");
  return lb.boltzmann * lb.temperature * lb.receiver_bandwidth *
         db_to_linear(lb.noise_figure) * db_to_linear(lb.min_snr);
}

inline double min_detectable_power_dbm(const LinkBudget& lb) {
  return watts_to_dbm(min_detectable_power(lb));
}

/// Radar range equation evaluated in linear SI units, given an explicit P_min.
inline double max_range(const LinkBudget& lb, double p_min_watts) {
  detail::require_positive(lb.tx_gain, "tx_gain");
  detail::require_positive(lb.wavelength, "wavelength");
  detail::require_positive(lb.rcs, "rcs");
  detail::require_positive(p_min_watts, "min_detectable_power");
  const double pt = dbm_to_watts(lb.tx_power);
  const double gr = db_to_linear(lb.rx_gain);
  const double num = pt * lb.tx_gain * gr * lb.wavelength * lb.wavelength * lb.rcs;
  const double den = std::pow(4.0 * pi, 3) * p_min_watts;
  return std::pow(num / den, 0.25);
}

inline double max_range(const LinkBudget& lb) { return max_range(lb, min_detectable_power(lb)); }

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ConfigViolation {
  std::string field;
  std::string rule;
};

inline std::vector<ConfigViolation> validate_config(const RadarConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto fail = [&](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };

  if (!(cfg.start_frequency > 0)) fail("start_frequency", "must be positive");
  if (!(cfg.sweep_bandwidth > 0)) fail("sweep_bandwidth", "must be positive");
  if (!(cfg.sweep_slope > 0)) fail("sweep_slope", "must be positive");
  if (!(cfg.sampling_frequency > 0)) fail("sampling_frequency", "must be positive");
  if (!(cfg.frame_rate > 0)) fail("frame_rate", "must be positive");
  if (!(cfg.element_spacing > 0)) fail("element_spacing", "must be positive");
  if (cfg.samples_per_chirp == 0) fail("samples_per_chirp", "must be positive");
  if (cfg.chirps_per_frame == 0) fail("chirps_per_frame", "must be positive");
  if (cfg.n_tx == 0) fail("n_tx", "must be positive");
  if (cfg.n_rx == 0) fail("n_rx", "must be positive");
  if (!out.empty()) return out;

  const double sampled_bw = cfg.sweep_slope * static_cast<double>(cfg.samples_per_chirp) /
                            cfg.sampling_frequency;
  if (std::abs(sampled_bw - cfg.sweep_bandwidth) > 0.01 * cfg.sweep_bandwidth) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sampled bandwidth slope*samples/fs = %.6g Hz differs from %.6g Hz by more than 1%%",
                  sampled_bw, cfg.sweep_bandwidth);
    fail("sweep_bandwidth", buf);
  }
  const double adc_time = static_cast<double>(cfg.samples_per_chirp) / cfg.sampling_frequency;
  if (cfg.chirp_duration < adc_time) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "chirp_duration %.6g s is shorter than sampling window %.6g s",
                  cfg.chirp_duration, adc_time);
    fail("chirp_duration", buf);
  }
  if (cfg.range_fft_size < cfg.samples_per_chirp)
    fail("range_fft_size", "must be >= samples_per_chirp");
  if (cfg.doppler_fft_size < cfg.chirps_per_frame)
    fail("doppler_fft_size", "must be >= chirps_per_frame");
  if (cfg.angle_fft_size < cfg.n_virtual())
    fail("angle_fft_size", "must be >= n_tx * n_rx");
  return out;
}

inline void require_valid(const RadarConfig& cfg) {
  auto v = validate_config(cfg);
  if (v.empty()) return;
  std::string msg = "invalid radar config:";
  for (const auto& x : v) msg += " [" + x.field + ": " + x.rule + "]";
  throw InvalidConfig(msg);
}

// ---------------------------------------------------------------------------
// Text format: `key = value unit`, `#` comments.
// ---------------------------------------------------------------------------

namespace detail {

enum class Dim { frequency, slope, rate, time, frame_rate, count, wavelengths, length, area,
                 db, dbm, linear, boltzmann, temperature };

inline std::optional<double> unit_scale(Dim dim, std::string_view unit) {
  static const std::map<Dim, std::map<std::string, double, std::less<>>> table = {
      {Dim::frequency, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
      {Dim::slope, {{"Hz/s", 1.0}, {"MHz/us", 1e12}, {"kHz/us", 1e9}, {"GHz/us", 1e15},
                    {"MHz/s", 1e6}}},
      {Dim::rate, {{"sps", 1.0}, {"ksps", 1e3}, {"Msps", 1e6}, {"Hz", 1.0}, {"kHz", 1e3},
                   {"MHz", 1e6}}},
      {Dim::time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}},
      {Dim::frame_rate, {{"fps", 1.0}, {"Hz", 1.0}}},
      {Dim::count, {{"", 1.0}}},
      {Dim::wavelengths, {{"", 1.0}, {"lambda", 1.0}}},
      {Dim::length, {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}}},
      {Dim::area, {{"m2", 1.0}, {"m^2", 1.0}}},
      {Dim::db, {{"dB", 1.0}}},
      {Dim::dbm, {{"dBm", 1.0}}},
      {Dim::linear, {{"", 1.0}}},
      {Dim::boltzmann, {{"", 1.0}, {"J/K", 1.0}}},
      {Dim::temperature, {{"K", 1.0}}},
  };
  const auto& units = table.at(dim);
  auto it = units.find(unit);
  if (it == units.end()) return std::nullopt;
  return it->second;
}

struct KeyValue {
  std::size_t line;
  std::string key;
  double value;
  std::string unit;
};

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto hash = raw.find('#');
    std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value [unit]'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string rest = trim(std::string_view(line).substr(eq + 1));
    std::istringstream ss(rest);
    std::string num, unit, extra;
    ss >> num >> unit >> extra;
    if (key.empty() || num.empty() || !extra.empty())
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value [unit]'");
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": field '" + key +
                       "' has non-numeric value '" + num + "'");
    }
    out.push_back({line_no, key, v, unit});
  }
  return out;
}

inline double scaled(const KeyValue& kv, Dim dim) {
  auto s = unit_scale(dim, kv.unit);
  if (!s)
    throw ParseError("line " + std::to_string(kv.line) + ": field '" + kv.key +
                     "' has unsupported unit '" + kv.unit + "'");
  // divide by exact powers of ten so "120 us" parses to the same double as 120e-6
  if (*s < 1.0) return kv.value / std::round(1.0 / *s);
  return kv.value * *s;
}

inline std::size_t as_count(const KeyValue& kv) {
  double v = scaled(kv, Dim::count);
  if (v < 0 || v != std::floor(v))
    throw ParseError("line " + std::to_string(kv.line) + ": field '" + kv.key +
                     "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses a radar config; keys absent from the text keep their Table 1 defaults.
inline RadarConfig parse_radar_config(std::string_view text) {
  using detail::Dim;
  RadarConfig cfg;
  for (const auto& kv : detail::parse_key_values(text)) {
    const auto& k = kv.key;
    if (k == "start_frequency") cfg.start_frequency = detail::scaled(kv, Dim::frequency);
    else if (k == "sweep_bandwidth") cfg.sweep_bandwidth = detail::scaled(kv, Dim::frequency);
    else if (k == "sweep_slope") cfg.sweep_slope = detail::scaled(kv, Dim::slope);
    else if (k == "sampling_frequency") cfg.sampling_frequency = detail::scaled(kv, Dim::rate);
    else if (k == "samples_per_chirp") cfg.samples_per_chirp = detail::as_count(kv);
    else if (k == "chirps_per_frame") cfg.chirps_per_frame = detail::as_count(kv);
    else if (k == "chirp_duration") cfg.chirp_duration = detail::scaled(kv, Dim::time);
    else if (k == "frame_rate") cfg.frame_rate = detail::scaled(kv, Dim::frame_rate);
    else if (k == "n_tx") cfg.n_tx = detail::as_count(kv);
    else if (k == "n_rx") cfg.n_rx = detail::as_count(kv);
    else if (k == "element_spacing") cfg.element_spacing = detail::scaled(kv, Dim::wavelengths);
    else if (k == "range_fft_size") cfg.range_fft_size = detail::as_count(kv);
    else if (k == "doppler_fft_size") cfg.doppler_fft_size = detail::as_count(kv);
    else if (k == "angle_fft_size") cfg.angle_fft_size = detail::as_count(kv);
    else
      throw ParseError("line " + std::to_string(kv.line) + ": unknown radar config key '" + k + "'");
  }
  return cfg;
}

inline LinkBudget parse_link_budget(std::string_view text) {
  using detail::Dim;
  LinkBudget lb;
  for (const auto& kv : detail::parse_key_values(text)) {
    const auto& k = kv.key;
    if (k == "tx_power") lb.tx_power = detail::scaled(kv, Dim::dbm);
    else if (k == "tx_gain") lb.tx_gain = detail::scaled(kv, Dim::linear);
    else if (k == "rx_gain") lb.rx_gain = detail::scaled(kv, Dim::db);
    else if (k == "wavelength") lb.wavelength = detail::scaled(kv, Dim::length);
    else if (k == "rcs") lb.rcs = detail::scaled(kv, Dim::area);
    else if (k == "boltzmann") lb.boltzmann = detail::scaled(kv, Dim::boltzmann);
    else if (k == "temperature") lb.temperature = detail::scaled(kv, Dim::temperature);
    else if (k == "receiver_bandwidth") lb.receiver_bandwidth = detail::scaled(kv, Dim::frequency);
    else if (k == "noise_figure") lb.noise_figure = detail::scaled(kv, Dim::db);
    else if (k == "min_snr") lb.min_snr = detail::scaled(kv, Dim::db);
    else
      throw ParseError("line " + std::to_string(kv.line) + ": unknown link budget key '" + k + "'");
  }
  return lb;
}

inline RadarConfig load_radar_config(const std::string& path) {
  return parse_radar_config(detail::read_file(path));
}

inline LinkBudget load_link_budget(const std::string& path) {
  return parse_link_budget(detail::read_file(path));
}

/// Canonical text form; parse_radar_config(to_text(c)) reproduces c exactly.
inline std::string to_text(const RadarConfig& c) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "start_frequency = %.17g Hz\n"
                "sweep_bandwidth = %.17g Hz\n"
                "sweep_slope = %.17g Hz/s\n"
                "sampling_frequency = %.17g sps\n"
                "samples_per_chirp = %zu\n"
                "chirps_per_frame = %zu\n"
                "chirp_duration = %.17g s\n"
                "frame_rate = %.17g fps\n"
                "n_tx = %zu\n"
                "n_rx = %zu\n"
                "element_spacing = %.17g lambda\n"
                "range_fft_size = %zu\n"
                "doppler_fft_size = %zu\n"
                "angle_fft_size = %zu\n",
                c.start_frequency, c.sweep_bandwidth, c.sweep_slope, c.sampling_frequency,
                c.samples_per_chirp, c.chirps_per_frame, c.chirp_duration, c.frame_rate, c.n_tx,
                c.n_rx, c.element_spacing, c.range_fft_size, c.doppler_fft_size,
                c.angle_fft_size);
  return buf;
}

/// 64-bit FNV-1a over the canonical text form.
inline std::uint64_t config_digest(const RadarConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_text(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fmcw

#endif  // FMCW_CONFIG_HPP
