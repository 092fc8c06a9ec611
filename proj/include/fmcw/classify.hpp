#ifndef FMCW_CLASSIFY_HPP
#define FMCW_CLASSIFY_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fmcw/core.hpp"
#include "fmcw/detect.hpp"
#include "fmcw/dsp.hpp"
#include "fmcw/scene.hpp"

namespace fmcw {

/// Concatenated STFT magnitudes [frequency][time][channel], max-normalized
/// to [0, 1]. Channel c holds crop cell (c / angle_cells, c % angle_cells).
struct StftCube {
  NdArray<float, 3> values;
  std::size_t angle_cells = 5;

  std::size_t frequency_bins() const { return values.extent(0); }
  std::size_t time_windows() const { return values.extent(1); }
  std::size_t channels() const { return values.extent(2); }
};

inline std::pair<std::size_t, std::size_t> channel_cell(std::size_t channel, std::size_t angle_cells) {
  return {channel / angle_cells, channel % angle_cells};
}

struct StftCubeOptions {
  StftParams stft{};
  // expected (range, angle, chirp-time) dims; zero entries are not checked
  std::size_t range_cells = 11;
  std::size_t angle_cells = 5;
  std::size_t chirp_time = 0;
};

inline StftCube stft_cube(const RadarCubeCrop& crop, const StftCubeOptions& opt = {}) {
  if ((opt.range_cells && crop.range_cells() != opt.range_cells) ||
      (opt.angle_cells && crop.angle_cells() != opt.angle_cells) ||
      (opt.chirp_time && crop.chirp_time() != opt.chirp_time))
    throw ShapeError("crop dims (" + std::to_string(crop.range_cells()) + ", " +
                     std::to_string(crop.angle_cells()) + ", " + std::to_string(crop.chirp_time()) +
                     ") do not match the expected box");
  const std::size_t C = crop.range_cells() * crop.angle_cells();
  const std::size_t F = opt.stft.nfft;
  const std::size_t T = stft_window_count(crop.chirp_time(), opt.stft.window, opt.stft.hop);
  if (T == 0) throw ShapeError("crop time series shorter than the STFT window");

  StftCube out{NdArray<float, 3>({F, T, C}), crop.angle_cells()};
  std::vector<cdouble> series(crop.chirp_time());
  double top = 0.0;
  std::vector<Spectrogram> specs;
  specs.reserve(C);
  for (std::size_t c = 0; c < C; ++c) {
    const auto [i, j] = channel_cell(c, crop.angle_cells());
    for (std::size_t k = 0; k < series.size(); ++k) series[k] = crop.data(i, j, k);
    specs.push_back(stft(series, opt.stft));
    for (double v : specs.back().values.data()) top = std::max(top, v);
  }
  const double scale = top > 0 ? 1.0 / top : 0.0;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t t = 0; t < T; ++t)
        out.values(f, t, c) = static_cast<float>(specs[c].values(f, t) * scale);
  return out;
}

// ---------------------------------------------------------------------------
// Decision-tree baseline
// ---------------------------------------------------------------------------

struct DtFeatures {
  std::size_t range_extent = 1;  // S_R
  double amplitude = 0.0;        // A
  double range = 1.0;            // R, m
};

struct DtThresholds {
  double p = 2.0;
  double q = 0.1;
};

inline DtFeatures dt_features(const ObjectCluster& c) {
  return {c.range_extent, c.mean_amplitude, c.center_range};
}

/// S_R < p: pedestrian; otherwise A/R^2 > q: car; else cyclist.
inline ObjectClass dt_classify(const DtFeatures& f, const DtThresholds& th = {}) {
  if (static_cast<double>(f.range_extent) < th.p) return ObjectClass::pedestrian;
  return f.amplitude / (f.range * f.range) > th.q ? ObjectClass::car : ObjectClass::cyclist;
}

// ---------------------------------------------------------------------------
// Pluggable cube classifiers
// ---------------------------------------------------------------------------

struct Classification {
  ObjectClass label = ObjectClass::pedestrian;
  double score = 0.0;  // distance to the winning centroid; lower is closer
};

class CubeClassifier {
 public:
  virtual ~CubeClassifier() = default;
  virtual Classification classify(const StftCube& cube) const = 0;
};

struct ReferenceFeatures {
  double doppler_spread = 0.0;  // bins
  double range_extent = 0.0;    // channels
};

/// Inter-quantile width, in bins, of a non-negative weight distribution.
inline double quantile_width(const std::vector<double>& w, double lo, double hi) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0)) return 0.0;
  auto locate = [&](double q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (acc >= q * total) return static_cast<double>(i);
    }
    return static_cast<double>(w.size() - 1);
  };
  return locate(hi) - locate(lo);
}

/// Doppler spread: per time window, the 10-90 % inter-quantile width of the
/// power summed over channels, averaged over time. Range extent: channels
/// whose total energy is within 20 dB of the strongest channel.
inline ReferenceFeatures reference_features(const StftCube& cube) {
  const std::size_t F = cube.frequency_bins(), T = cube.time_windows(), C = cube.channels();
  ReferenceFeatures out;
  std::vector<double> marginal(F);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(marginal.begin(), marginal.end(), 0.0);
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t c = 0; c < C; ++c) {
        const double v = cube.values(f, t, c);
        marginal[f] += v * v;
      }
    out.doppler_spread += quantile_width(marginal, 0.1, 0.9);
  }
  if (T) out.doppler_spread /= static_cast<double>(T);

  std::vector<double> energy(C, 0.0);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c) {
        const double v = cube.values(f, t, c);
        energy[c] += v * v;
      }
  const double top = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  if (top > 0)
    for (double e : energy)
      if (e >= top * 0.01) out.range_extent += 1.0;
  return out;
}

/// Nearest-centroid classifier over ReferenceFeatures (Euclidean, raw units).
class ReferenceClassifier : public CubeClassifier {
 public:
  void set_centroid(ObjectClass c, ReferenceFeatures f) { centroids_[c] = f; }
  const std::map<ObjectClass, ReferenceFeatures>& centroids() const { return centroids_; }
  bool trained() const { return !centroids_.empty(); }

  /// Replaces the model with per-class feature means.
  void train(const std::vector<std::pair<ObjectClass, ReferenceFeatures>>& samples) {
    std::map<ObjectClass, std::pair<ReferenceFeatures, std::size_t>> acc;
    for (const auto& [label, f] : samples) {
      auto& a = acc[label];
      a.first.doppler_spread += f.doppler_spread;
      a.first.range_extent += f.range_extent;
      ++a.second;
    }
    centroids_.clear();
    for (const auto& [label, a] : acc) {
      const auto n = static_cast<double>(a.second);
      centroids_[label] = {a.first.doppler_spread / n, a.first.range_extent / n};
    }
  }

  void train(const std::vector<std::pair<ObjectClass, const StftCube*>>& cubes) {
    std::vector<std::pair<ObjectClass, ReferenceFeatures>> samples;
    for (const auto& [label, cube] : cubes) samples.emplace_back(label, reference_features(*cube));
    train(samples);
  }

  Classification classify(const ReferenceFeatures& f) const {
    if (!trained()) throw Error("reference classifier is not trained");
    Classification best{ObjectClass::pedestrian, std::numeric_limits<double>::infinity()};
    for (const auto& [label, c] : centroids_) {
      const double d = std::hypot(f.doppler_spread - c.doppler_spread, f.range_extent - c.range_extent);
      if (d < best.score) best = {label, d};
    }
    return best;
  }

  Classification classify(const StftCube& cube) const override {
    return classify(reference_features(cube));
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "# nearest-centroid model: class doppler_spread range_extent\n";
    for (const auto& [label, c] : centroids_)
      os << "centroid " << to_string(label) << ' ' << c.doppler_spread << ' ' << c.range_extent << '\n';
    return os.str();
  }

  static ReferenceClassifier from_text(const std::string& text) {
    ReferenceClassifier out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      std::istringstream ls(line);
      std::string tag, name;
      if (!(ls >> tag)) continue;
      ReferenceFeatures f;
      if (tag != "centroid" || !(ls >> name >> f.doppler_spread >> f.range_extent))
        throw ParseError("model line " + std::to_string(lineno) + ": expected 'centroid <class> <spread> <extent>'");
      std::string extra;
      if (ls >> extra) throw ParseError("model line " + std::to_string(lineno) + ": trailing text");
      const auto label = object_class_from(name);
      if (!label || *label == ObjectClass::point)
        throw ParseError("model line " + std::to_string(lineno) + ": unknown class '" + name + "'");
      out.centroids_[*label] = f;
    }
    return out;
  }

  static ReferenceClassifier load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
  }

 private:
  std::map<ObjectClass, ReferenceFeatures> centroids_;
};

}  // namespace fmcw

#endif  // FMCW_CLASSIFY_HPP
