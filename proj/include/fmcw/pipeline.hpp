#ifndef FMCW_PIPELINE_HPP
#define FMCW_PIPELINE_HPP

#include <vector>

#include "fmcw/classify.hpp"
#include "fmcw/detect.hpp"
#include "fmcw/dsp.hpp"
#include "fmcw/eval.hpp"

namespace fmcw {

struct PipelineParams {
  DetectorParams detector{};
  DbscanParams dbscan{};
  DtThresholds thresholds{};
};

struct FrameResult {
  std::size_t frame = 0;
  std::vector<DetectionPoint> points;
  std::vector<ObjectCluster> clusters;
};

/// RD CFAR point cloud then DBSCAN for one frame.
inline FrameResult detect_frame(const DataCube& cube, std::size_t frame, const RadarConfig& cfg,
                                const PipelineParams& p = {}) {
  FrameResult out;
  out.frame = frame;
  out.points = point_cloud(range_doppler(cube, frame, cfg, p.detector.window), cfg, p.detector);
  out.clusters = dbscan(out.points, cfg, p.dbscan);
  return out;
}

/// Decision-tree labels for every cluster in every frame.
inline std::vector<Prediction> dt_predictions(const std::vector<FrameResult>& frames,
                                              const DtThresholds& th = {}) {
  std::vector<Prediction> out;
  for (const auto& f : frames)
    for (const auto& c : f.clusters)
      out.push_back({dt_classify(dt_features(c), th), c.center_range, c.center_azimuth, f.frame});
  return out;
}

inline std::vector<Prediction> run_dt_pipeline(const DataCube& cube, const RadarConfig& cfg,
                                               const PipelineParams& p = {}) {
  std::vector<FrameResult> frames;
  for (std::size_t f = 0; f < cube.frames(); ++f) frames.push_back(detect_frame(cube, f, cfg, p));
  return dt_predictions(frames, p.thresholds);
}

struct CdmcObject {
  ObjectCluster cluster;
  StftCube cube;
};

/// First-frame point cloud and DBSCAN, then an 11x5 crop of the per-chirp
/// tensor over all frames of `cube` and its STFT cube.
inline std::vector<CdmcObject> cdmc_objects(const DataCube& cube, const RadarConfig& cfg,
                                            const PipelineParams& p = {}, BoxSize box = {},
                                            const StftParams& stft_params = {}) {
  const auto clusters = detect_frame(cube, 0, cfg, p).clusters;
  std::vector<CdmcObject> out;
  for (const auto& c : clusters) {
    const auto crop = crop_from_cube(cube, cfg, c.center_range_bin, c.center_angle_bin, box,
                                     p.detector.window);
    StftCubeOptions opt;
    opt.stft = stft_params;
    opt.range_cells = box.range;
    opt.angle_cells = box.angle;
    out.push_back({c, stft_cube(crop, opt)});
  }
  return out;
}

}  // namespace fmcw

#endif  // FMCW_PIPELINE_HPP
