#pragma once

#include "symm/geom.hpp"
#include "symm/prediction.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace symm {

// Camera placement of one view relative to the reference (input) view. The
// reference frame is z-up; azimuth turns about z, elevation about y.
struct ViewPose {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;

  // Maps view-frame directions into the reference frame:
  // Rz(azimuth) * Ry(elevation).
  Mat3 rotation() const;
};

// The standard ring: n views at the reference elevation, evenly spaced in
// azimuth (8 views -> 45 degrees apart).
std::vector<ViewPose> view_ring(std::size_t n = 8, double elevation_deg = 0.0);

struct AggregationConfig {
  double cluster_threshold_deg = 30.0;
  std::size_t min_cluster_size = 2;
  double confidence_floor = 0.0;

  void validate() const;
};

struct ClusteredPrediction {
  SymmetryPlane plane;
  std::size_t support = 0;
  double mean_confidence = 0.0;
};

struct ViewPredictions {
  PredictionSet predictions;
  ViewPose pose;
};

PredictionSet rotate_predictions(const PredictionSet& preds, const Mat3& rotation);
PredictionSet to_reference_frame(const PredictionSet& preds, const ViewPose& pose);

// Threshold-cut average-linkage clustering under the sign-invariant geodesic.
// Centres are the dominant eigenvector of sum w n n^T (w = confidence), which
// is indifferent to the sign of each member.
std::vector<ClusteredPrediction> cluster_normals(std::span<const PredictionSet> all_preds,
                                                 const AggregationConfig& cfg = {});

std::vector<ClusteredPrediction> aggregate_views(std::span<const ViewPredictions> per_view,
                                                 const AggregationConfig& cfg = {});

} // namespace symm
