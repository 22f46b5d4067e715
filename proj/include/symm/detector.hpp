#pragma once

#include "symm/geom.hpp"
#include "symm/pointcloud.hpp"
#include "symm/registration.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace symm {

struct DetectorConfig {
  std::size_t n_points = 50000;
  std::size_t n_candidates = 31;
  // Acceptance gate: a refined plane is kept only if the reflective Chamfer
  // of the normalized samples stays at or below this.
  double chamfer_gate = 0.02;
  // Coarse-scan gate: candidates at or below this are sent to refinement.
  // Candidates sit up to ~18 degrees from a true plane at 31 candidates, so
  // this must be much looser than chamfer_gate.
  double scan_gate = 0.12;
  double merge_threshold_deg = 10.0;
  // Candidate Chamfer is estimated from this many stride-subsampled points
  // (0 = all); refinement and acceptance always use every sample.
  std::size_t scan_points = 5000;
  // Gated candidates are first refined on this many stride-subsampled points
  // (0 = all); candidates that converge onto the same plane share one full
  // refinement.
  std::size_t coarse_points = 1000;
  // Worker threads for scan and refinement. Output is identical for any
  // thread count.
  std::size_t threads = 1;
  IcpConfig icp{.max_iterations = 50, .convergence_eps = 1e-6, .trim_fraction = 0.0, .max_points = 5000};

  void validate() const;
};

struct DetectedPlane {
  SymmetryPlane plane;
  // Mean distance from the reflected samples back to the shape: to the mesh
  // surface for mesh input, to the nearest sample for cloud input.
  double residual = 0.0;
  // exp(-residual / chamfer_gate), in (0, 1].
  double score = 1.0;
  // Reflective point-to-point Chamfer in normalized units (what the gate tests).
  double chamfer = 0.0;
};

struct DetectedPlaneSet {
  std::vector<DetectedPlane> planes;  // ascending residual
  // More than 80% of candidates passed the gate unrefined (e.g. spheres).
  bool ubiquitous = false;
  std::size_t candidates_in_gate = 0;
  std::size_t candidates_refined = 0;  // full refinements after coarse de-duplication
};

inline constexpr double kUbiquitousFraction = 0.8;

// Candidate scan -> Chamfer gate -> ICP refinement -> merge, on a mesh
// normalized to its unit bounding sphere. Planes are returned in the input
// mesh's coordinates.
DetectedPlaneSet detect_planes(const TriMesh& mesh, const DetectorConfig& cfg = {}, std::uint64_t seed = 0);

// Same pipeline on an existing cloud (centroid-centred, unit-radius scaled).
DetectedPlaneSet detect_planes_from_cloud(const PointCloud& cloud, const DetectorConfig& cfg = {});

} // namespace symm
