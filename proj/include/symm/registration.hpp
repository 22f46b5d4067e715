#pragma once

#include "symm/geom.hpp"
#include "symm/pointcloud.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace symm {

struct IcpConfig {
  std::size_t max_iterations = 50;
  // Stop once the mean correspondence distance changes by less than this.
  double convergence_eps = 1e-6;
  // Fraction of worst correspondences dropped each iteration (trimmed ICP).
  double trim_fraction = 0.0;
  // Register at most this many source points (deterministic stride
  // subsample); 0 uses every point.
  std::size_t max_points = 0;

  void validate() const;
};

struct IcpResult {
  RigidTransform transform;
  double final_mean_distance = 0.0;
  std::size_t iterations_used = 0;
  bool converged = false;
  // Mean squared distance over the kept correspondences, one entry for the
  // starting pose plus one per accepted iteration. Non-increasing.
  std::vector<double> objective_history;
};

// Least-squares proper rotation + translation taking `from` onto `to`
// (Kabsch via SVD with determinant correction).
RigidTransform kabsch(std::span<const Vec3> from, std::span<const Vec3> to);

IcpResult icp_register(const PointCloud& source, const PointCloud& target, const IcpConfig& cfg = {});
// Same, reusing a prebuilt index over the target cloud.
IcpResult icp_register(const PointCloud& source, const KdTree& target, const IcpConfig& cfg = {});

enum class RefineStatus {
  Refined,
  // The refined plane scored worse than the starting plane; the starting
  // plane is returned unchanged.
  Diverged,
};

struct RefineResult {
  SymmetryPlane plane;
  double residual = 0.0;          // reflective Chamfer of the returned plane
  double initial_residual = 0.0;  // reflective Chamfer of the starting plane
  RefineStatus status = RefineStatus::Refined;
  int rounds = 0;                 // reflect-register-fit rounds executed
};

inline constexpr int kMaxRefineRounds = 3;
inline constexpr double kRefineStopDeg = 0.05;
inline constexpr double kOutlierMedianFactor = 3.0;

// Reflect, register the reflection onto the original, then re-fit the mirror
// plane from the final correspondences; repeated up to kMaxRefineRounds.
RefineResult refine_plane(const PointCloud& cloud, const SymmetryPlane& initial, const IcpConfig& cfg = {});
RefineResult refine_plane(const PointCloud& cloud, const KdTree& index, const SymmetryPlane& initial,
                          const IcpConfig& cfg = {});

// Mirror plane from (point, mirror-partner) pairs: the normal is the dominant
// eigenvector of sum d d^T over differences d = x - y, and the plane passes
// through the mean midpoint. Returns nullopt with fewer than 3 usable pairs.
std::optional<SymmetryPlane> fit_mirror_plane(std::span<const Vec3> points, std::span<const Vec3> partners);

} // namespace symm
