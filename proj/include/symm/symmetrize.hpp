#pragma once

#include "symm/geom.hpp"
#include "symm/pointcloud.hpp"
#include "symm/registration.hpp"

#include <cstdint>

namespace symm {

struct AlignmentResult {
  SymmetryPlane plane;
  double residual = 0.0;
  double initial_residual = 0.0;
  int iterations = 0;
};

// Largest allowed swing between the given direction and the aligned plane.
inline constexpr double kAlignGuardDeg = 30.0;

// Places a plane with the given normal on the cloud: starts through the
// centroid, then refines by reflect-and-register. Throws
// InitialDirectionRejected when the result leaves the guard cone around the
// input direction, or when its reflective residual exceeds the cloud's
// sampling floor (Chamfer between its even- and odd-indexed halves).
AlignmentResult align_plane(const PointCloud& cloud, const UnitVector3& direction, const IcpConfig& cfg = {});

inline constexpr double kDefaultDensifyFraction = 0.5;

// Appends a seeded random subset of floor(fraction * n) reflected points.
PointCloud densify(const PointCloud& cloud, const SymmetryPlane& plane,
                   double fraction = kDefaultDensifyFraction, std::uint64_t seed = 0);

} // namespace symm
