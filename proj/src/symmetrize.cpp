#include "symm/symmetrize.hpp"

#include "symm/error.hpp"
#include "symm/rng.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace symm {

namespace {

// Chamfer distance between the even- and odd-indexed halves: what two
// independent samples of this shape look like to each other.
double sampling_floor(const PointCloud& cloud) {
  PointCloud even, odd;
  for (std::size_t i = 0; i < cloud.size(); ++i) (i % 2 ? odd : even).points.push_back(cloud.points[i]);
  return chamfer(even, odd);
}

} // namespace

AlignmentResult align_plane(const PointCloud& cloud, const UnitVector3& direction, const IcpConfig& cfg) {
  require_non_degenerate(cloud);
  const SymmetryPlane initial(direction, -direction.vec().dot(centroid(cloud.points)));
  const RefineResult r = refine_plane(cloud, initial, cfg);
  const double swing = geodesic_deg(direction, r.plane.normal());
  if (swing > kAlignGuardDeg) {
    throw Error(ErrorCode::InitialDirectionRejected,
                "aligned plane moved " + std::to_string(swing) + " degrees from the given direction");
  }
  const double floor = sampling_floor(cloud);
  if (r.residual > floor) {
    throw Error(ErrorCode::InitialDirectionRejected,
                "no symmetry near the given direction (residual " + std::to_string(r.residual) +
                    " exceeds sampling floor " + std::to_string(floor) + ")");
  }
  return {r.plane, r.residual, r.initial_residual, r.rounds};
}

PointCloud densify(const PointCloud& cloud, const SymmetryPlane& plane, double fraction, std::uint64_t seed) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot densify an empty cloud");
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must be in [0, 1]");
  }
  const std::size_t n = cloud.size();
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));

  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed, streams::kDensify);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }

  PointCloud out = cloud;
  out.points.reserve(n + k);
  for (std::size_t i = 0; i < k; ++i) out.points.push_back(reflect_point(plane, cloud.points[idx[i]]));
  return out;
}

} // namespace symm
