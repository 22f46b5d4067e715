#include "symm/registration.hpp"

#include "symm/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace symm {

void IcpConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(convergence_eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "convergence_eps must be > 0");
  if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "trim_fraction must be in [0, 1)");
  }
}

RigidTransform kabsch(std::span<const Vec3> from, std::span<const Vec3> to) {
  if (from.size() != to.size() || from.empty()) {
    throw Error(ErrorCode::InvalidArgument, "kabsch needs two equally sized, non-empty point sets");
  }
  const Vec3 cf = centroid(from);
  const Vec3 ct = centroid(to);
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h += (from[i] - cf) * (to[i] - ct).transpose();

  const Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform t;
  t.rotation = v * d * u.transpose();
  t.translation = ct - t.rotation * cf;
  return t;
}

namespace {

std::vector<std::size_t> stride_subsample(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (max_points == 0 || n <= max_points) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }
  idx.reserve(max_points);
  for (std::size_t k = 0; k < max_points; ++k) idx.push_back(k * n / max_points);
  return idx;
}

struct Pair {
  std::size_t source;  // index into the source cloud
  std::size_t target;  // index into the target cloud
  double squared_distance;
};

struct Correspondences {
  std::vector<Pair> kept;
  double mean_squared = 0.0;
  double mean_distance = 0.0;
};

Correspondences correspond(const PointCloud& source, std::span<const std::size_t> sample, const KdTree& target,
                           const RigidTransform& t, double trim_fraction) {
  Correspondences c;
  c.kept.reserve(sample.size());
  for (std::size_t i : sample) {
    const Neighbor nn = target.nearest(t.apply(source.points[i]));
    c.kept.push_back({i, nn.index, nn.squared_distance});
  }
  if (trim_fraction > 0.0) {
    const auto drop = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(c.kept.size())));
    const std::size_t keep = std::max<std::size_t>(3, c.kept.size() - drop);
    if (keep < c.kept.size()) {
      std::sort(c.kept.begin(), c.kept.end(), [](const Pair& a, const Pair& b) {
        return a.squared_distance < b.squared_distance ||
               (a.squared_distance == b.squared_distance && a.source < b.source);
      });
      c.kept.resize(keep);
      std::sort(c.kept.begin(), c.kept.end(), [](const Pair& a, const Pair& b) { return a.source < b.source; });
    }
  }
  double sq = 0.0, dist = 0.0;
  for (const auto& p : c.kept) {
    sq += p.squared_distance;
    dist += std::sqrt(p.squared_distance);
  }
  c.mean_squared = sq / static_cast<double>(c.kept.size());
  c.mean_distance = dist / static_cast<double>(c.kept.size());
  return c;
}

} // namespace

IcpResult icp_register(const PointCloud& source, const PointCloud& target, const IcpConfig& cfg) {
  require_non_degenerate(target);
  return icp_register(source, KdTree(target.points), cfg);
}

IcpResult icp_register(const PointCloud& source, const KdTree& target, const IcpConfig& cfg) {
  cfg.validate();
  require_non_degenerate(source);

  const auto sample = stride_subsample(source.size(), cfg.max_points);
  IcpResult result;
  Correspondences current = correspond(source, sample, target, result.transform, cfg.trim_fraction);
  result.objective_history.push_back(current.mean_squared);

  std::vector<Vec3> from, to;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    from.clear();
    to.clear();
    for (const auto& p : current.kept) {
      from.push_back(result.transform.apply(source.points[p.source]));
      to.push_back(target.point(p.target));
    }
    const RigidTransform candidate = kabsch(from, to) * result.transform;
    Correspondences next = correspond(source, sample, target, candidate, cfg.trim_fraction);
    result.iterations_used = it;

    // Exact arithmetic makes the objective non-increasing; a rise can only
    // come from round-off at the optimum, so treat it as convergence.
    if (next.mean_squared > current.mean_squared) {
      result.converged = true;
      break;
    }
    const double change = std::abs(current.mean_distance - next.mean_distance);
    result.transform = candidate;
    current = std::move(next);
    result.objective_history.push_back(current.mean_squared);
    if (change < cfg.convergence_eps) {
      result.converged = true;
      break;
    }
  }
  result.final_mean_distance = current.mean_distance;
  return result;
}

std::optional<SymmetryPlane> fit_mirror_plane(std::span<const Vec3> points, std::span<const Vec3> partners) {
  if (points.size() != partners.size()) {
    throw Error(ErrorCode::InvalidArgument, "fit_mirror_plane needs matching pair lists");
  }
  Mat3 scatter = Mat3::Zero();
  Vec3 mid = Vec3::Zero();
  std::size_t used = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 d = points[i] - partners[i];
    if (d.norm() <= 1e-6) continue;
    scatter += d * d.transpose();
    mid += 0.5 * (points[i] + partners[i]);
    ++used;
  }
  if (used < 3) return std::nullopt;
  const Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  const UnitVector3 normal(es.eigenvectors().col(2));
  mid /= static_cast<double>(used);
  return SymmetryPlane(normal, -normal.vec().dot(mid));
}

RefineResult refine_plane(const PointCloud& cloud, const SymmetryPlane& initial, const IcpConfig& cfg) {
  require_non_degenerate(cloud);
  return refine_plane(cloud, KdTree(cloud.points), initial, cfg);
}

RefineResult refine_plane(const PointCloud& cloud, const KdTree& index, const SymmetryPlane& initial,
                          const IcpConfig& cfg) {
  cfg.validate();
  require_non_degenerate(cloud);

  const double initial_residual = reflective_chamfer(cloud, index, initial);
  RefineResult best{initial, initial_residual, initial_residual, RefineStatus::Refined, 0};
  const auto sample = stride_subsample(cloud.size(), cfg.max_points);
  // ICP already subsamples through `sample`; register every reflected sample.
  IcpConfig inner = cfg;
  inner.max_points = 0;

  SymmetryPlane current = initial;
  std::optional<SymmetryPlane> refined_best;
  double refined_residual = 0.0;
  for (int round = 1; round <= kMaxRefineRounds; ++round) {
    PointCloud reflected;
    reflected.points.reserve(sample.size());
    for (std::size_t i : sample) reflected.points.push_back(reflect_point(current, cloud.points[i]));
    const IcpResult icp = icp_register(reflected, index, inner);
    best.rounds = round;

    std::vector<Vec3> points, partners;
    std::vector<double> residuals;
    points.reserve(sample.size());
    partners.reserve(sample.size());
    residuals.reserve(sample.size());
    for (std::size_t k = 0; k < sample.size(); ++k) {
      const Neighbor nn = index.nearest(icp.transform.apply(reflected.points[k]));
      points.push_back(cloud.points[sample[k]]);
      partners.push_back(index.point(nn.index));
      residuals.push_back(std::sqrt(nn.squared_distance));
    }
    std::vector<double> sorted = residuals;
    auto mid_it = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid_it, sorted.end());
    const double cutoff = kOutlierMedianFactor * *mid_it + 1e-12;
    std::size_t w = 0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (residuals[k] > cutoff) continue;
      points[w] = points[k];
      partners[w] = partners[k];
      ++w;
    }
    points.resize(w);
    partners.resize(w);

    const auto fitted = fit_mirror_plane(points, partners);
    if (!fitted) break;
    const double residual = reflective_chamfer(cloud, index, *fitted);
    if (!refined_best || residual < refined_residual) {
      refined_best = *fitted;
      refined_residual = residual;
    }
    const double change = geodesic_deg(current.normal(), fitted->normal());
    current = *fitted;
    if (change < kRefineStopDeg) break;
  }

  if (!refined_best || refined_residual > initial_residual) {
    best.status = RefineStatus::Diverged;
    return best;
  }
  best.plane = *refined_best;
  best.residual = refined_residual;
  return best;
}

} // namespace symm
