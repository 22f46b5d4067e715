#include "symm/detector.hpp"

#include "symm/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

namespace symm {

void DetectorConfig::validate() const {
  if (n_points < 100) throw Error(ErrorCode::InvalidArgument, "n_points must be >= 100");
  if (n_candidates < 1) throw Error(ErrorCode::InvalidArgument, "n_candidates must be >= 1");
  if (!(chamfer_gate > 0.0)) throw Error(ErrorCode::InvalidArgument, "chamfer_gate must be > 0");
  if (!(scan_gate > 0.0)) throw Error(ErrorCode::InvalidArgument, "scan_gate must be > 0");
  if (coarse_points != 0 && coarse_points < 3) throw Error(ErrorCode::InvalidArgument, "coarse_points must be >= 3");
  if (!(merge_threshold_deg > 0.0 && merge_threshold_deg < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "merge_threshold_deg must be in (0, 90)");
  }
  icp.validate();
}

namespace {

constexpr std::size_t kCoarseBatch = 16;

using ResidualFn = std::function<double(const SymmetryPlane&)>;

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t workers = std::min(n, std::max<std::size_t>(1, threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Runs the pipeline in the normalized frame. `residual` scores an accepted
// plane for reporting and ordering.
DetectedPlaneSet detect_normalized(const PointCloud& cloud, const KdTree& index, const DetectorConfig& cfg,
                                   const ResidualFn& residual) {
  const auto candidates = sample_hemisphere(cfg.n_candidates);

  struct Scan {
    std::size_t candidate;
    double chamfer;
  };
  std::vector<double> chamfers(candidates.size());
  parallel_for(candidates.size(), cfg.threads, [&](std::size_t i) {
    chamfers[i] = reflective_chamfer(cloud, index, SymmetryPlane(candidates[i], 0.0), cfg.scan_points);
  });
  std::vector<Scan> scans;
  DetectedPlaneSet out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (chamfers[i] <= cfg.chamfer_gate) ++out.candidates_in_gate;
    if (chamfers[i] <= cfg.scan_gate) scans.push_back({i, chamfers[i]});
  }
  out.ubiquitous =
      static_cast<double>(out.candidates_in_gate) > kUbiquitousFraction * static_cast<double>(candidates.size());
  std::stable_sort(scans.begin(), scans.end(), [](const Scan& a, const Scan& b) { return a.chamfer < b.chamfer; });

  // Coarse pass: gated candidates are refined on a small subsample, in scan
  // order and fixed-size batches. Candidates already within the merge
  // threshold of a claimed plane are skipped, as are seeds that land on one;
  // each remaining seed gets a full refinement from its coarse plane.
  PointCloud coarse;
  const std::size_t m = cfg.coarse_points == 0 ? cloud.size() : std::min(cfg.coarse_points, cloud.size());
  coarse.points.reserve(m);
  for (std::size_t k = 0; k < m; ++k) coarse.points.push_back(cloud.points[k * cloud.size() / m]);
  const KdTree coarse_index(coarse.points);
  IcpConfig coarse_icp = cfg.icp;
  coarse_icp.max_points = 0;

  std::vector<SymmetryPlane> claimed;
  const auto is_claimed = [&](const UnitVector3& n) {
    return std::any_of(claimed.begin(), claimed.end(), [&](const SymmetryPlane& c) {
      return geodesic_deg(c.normal(), n) < cfg.merge_threshold_deg;
    });
  };
  for (std::size_t begin = 0; begin < scans.size(); begin += kCoarseBatch) {
    std::vector<UnitVector3> batch;
    for (std::size_t k = begin; k < std::min(begin + kCoarseBatch, scans.size()); ++k) {
      const UnitVector3& n = candidates[scans[k].candidate];
      if (!is_claimed(n)) batch.push_back(n);
    }
    std::vector<std::optional<SymmetryPlane>> seeds(batch.size());
    parallel_for(batch.size(), cfg.threads, [&](std::size_t k) {
      seeds[k] = refine_plane(coarse, coarse_index, SymmetryPlane(batch[k], 0.0), coarse_icp).plane;
    });
    for (const auto& seed : seeds) {
      if (!is_claimed(seed->normal())) claimed.push_back(*seed);
    }
  }
  out.candidates_refined = claimed.size();

  std::vector<std::optional<RefineResult>> refined(claimed.size());
  parallel_for(claimed.size(), cfg.threads,
               [&](std::size_t k) { refined[k] = refine_plane(cloud, index, claimed[k], cfg.icp); });
  std::vector<DetectedPlane> accepted;
  for (const auto& r : refined) {
    if (r->residual > cfg.chamfer_gate) continue;
    const double res = residual(r->plane);
    accepted.push_back({r->plane, res, std::exp(-res / cfg.chamfer_gate), r->residual});
  }

  std::stable_sort(accepted.begin(), accepted.end(),
                   [](const DetectedPlane& a, const DetectedPlane& b) { return a.residual < b.residual; });
  for (const auto& a : accepted) {
    const bool duplicate = std::any_of(out.planes.begin(), out.planes.end(), [&](const DetectedPlane& k) {
      return geodesic_deg(k.plane.normal(), a.plane.normal()) < cfg.merge_threshold_deg;
    });
    if (!duplicate) out.planes.push_back(a);
  }
  return out;
}

void to_input_frame(DetectedPlaneSet& set, const Similarity& transform) {
  for (auto& p : set.planes) p.plane = transform.plane_to_input(p.plane);
}

} // namespace

DetectedPlaneSet detect_planes(const TriMesh& mesh, const DetectorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const NormalizedMesh normalized = normalize_to_unit_sphere(mesh);
  const PointCloud samples = sample_surface(normalized.mesh, cfg.n_points, seed);
  require_non_degenerate(samples);
  const TriangleIndex surface(normalized.mesh);
  const KdTree index(samples.points);
  DetectedPlaneSet set = detect_normalized(samples, index, cfg, [&](const SymmetryPlane& plane) {
    return reflective_surface_residual(samples, surface, plane);
  });
  to_input_frame(set, normalized.transform);
  return set;
}

DetectedPlaneSet detect_planes_from_cloud(const PointCloud& cloud, const DetectorConfig& cfg) {
  cfg.validate();
  require_non_degenerate(cloud);
  const NormalizedCloud normalized = normalize_cloud(cloud);
  const KdTree index(normalized.cloud.points);
  DetectedPlaneSet set = detect_normalized(normalized.cloud, index, cfg, [&](const SymmetryPlane& plane) {
    return reflective_chamfer(normalized.cloud, index, plane);
  });
  to_input_frame(set, normalized.transform);
  return set;
}

} // namespace symm
