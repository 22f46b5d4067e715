#include "symm/aggregate.hpp"

#include "symm/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

namespace symm {

Mat3 ViewPose::rotation() const {
  const Mat3 rz = Eigen::AngleAxisd(deg_to_rad(azimuth_deg), Vec3::UnitZ()).toRotationMatrix();
  const Mat3 ry = Eigen::AngleAxisd(deg_to_rad(elevation_deg), Vec3::UnitY()).toRotationMatrix();
  return rz * ry;
}

std::vector<ViewPose> view_ring(std::size_t n, double elevation_deg) {
  std::vector<ViewPose> poses;
  for (std::size_t i = 0; i < n; ++i) {
    poses.push_back({360.0 * static_cast<double>(i) / static_cast<double>(n), elevation_deg});
  }
  return poses;
}

void AggregationConfig::validate() const {
  if (!(cluster_threshold_deg > 0.0 && cluster_threshold_deg < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "cluster_threshold_deg must be in (0, 90)");
  }
}

PredictionSet rotate_predictions(const PredictionSet& preds, const Mat3& rotation) {
  PredictionSet out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    // Rotation about the origin keeps n.x + d = 0 at the same offset.
    const UnitVector3 n(rotation * p.plane.normal().vec());
    out.push_back({SymmetryPlane(n, p.plane.offset()), p.confidence});
  }
  return out;
}

PredictionSet to_reference_frame(const PredictionSet& preds, const ViewPose& pose) {
  return rotate_predictions(preds, pose.rotation());
}

namespace {

constexpr double kCoreFraction = 1.0 / 3.0;

struct Item {
  Vec3 normal;  // canonical
  double offset;
  double confidence;
};

bool lex_less(const Item& a, const Item& b) {
  return std::tie(a.normal.x(), a.normal.y(), a.normal.z(), a.offset, a.confidence) <
         std::tie(b.normal.x(), b.normal.y(), b.normal.z(), b.offset, b.confidence);
}

double item_distance(const Item& a, const Item& b) {
  return geodesic_deg(UnitVector3(a.normal), UnitVector3(b.normal));
}

Vec3 spherical_center(const std::vector<Item>& items, const std::vector<std::size_t>& members) {
  double total = 0.0;
  for (std::size_t m : members) total += items[m].confidence;
  Mat3 scatter = Mat3::Zero();
  for (std::size_t m : members) {
    const double w = total > 0.0 ? items[m].confidence : 1.0;
    scatter += w * items[m].normal * items[m].normal.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  return canonical_plane_normal(UnitVector3(es.eigenvectors().col(2))).vec();
}

// Eigenvector centre re-estimated from the members near it, repeated until it
// settles, so that a stray member at the edge of a cluster does not drag the
// centre of a tight core.
Vec3 core_center(const std::vector<Item>& items, const std::vector<std::size_t>& members, double radius) {
  Vec3 c = spherical_center(items, members);
  for (int it = 0; it < 20; ++it) {
    std::vector<std::size_t> core;
    for (std::size_t m : members) {
      if (geodesic_deg(UnitVector3(c), UnitVector3(items[m].normal)) <= radius) core.push_back(m);
    }
    if (core.empty() || core.size() == members.size()) break;
    const Vec3 next = spherical_center(items, core);
    if (next == c) break;
    c = next;
  }
  return c;
}

// Average linkage over `subset`, merging while the closest pair of clusters is
// nearer than the threshold. Clusters are kept ordered by their first member,
// and ties go to the earliest pair, so the result depends only on the sorted
// item list.
std::vector<std::vector<std::size_t>> agglomerate(const std::vector<Item>& items,
                                                  const std::vector<std::size_t>& subset, double threshold) {
  const std::size_t n = subset.size();
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i : subset) clusters.push_back({i});
  std::vector<std::vector<double>> link(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      link[a][b] = link[b][a] = item_distance(items[subset[a]], items[subset[b]]);
    }
  }
  std::vector<bool> alive(n, true);
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!alive[b]) continue;
        const double avg = link[a][b] / static_cast<double>(clusters[a].size() * clusters[b].size());
        if (avg < best) {
          best = avg;
          ba = a;
          bb = b;
        }
      }
    }
    if (!(best < threshold)) break;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == ba || c == bb || !alive[c]) continue;
      link[ba][c] = link[c][ba] = link[ba][c] + link[bb][c];
    }
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    std::sort(clusters[ba].begin(), clusters[ba].end());
    alive[bb] = false;
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t a = 0; a < n; ++a) {
    if (alive[a]) out.push_back(std::move(clusters[a]));
  }
  return out;
}

// Clusters the subset, then peels off members farther than the threshold from
// their centre and clusters those again until every member is within range.
void cluster_recursive(const std::vector<Item>& items, const std::vector<std::size_t>& subset, double threshold,
                       std::vector<std::vector<std::size_t>>& out) {
  if (subset.empty()) return;
  std::vector<std::size_t> leftover;
  for (auto& members : agglomerate(items, subset, threshold)) {
    while (members.size() > 1) {
      const UnitVector3 c(core_center(items, members, kCoreFraction * threshold));
      std::vector<std::size_t> keep;
      for (std::size_t m : members) {
        if (geodesic_deg(c, UnitVector3(items[m].normal)) > threshold) {
          leftover.push_back(m);
        } else {
          keep.push_back(m);
        }
      }
      if (keep.size() == members.size()) break;
      members = std::move(keep);
    }
    if (!members.empty()) out.push_back(std::move(members));
  }
  std::sort(leftover.begin(), leftover.end());
  if (leftover.size() == subset.size()) {
    // No progress is impossible in practice; fall back to singletons.
    for (std::size_t m : leftover) out.push_back({m});
    return;
  }
  cluster_recursive(items, leftover, threshold, out);
}

} // namespace

std::vector<ClusteredPrediction> cluster_normals(std::span<const PredictionSet> all_preds,
                                                 const AggregationConfig& cfg) {
  cfg.validate();
  std::vector<Item> items;
  for (const auto& set : all_preds) {
    for (const auto& p : set) {
      if (p.confidence < cfg.confidence_floor) continue;
      items.push_back({p.plane.normal().vec(), p.plane.offset(), p.confidence});
    }
  }
  std::sort(items.begin(), items.end(), lex_less);

  std::vector<std::size_t> all(items.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> groups;
  cluster_recursive(items, all, cfg.cluster_threshold_deg, groups);

  std::vector<ClusteredPrediction> out;
  for (const auto& members : groups) {
    if (members.size() < cfg.min_cluster_size) continue;
    const Vec3 c = core_center(items, members, kCoreFraction * cfg.cluster_threshold_deg);
    double conf = 0.0, offset = 0.0, weight = 0.0;
    for (std::size_t m : members) {
      conf += items[m].confidence;
      const double sign = items[m].normal.dot(c) >= 0.0 ? 1.0 : -1.0;
      const double w = items[m].confidence > 0.0 ? items[m].confidence : 0.0;
      offset += w * sign * items[m].offset;
      weight += w;
    }
    if (weight > 0.0) {
      offset /= weight;
    } else {
      offset = 0.0;
      for (std::size_t m : members) offset += (items[m].normal.dot(c) >= 0.0 ? 1.0 : -1.0) * items[m].offset;
      offset /= static_cast<double>(members.size());
    }
    out.push_back({SymmetryPlane(UnitVector3(c), offset), members.size(),
                   conf / static_cast<double>(members.size())});
  }
  std::sort(out.begin(), out.end(), [](const ClusteredPrediction& a, const ClusteredPrediction& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.mean_confidence != b.mean_confidence) return a.mean_confidence > b.mean_confidence;
    const Vec3& na = a.plane.normal().vec();
    const Vec3& nb = b.plane.normal().vec();
    return std::tie(na.x(), na.y(), na.z()) < std::tie(nb.x(), nb.y(), nb.z());
  });
  return out;
}

std::vector<ClusteredPrediction> aggregate_views(std::span<const ViewPredictions> per_view,
                                                 const AggregationConfig& cfg) {
  if (per_view.empty()) throw Error(ErrorCode::InvalidArgument, "aggregate_views needs at least one view");
  std::vector<PredictionSet> reference;
  reference.reserve(per_view.size());
  for (const auto& v : per_view) reference.push_back(to_reference_frame(v.predictions, v.pose));
  return cluster_normals(reference, cfg);
}

} // namespace symm
