#include "symm/pointcloud.hpp"

#include "symm/error.hpp"
#include "symm/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace symm {

SymmetryPlane Similarity::plane_to_input(const SymmetryPlane& normalized) const {
  const UnitVector3& n = normalized.normal();
  return {n, normalized.offset() / scale - n.vec().dot(center)};
}

SymmetryPlane Similarity::plane_to_normalized(const SymmetryPlane& input) const {
  const UnitVector3& n = input.normal();
  return {n, scale * (n.vec().dot(center) + input.offset())};
}

BoundingSphere ritter_bounding_sphere(std::span<const Vec3> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyMesh, "bounding sphere of an empty point set");

  auto farthest_from = [&](const Vec3& from) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = (points[i] - from).squaredNorm();
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };

  const Vec3& y = points[farthest_from(points[0])];
  const Vec3& z = points[farthest_from(y)];
  BoundingSphere s{0.5 * (y + z), 0.5 * (y - z).norm()};

  for (const auto& p : points) {
    const double d = (p - s.center).norm();
    if (d > s.radius) {
      const double r = 0.5 * (s.radius + d);
      s.center += (d - r) / d * (p - s.center);
      s.radius = r;
    }
  }
  // Round-off in the growth step can leave a point a few ulps outside.
  double max_d = 0.0;
  for (const auto& p : points) max_d = std::max(max_d, (p - s.center).norm());
  s.radius = std::max(s.radius, max_d);
  return s;
}

NormalizedMesh normalize_to_unit_sphere(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no vertices");
  const BoundingSphere s = ritter_bounding_sphere(mesh.vertices);
  if (!(s.radius > 1e-12)) {
    throw Error(ErrorCode::DegenerateBoundingSphere, "mesh bounding sphere has zero radius");
  }
  NormalizedMesh out;
  out.transform = {s.center, 1.0 / s.radius};
  out.mesh.faces = mesh.faces;
  out.mesh.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.mesh.vertices.push_back(out.transform.apply(v));
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

NormalizedCloud normalize_cloud(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot normalize an empty cloud");
  const Vec3 c = centroid(cloud.points);
  double r = 0.0;
  for (const auto& p : cloud.points) r = std::max(r, (p - c).norm());
  if (!(r > 1e-12)) throw Error(ErrorCode::DegenerateCloud, "all points coincide");
  NormalizedCloud out;
  out.transform = {c, 1.0 / r};
  out.cloud.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.cloud.points.push_back(out.transform.apply(p));
  return out;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const auto nv = mesh.vertices.size();
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    if (f[0] >= nv || f[1] >= nv || f[2] >= nv) {
      throw Error(ErrorCode::InvalidArgument, "face index out of range");
    }
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::NoArea, "mesh has no face with positive area");

  Rng rng(seed, streams::kSurfaceSampling);
  PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto& f = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    out.points.push_back((1.0 - r1) * mesh.vertices[f[0]] + r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                         r1 * r2 * mesh.vertices[f[2]]);
  }
  return out;
}

PointCloud reflect_cloud(const PointCloud& cloud, const SymmetryPlane& plane) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot reflect an empty cloud");
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(reflect_point(plane, p));
  return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

void require_non_degenerate(const PointCloud& cloud) {
  if (cloud.size() < 3) {
    throw Error(ErrorCode::DegenerateCloud,
                "need at least 3 points, got " + std::to_string(cloud.size()));
  }
  const Vec3 c = centroid(cloud.points);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : cloud.points) cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(cloud.size());
  const Eigen::SelfAdjointEigenSolver<Mat3> es(cov, Eigen::EigenvaluesOnly);
  const Vec3 ev = es.eigenvalues();  // ascending
  if (!(ev[2] > 1e-24) || ev[1] <= 1e-12 * ev[2]) {
    throw Error(ErrorCode::DegenerateCloud, "points are coincident or collinear");
  }
}

// --- KdTree ---------------------------------------------------------------

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(std::span<const Vec3> points)
    : source_(points.begin(), points.end()), points_(points.begin(), points.end()) {
  if (points.empty()) throw Error(ErrorCode::EmptyCloud, "cannot index an empty cloud");
  index_.resize(points.size());
  std::iota(index_.begin(), index_.end(), 0u);
  nodes_.reserve(2 * points.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(points.size()));
  std::vector<Vec3> reordered(points_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) reordered[i] = source_[index_[i]];
  points_ = std::move(reordered);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(source_[index_[i]]);
    hi = hi.cwiseMax(source_[index_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (!(hi[axis] > lo[axis])) return id;  // all coincident: keep as leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = source_[a][axis], cb = source_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::box_squared_distance(const Node& node, const Vec3& q) const {
  return (node.lo - q).cwiseMax(q - node.hi).cwiseMax(0.0).squaredNorm();
}

// Children are visited nearest box first; a box is skipped only when it is
// strictly farther than the best hit, so equal-distance points with a lower
// index are still found.
void KdTree::search(std::int32_t node_id, const Vec3& q, Neighbor& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = (points_[i] - q).squaredNorm();
      const std::size_t original = index_[i];
      if (d < best.squared_distance || (d == best.squared_distance && original < best.index)) {
        best = {original, d};
      }
    }
    return;
  }
  const double dl = box_squared_distance(nodes_[node.left], q);
  const double dr = box_squared_distance(nodes_[node.right], q);
  const bool left_first = dl <= dr;
  const std::int32_t first = left_first ? node.left : node.right;
  const std::int32_t second = left_first ? node.right : node.left;
  if ((left_first ? dl : dr) <= best.squared_distance) search(first, q, best);
  if ((left_first ? dr : dl) <= best.squared_distance) search(second, q, best);
}

Neighbor KdTree::nearest(const Vec3& query) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

Neighbor nearest_linear_scan(std::span<const Vec3> points, const Vec3& query) {
  Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - query).squaredNorm();
    if (d < best.squared_distance) best = {i, d};
  }
  return best;
}

namespace {

double mean_nn_distance(std::span<const Vec3> from, const KdTree& to) {
  double sum = 0.0;
  for (const auto& p : from) sum += std::sqrt(to.nearest(p).squared_distance);
  return sum / static_cast<double>(from.size());
}

} // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCloud, "chamfer of an empty cloud");
  const KdTree ta(a.points), tb(b.points);
  return 0.5 * (mean_nn_distance(a.points, tb) + mean_nn_distance(b.points, ta));
}

double reflective_chamfer(const PointCloud& cloud, const KdTree& index, const SymmetryPlane& plane) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "chamfer of an empty cloud");
  double sum = 0.0;
  for (const auto& p : cloud.points) {
    sum += std::sqrt(index.nearest(reflect_point(plane, p)).squared_distance);
  }
  return sum / static_cast<double>(cloud.size());
}

double reflective_chamfer(const PointCloud& cloud, const KdTree& index, const SymmetryPlane& plane,
                          std::size_t max_points) {
  const std::size_t n = cloud.size();
  if (max_points == 0 || n <= max_points) return reflective_chamfer(cloud, index, plane);
  double sum = 0.0;
  for (std::size_t k = 0; k < max_points; ++k) {
    sum += std::sqrt(index.nearest(reflect_point(plane, cloud.points[k * n / max_points])).squared_distance);
  }
  return sum / static_cast<double>(max_points);
}

double reflective_chamfer(const PointCloud& cloud, const SymmetryPlane& plane) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "chamfer of an empty cloud");
  return reflective_chamfer(cloud, KdTree(cloud.points), plane);
}

// --- TriangleIndex -----------------------------------------------------------

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection, 5.1.5).
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + d1 / (d1 - d3) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + d2 / (d2 - d6) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
  }

  const double denom = va + vb + vc;
  if (!(std::abs(denom) > 0.0)) return a;  // zero-area triangle collapsed to a point
  return a + ab * (vb / denom) + ac * (vc / denom);
}

double TriangleIndex::Box::squared_distance(const Vec3& p) const {
  const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
  return d.squaredNorm();
}

TriangleIndex::TriangleIndex(const TriMesh& mesh) {
  const auto nv = mesh.vertices.size();
  for (const auto& f : mesh.faces) {
    if (f[0] >= nv || f[1] >= nv || f[2] >= nv) {
      throw Error(ErrorCode::InvalidArgument, "face index out of range");
    }
    tris_.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]});
  }
  if (tris_.empty()) throw Error(ErrorCode::NoArea, "mesh has no faces");
  nodes_.reserve(2 * tris_.size());
  build(0, static_cast<std::uint32_t>(tris_.size()));
}

std::int32_t TriangleIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Box box{Vec3::Constant(std::numeric_limits<double>::infinity()),
          Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (std::uint32_t i = begin; i < end; ++i) {
    for (const auto& v : tris_[i]) {
      box.lo = box.lo.cwiseMin(v);
      box.hi = box.hi.cwiseMax(v);
    }
  }
  nodes_[id].box = box;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= 4) return id;

  int axis = 0;
  (box.hi - box.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  auto centroid_key = [axis](const std::array<Vec3, 3>& t) { return t[0][axis] + t[1][axis] + t[2][axis]; };
  std::nth_element(tris_.begin() + begin, tris_.begin() + mid, tris_.begin() + end,
                   [&](const auto& a, const auto& b) { return centroid_key(a) < centroid_key(b); });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void TriangleIndex::search(std::int32_t node_id, const Vec3& q, double& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const auto& t = tris_[i];
      best = std::min(best, (closest_point_on_triangle(q, t[0], t[1], t[2]) - q).squaredNorm());
    }
    return;
  }
  const double dl = nodes_[node.left].box.squared_distance(q);
  const double dr = nodes_[node.right].box.squared_distance(q);
  const bool left_first = dl <= dr;
  const std::int32_t first = left_first ? node.left : node.right;
  const std::int32_t second = left_first ? node.right : node.left;
  if ((left_first ? dl : dr) <= best) search(first, q, best);
  if ((left_first ? dr : dl) <= best) search(second, q, best);
}

double TriangleIndex::distance(const Vec3& query) const {
  double best = std::numeric_limits<double>::infinity();
  search(0, query, best);
  return std::sqrt(best);
}

double reflective_surface_residual(const PointCloud& samples, const TriangleIndex& surface,
                                   const SymmetryPlane& plane) {
  if (samples.empty()) throw Error(ErrorCode::EmptyCloud, "no samples");
  double sum = 0.0;
  for (const auto& p : samples.points) sum += surface.distance(reflect_point(plane, p));
  return sum / static_cast<double>(samples.size());
}

} // namespace symm
