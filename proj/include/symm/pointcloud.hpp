#pragma once

#include "symm/geom.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace symm {

struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

struct BoundingSphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// p -> (p - center) * scale. Maps input coordinates into the normalized frame.
struct Similarity {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
  Vec3 invert(const Vec3& q) const { return q / scale + center; }
  // A plane given in the normalized frame, expressed in input coordinates.
  SymmetryPlane plane_to_input(const SymmetryPlane& normalized) const;
  SymmetryPlane plane_to_normalized(const SymmetryPlane& input) const;
};

// Ritter's approximate enclosing sphere; the growth pass guarantees every
// point is enclosed.
BoundingSphere ritter_bounding_sphere(std::span<const Vec3> points);

struct NormalizedMesh {
  TriMesh mesh;
  Similarity transform;
};

NormalizedMesh normalize_to_unit_sphere(const TriMesh& mesh);

struct NormalizedCloud {
  PointCloud cloud;
  Similarity transform;
};

// Centroid-centred, scaled so the farthest point sits on the unit sphere.
NormalizedCloud normalize_cloud(const PointCloud& cloud);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Area-weighted face choice, then uniform barycentric placement.
PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

PointCloud reflect_cloud(const PointCloud& cloud, const SymmetryPlane& plane);
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);
Vec3 centroid(std::span<const Vec3> points);

// Throws DegenerateCloud unless there are >= 3 points spanning at least a line
// with nonzero width (i.e. not all coincident or collinear).
void require_non_degenerate(const PointCloud& cloud);

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

// Exact nearest-neighbour search: a static kd-tree. Ties in distance resolve
// to the lowest point index, so results match a linear scan exactly.
class KdTree {
public:
  explicit KdTree(std::span<const Vec3> points);

  Neighbor nearest(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t original_index) const { return source_[original_index]; }

private:
  struct Node {
    Vec3 lo, hi;  // bounding box of the node's points
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;  // -1 marks a leaf
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, Neighbor& best) const;
  double box_squared_distance(const Node& node, const Vec3& q) const;

  std::vector<Vec3> source_;
  std::vector<Vec3> points_;          // reordered copy
  std::vector<std::uint32_t> index_;  // reordered -> original
  std::vector<Node> nodes_;
};

Neighbor nearest_linear_scan(std::span<const Vec3> points, const Vec3& query);

// Symmetric mean of unsquared nearest-neighbour distances.
double chamfer(const PointCloud& a, const PointCloud& b);

// chamfer(cloud, reflect_cloud(cloud, plane)). Reflection is an isometry, so
// both directed terms equal mean_x dist(M x, cloud) and one pass suffices.
double reflective_chamfer(const PointCloud& cloud, const KdTree& index, const SymmetryPlane& plane);
double reflective_chamfer(const PointCloud& cloud, const SymmetryPlane& plane);
// Estimate from a deterministic stride subsample of at most max_points
// reflected points (0 = all), still queried against the full index.
double reflective_chamfer(const PointCloud& cloud, const KdTree& index, const SymmetryPlane& plane,
                          std::size_t max_points);

// Exact point-to-surface distance queries over a triangle mesh (AABB tree).
class TriangleIndex {
public:
  explicit TriangleIndex(const TriMesh& mesh);

  double distance(const Vec3& query) const;

private:
  struct Box {
    Vec3 lo, hi;
    double squared_distance(const Vec3& p) const;
  };
  struct Node {
    Box box;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, double& best) const;

  std::vector<std::array<Vec3, 3>> tris_;
  std::vector<Node> nodes_;
};

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Mean distance from reflected samples to the mesh surface. For samples of
// the surface this is the reflective residual without the sampling-noise
// floor of point-to-point Chamfer.
double reflective_surface_residual(const PointCloud& samples, const TriangleIndex& surface,
                                   const SymmetryPlane& plane);

} // namespace symm
