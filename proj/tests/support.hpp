#pragma once

#include "symm/geom.hpp"
#include "symm/pointcloud.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace symm::test {

inline TriMesh cube_mesh(double half = 0.5, const Vec3& center = Vec3::Zero()) {
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(center + half * Vec3(2 * (i & 1) - 1, 2 * ((i >> 1) & 1) - 1, 2 * ((i >> 2) & 1) - 1));
  }
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({std::uint32_t(q[0]), std::uint32_t(q[1]), std::uint32_t(q[2])});
    m.faces.push_back({std::uint32_t(q[0]), std::uint32_t(q[2]), std::uint32_t(q[3])});
  }
  return m;
}

// The 9 mirror planes of an axis-aligned cube: 3 axis, 6 diagonal.
inline std::vector<UnitVector3> cube_axis_normals() {
  return {UnitVector3::unit_x(), UnitVector3::unit_y(), UnitVector3::unit_z()};
}

inline std::vector<UnitVector3> cube_diagonal_normals() {
  return {UnitVector3(1, 1, 0), UnitVector3(1, -1, 0), UnitVector3(1, 0, 1),
          UnitVector3(1, 0, -1), UnitVector3(0, 1, 1), UnitVector3(0, 1, -1)};
}

inline TriMesh tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return {{a, b, c, d}, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}}};
}

inline TriMesh scalene_tetrahedron() {
  return tetrahedron({0, 0, 0}, {2, 0, 0}, {0.3, 1.1, 0}, {1.4, 0.5, 0.7});
}

// L-shaped outline with equal arms, extruded along z. Mirror planes: the
// x = y bisector and the mid-height plane.
inline TriMesh l_prism(double height = 0.6) {
  const double pts[6][2] = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  TriMesh m;
  for (double z : {0.0, height}) {
    for (const auto& p : pts) m.vertices.emplace_back(p[0], p[1], z);
  }
  const std::uint32_t caps[4][3] = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}};
  for (const auto& c : caps) {
    m.faces.push_back({c[0], c[2], c[1]});
    m.faces.push_back({c[0] + 6, c[1] + 6, c[2] + 6});
  }
  for (std::uint32_t i = 0; i < 6; ++i) {
    const std::uint32_t j = (i + 1) % 6;
    m.faces.push_back({i, j, j + 6});
    m.faces.push_back({i, j + 6, i + 6});
  }
  return m;
}

inline UnitVector3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  while (true) {
    const Vec3 v(g(rng), g(rng), g(rng));
    if (v.norm() > 1e-6) return UnitVector3(v);
  }
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_point(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// Half cloud on the positive side of the plane, irregular enough that the
// plane is its only symmetry, united with its mirror image.
inline PointCloud mirrored_cloud(std::size_t n_half, const SymmetryPlane& plane, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const Vec3 n = plane.normal().vec();
  const Vec3 origin = -plane.offset() * n;
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = n.cross(helper).normalized();
  const Vec3 v = n.cross(u);
  PointCloud half;
  while (half.size() < n_half) {
    // Skewed blob: lobes of different size and spread.
    const int lobe = static_cast<int>(rng() % 3);
    const double sx[3] = {0.25, 0.12, 0.08};
    const Vec3 c[3] = {{0.35, 0.0, 0.0}, {0.2, 0.45, -0.1}, {0.5, -0.3, 0.35}};
    const Vec3 local = c[lobe] + sx[lobe] * Vec3(g(rng), 1.6 * g(rng), 0.7 * g(rng));
    if (local.x() <= 0.02) continue;
    half.points.push_back(origin + local.x() * n + local.y() * u + local.z() * v);
  }
  PointCloud out = half;
  for (const Vec3& p : half.points) out.points.push_back(reflect_point(plane, p));
  return out;
}

// Fibonacci points on a sphere.
inline PointCloud sphere_cloud(std::size_t n, double radius = 1.0) {
  PointCloud c;
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z);
    const double phi = 2.0 * M_PI * static_cast<double>(i) / golden;
    c.points.emplace_back(radius * r * std::cos(phi), radius * r * std::sin(phi), radius * z);
  }
  return c;
}

inline double min_geodesic_to(const UnitVector3& n, const std::vector<UnitVector3>& set) {
  double best = 180.0;
  for (const auto& s : set) best = std::min(best, geodesic_deg(n, s));
  return best;
}

} // namespace symm::test
