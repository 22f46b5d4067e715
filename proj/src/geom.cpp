#include "symm/geom.hpp"

#include "symm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace symm {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

UnitVector3::UnitVector3(const Vec3& v) {
  const double norm = v.norm();
  if (!std::isfinite(norm) || norm <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  v_ = v / norm;
}

namespace {

// Sign that makes the first significant component (in the given scan order)
// positive.
double canonical_sign(const Vec3& v, int a, int b, int c) {
  for (int i : {a, b, c}) {
    if (std::abs(v[i]) > kCanonicalEps) return v[i] > 0 ? 1.0 : -1.0;
  }
  return 1.0;
}

} // namespace

UnitVector3 canonical_plane_normal(const UnitVector3& n) {
  return UnitVector3(canonical_sign(n.v_, 0, 1, 2) * n.v_, UnitVector3::Trusted{});
}

UnitVector3 canonical_hemisphere(const UnitVector3& n) {
  return UnitVector3(canonical_sign(n.v_, 2, 1, 0) * n.v_, UnitVector3::Trusted{});
}

SymmetryPlane::SymmetryPlane(const UnitVector3& normal, double offset)
    : normal_(canonical_plane_normal(normal)), offset_(offset) {
  if (!std::isfinite(offset)) {
    throw Error(ErrorCode::InvalidArgument, "plane offset must be finite");
  }
  // Flipping the normal flips the offset: n.x + d = 0 <=> (-n).x - d = 0.
  if (!(normal_ == normal)) offset_ = -offset_;
}

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(norm) || norm <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite quaternion");
  }
  const double s = (w < 0.0 ? -1.0 : 1.0) / norm;
  w_ = w * s;
  x_ = x * s;
  y_ = y * s;
  z_ = z * s;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
  const Vec3 a = UnitVector3(axis).vec();
  const double h = 0.5 * angle_rad;
  const double s = std::sin(h);
  return {std::cos(h), a.x() * s, a.y() * s, a.z() * s};
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v)
  const Vec3 u(x_, y_, z_);
  const Vec3 t = 2.0 * u.cross(v);
  return v + w_ * t + u.cross(t);
}

Mat3 UnitQuaternion::to_matrix() const {
  return Eigen::Quaterniond(w_, x_, y_, z_).toRotationMatrix();
}

double UnitQuaternion::angle_deg() const {
  const double v = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
  return rad_to_deg(2.0 * std::atan2(v, w_));
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

bool RigidTransform::is_proper(double tol) const {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

ReflectionMatrix::ReflectionMatrix(const SymmetryPlane& plane) {
  const Vec3& n = plane.normal().vec();
  m_.setIdentity();
  m_.topLeftCorner<3, 3>() = Mat3::Identity() - 2.0 * n * n.transpose();
  m_.topRightCorner<3, 1>() = -2.0 * plane.offset() * n;
}

ReflectionMatrix reflection_matrix(const SymmetryPlane& plane) {
  return ReflectionMatrix(plane);
}

Vec3 reflect_point(const SymmetryPlane& plane, const Vec3& p) {
  const Vec3& n = plane.normal().vec();
  return p - 2.0 * plane.signed_distance(p) * n;
}

double geodesic_deg(const UnitVector3& u, const UnitVector3& v, bool sign_invariant) {
  const double theta = rad_to_deg(std::atan2(u.vec().cross(v.vec()).norm(), u.dot(v)));
  return sign_invariant ? std::min(theta, 180.0 - theta) : theta;
}

std::vector<UnitVector3> sample_hemisphere(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample_hemisphere needs n >= 1");
  if (n == 1) return {UnitVector3::unit_z()};

  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double count = static_cast<double>(n);
  std::vector<Vec3> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (static_cast<double>(i) + 0.5) / (count + 0.5);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / golden;
    pts[i] = Vec3(r * std::cos(phi), r * std::sin(phi), z);
  }

  // Repulsion on the projective plane: each pair interacts through whichever
  // of +p_j, -p_j is nearer, so antipodal neighbours across the equator push
  // apart too. Fixed iteration count and summation order keep it bitwise
  // reproducible.
  constexpr int kIterations = 50;
  const double spacing = std::sqrt(2.0 * std::numbers::pi / count);
  std::vector<Vec3> force(n);
  for (int it = 0; it < kIterations; ++it) {
    double max_force = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 f = Vec3::Zero();
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const Vec3 q = pts[i].dot(pts[j]) >= 0.0 ? pts[j] : Vec3(-pts[j]);
        const Vec3 d = pts[i] - q;
        const double d2 = d.squaredNorm();
        f += d / (d2 * d2);
      }
      f -= f.dot(pts[i]) * pts[i];
      force[i] = f;
      max_force = std::max(max_force, f.norm());
    }
    if (max_force <= 0.0) break;
    const double step = 0.1 * spacing * (1.0 - static_cast<double>(it) / kIterations) / max_force;
    for (std::size_t i = 0; i < n; ++i) {
      pts[i] += step * force[i];
      pts[i].normalize();
    }
  }

  std::vector<UnitVector3> out;
  out.reserve(n);
  for (const auto& p : pts) out.push_back(canonical_hemisphere(UnitVector3(p)));
  return out;
}

UnitVector3 rotate(const Mat3& rotation, const UnitVector3& v) {
  return UnitVector3(rotation * v.vec());
}

UnitVector3 apply_residual(const UnitVector3& hypothesis, const UnitQuaternion& q) {
  return canonical_hemisphere(UnitVector3(q.rotate(hypothesis.vec())));
}

UnitQuaternion shortest_arc(const UnitVector3& from, const UnitVector3& to) {
  const Vec3& a = from.vec();
  const Vec3& b = to.vec();
  const double d = a.dot(b);
  if (d <= -1.0 + 1e-15) {
    // Half turn about any axis perpendicular to `from`.
    Vec3 axis = a.cross(Vec3::UnitX());
    if (axis.squaredNorm() < 1e-12) axis = a.cross(Vec3::UnitY());
    axis.normalize();
    return {0.0, axis.x(), axis.y(), axis.z()};
  }
  const Vec3 c = a.cross(b);
  const double s = std::sqrt(2.0 * (1.0 + d));
  return {0.5 * s, c.x() / s, c.y() / s, c.z() / s};
}

} // namespace symm
