#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <vector>

namespace symm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kCanonicalEps = 1e-9;

double deg_to_rad(double deg);
double rad_to_deg(double rad);

// Direction on the unit sphere. Always constructed through normalization.
class UnitVector3 {
public:
  // Normalizes v; throws InvalidArgument on zero-length or non-finite input.
  explicit UnitVector3(const Vec3& v);
  UnitVector3(double x, double y, double z) : UnitVector3(Vec3(x, y, z)) {}

  static UnitVector3 unit_x() { return UnitVector3(1, 0, 0); }
  static UnitVector3 unit_y() { return UnitVector3(0, 1, 0); }
  static UnitVector3 unit_z() { return UnitVector3(0, 0, 1); }

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Vec3& vec() const { return v_; }
  double dot(const UnitVector3& o) const { return v_.dot(o.v_); }

  UnitVector3 operator-() const { return UnitVector3(-v_, Trusted{}); }

  bool operator==(const UnitVector3& o) const { return v_ == o.v_; }

private:
  struct Trusted {};
  UnitVector3(const Vec3& v, Trusted) : v_(v) {}
  friend UnitVector3 canonical_plane_normal(const UnitVector3&);
  friend UnitVector3 canonical_hemisphere(const UnitVector3&);

  Vec3 v_;
};

// Antipodal representatives. A plane normal is canonical when its first
// component with magnitude > 1e-9, scanning x, y, z, is positive. The
// hemisphere representative scans z, y, x instead, so that hypothesis and
// candidate normals live on z >= 0.
UnitVector3 canonical_plane_normal(const UnitVector3& n);
UnitVector3 canonical_hemisphere(const UnitVector3& n);

// Plane {x : n.x + d = 0}, stored with a canonical normal.
class SymmetryPlane {
public:
  SymmetryPlane(const UnitVector3& normal, double offset);

  const UnitVector3& normal() const { return normal_; }
  double offset() const { return offset_; }
  double signed_distance(const Vec3& p) const { return normal_.vec().dot(p) + offset_; }

  bool operator==(const SymmetryPlane&) const = default;

private:
  UnitVector3 normal_;
  double offset_;
};

class UnitQuaternion {
public:
  // Normalizes and folds the double cover to w >= 0.
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion identity() { return {1, 0, 0, 0}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  Vec3 rotate(const Vec3& v) const;
  Mat3 to_matrix() const;
  // Rotation angle in degrees, in [0, 180].
  double angle_deg() const;

private:
  double w_, x_, y_, z_;
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  // (this * other)(p) == this->apply(other.apply(p))
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;
  bool is_proper(double tol = 1e-7) const;
};

// Homogeneous reflection [I - 2nn^T, -2dn; 0, 1].
class ReflectionMatrix {
public:
  explicit ReflectionMatrix(const SymmetryPlane& plane);

  const Mat4& matrix() const { return m_; }
  Mat3 linear() const { return m_.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return m_.topRightCorner<3, 1>(); }
  Vec3 apply(const Vec3& p) const { return linear() * p + translation(); }

private:
  Mat4 m_;
};

ReflectionMatrix reflection_matrix(const SymmetryPlane& plane);
Vec3 reflect_point(const SymmetryPlane& plane, const Vec3& p);

// Angle between two directions in degrees. With sign_invariant set the
// result is min(theta, 180 - theta), since n and -n describe one plane.
double geodesic_deg(const UnitVector3& u, const UnitVector3& v, bool sign_invariant = true);

// n deterministic, near equal-area directions on the z >= 0 hemisphere:
// a spherical-Fibonacci seed relaxed by projective-plane repulsion.
std::vector<UnitVector3> sample_hemisphere(std::size_t n);

UnitVector3 rotate(const Mat3& rotation, const UnitVector3& v);

// Rotates a hypothesis by q and returns the hemisphere representative.
UnitVector3 apply_residual(const UnitVector3& hypothesis, const UnitQuaternion& q);

// Shortest-arc rotation carrying `from` onto `to`.
UnitQuaternion shortest_arc(const UnitVector3& from, const UnitVector3& to);

} // namespace symm
