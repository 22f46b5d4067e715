#include "support.hpp"

#include "symm/error.hpp"
#include "symm/registration.hpp"

#include <doctest.h>

#include <random>

using namespace symm;
using namespace symm::test;

namespace {

double rotation_error_deg(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

// Irregular blob without mirror or rotational symmetry.
PointCloud blob(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::uniform_real_distribution<double>(0, 1)(rng);
    c.points.emplace_back(0.6 * t + 0.05 * g(rng), 0.3 * t * t + 0.08 * g(rng), 0.15 * std::sin(4 * t) + 0.04 * g(rng));
  }
  return c;
}

SymmetryPlane tilt(const SymmetryPlane& p, double deg, const Vec3& axis_hint = Vec3::UnitZ()) {
  Vec3 axis = p.normal().vec().cross(axis_hint);
  if (axis.norm() < 1e-6) axis = p.normal().vec().cross(Vec3::UnitX());
  const Mat3 r = Eigen::AngleAxisd(deg_to_rad(deg), axis.normalized()).toRotationMatrix();
  return {rotate(r, p.normal()), p.offset()};
}

} // namespace

TEST_CASE("icp config validation") {
  CHECK_THROWS_AS(icp_register(blob(50, 1), blob(50, 1), IcpConfig{.max_iterations = 0}), Error);
  CHECK_THROWS_AS(icp_register(blob(50, 1), blob(50, 1), IcpConfig{.convergence_eps = 0.0}), Error);
  CHECK_THROWS_AS(icp_register(blob(50, 1), blob(50, 1), IcpConfig{.trim_fraction = 1.0}), Error);
}

TEST_CASE("kabsch recovers an exact rigid motion") {
  std::mt19937_64 rng(47);
  const PointCloud a = blob(100, 2);
  const RigidTransform t{random_rotation(rng), random_point(rng)};
  const PointCloud b = transform_cloud(a, t);
  const RigidTransform k = kabsch(a.points, b.points);
  CHECK((k.rotation - t.rotation).norm() < 1e-9);
  CHECK((k.translation - t.translation).norm() < 1e-9);
  CHECK(k.is_proper());
}

TEST_CASE("icp of a cloud onto itself is the identity") {
  const PointCloud a = blob(500, 3);
  const IcpResult r = icp_register(a, a);
  CHECK(r.converged);
  CHECK(r.iterations_used == 1);
  CHECK(r.final_mean_distance < 1e-12);
  CHECK((r.transform.rotation - Mat3::Identity()).norm() < 1e-9);
  CHECK(r.transform.translation.norm() < 1e-9);
}

TEST_CASE("icp recovers a small rigid motion") {
  const PointCloud target = blob(2000, 4);
  // source = T^-1(target) so that T maps source onto target
  const RigidTransform t{Eigen::AngleAxisd(deg_to_rad(5.0), Vec3::UnitZ()).toRotationMatrix(), Vec3(0.01, 0, 0)};
  const PointCloud source = transform_cloud(target, t.inverse());
  const IcpResult r = icp_register(source, target);
  CHECK(rotation_error_deg(r.transform.rotation, t.rotation) < 0.1);
  CHECK((r.transform.translation - t.translation).norm() < 1e-3);
  CHECK(r.transform.is_proper());

  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
  }
}

TEST_CASE("trimming rejects injected outliers") {
  const PointCloud target = blob(2000, 5);
  const RigidTransform t{Eigen::AngleAxisd(deg_to_rad(5.0), Vec3(0.2, 0.3, 1).normalized()).toRotationMatrix(),
                         Vec3(0.01, -0.01, 0)};
  PointCloud source = transform_cloud(target, t.inverse());
  // 20% extra points in a clump off to one side.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int i = 0; i < 400; ++i) source.points.push_back(Vec3(0.3, 0.9, 0.4) + 0.05 * Vec3(g(rng), g(rng), g(rng)));

  const IcpResult plain = icp_register(source, target);
  const IcpResult trimmed = icp_register(source, target, IcpConfig{.trim_fraction = 0.2});
  const double plain_err = rotation_error_deg(plain.transform.rotation, t.rotation);
  const double trimmed_err = rotation_error_deg(trimmed.transform.rotation, t.rotation);
  MESSAGE("rotation error: untrimmed " << plain_err << " deg, trimmed " << trimmed_err << " deg");
  CHECK(trimmed_err < 1.0);
  CHECK(plain_err > 1.0);
}

TEST_CASE("icp rejects collinear input") {
  const PointCloud line{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}};
  try {
    icp_register(line, blob(50, 1));
    FAIL("expected DegenerateCloud");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCloud);
  }
}

TEST_CASE("mirror plane fit from exact pairs") {
  const SymmetryPlane p(UnitVector3(0.2, -0.5, 0.8), 0.1);
  const PointCloud c = mirrored_cloud(100, p, 7);
  const PointCloud r = reflect_cloud(c, p);
  const auto fit = fit_mirror_plane(c.points, r.points);
  REQUIRE(fit);
  CHECK(geodesic_deg(fit->normal(), p.normal()) < 1e-9);
  CHECK(fit->offset() == doctest::Approx(p.offset()).epsilon(1e-9));
  CHECK_FALSE(fit_mirror_plane(c.points, c.points));
}

TEST_CASE("refining the exact plane keeps it") {
  const SymmetryPlane truth(UnitVector3::unit_x(), 0.0);
  const PointCloud c = mirrored_cloud(2000, truth, 8);
  const RefineResult r = refine_plane(c, truth);
  CHECK(r.status == RefineStatus::Refined);
  CHECK((r.plane.normal().vec() - truth.normal().vec()).norm() < 1e-6);
  CHECK(std::abs(r.plane.offset()) < 1e-6);
  CHECK(r.residual < 1e-6);
}

TEST_CASE("refinement recovers a tilted plane") {
  const SymmetryPlane truth(UnitVector3::unit_x(), 0.0);
  const PointCloud c = mirrored_cloud(2000, truth, 9);
  for (const Vec3& axis : std::vector<Vec3>{Vec3::UnitZ(), Vec3::UnitY(), Vec3(0, 1, 1)}) {
    const RefineResult r = refine_plane(c, tilt(truth, 10.0, axis));
    CHECK(geodesic_deg(r.plane.normal(), truth.normal()) < 0.5);
    CHECK(r.rounds <= kMaxRefineRounds);
    CHECK(r.residual <= r.initial_residual);
  }
}

TEST_CASE("cube samples refine onto the nearest cube plane") {
  const PointCloud s = sample_surface(cube_mesh(), 20000, 10);
  const SymmetryPlane start = tilt(SymmetryPlane(UnitVector3(1, 1, 0), 0.0), 8.0, Vec3(0, 0.3, 1));
  const RefineResult r = refine_plane(s, start);
  CHECK(geodesic_deg(r.plane.normal(), UnitVector3(1, 1, 0)) < 0.5);
  CHECK(std::abs(r.plane.offset()) < 0.01);
}

TEST_CASE("refinement never increases the residual") {
  std::mt19937_64 rng(53);
  int diverged = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const PointCloud c = blob(800, 100 + trial);
    const SymmetryPlane start(random_unit(rng), -0.3 * std::uniform_real_distribution<double>()(rng));
    const RefineResult r = refine_plane(c, start);
    CHECK(r.residual <= r.initial_residual);
    if (r.status == RefineStatus::Diverged) {
      ++diverged;
      CHECK(r.plane == start);
      CHECK(r.residual == r.initial_residual);
    }
  }
  MESSAGE("diverged refinements: " << diverged);
}

TEST_CASE("refinement is rotation equivariant") {
  std::mt19937_64 rng(59);
  const SymmetryPlane truth(UnitVector3(0.3, 0.1, 0.9), 0.05);
  const PointCloud c = mirrored_cloud(1500, truth, 11);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat3 rot = random_rotation(rng);
    const SymmetryPlane start = tilt(truth, 6.0, Vec3(1, 0, 0));
    const RefineResult a = refine_plane(c, start);
    const RefineResult b = refine_plane(transform_cloud(c, {rot, Vec3::Zero()}),
                                        SymmetryPlane(rotate(rot, start.normal()), start.offset()));
    const SymmetryPlane expected(rotate(rot, a.plane.normal()), a.plane.offset());
    CHECK((b.plane.normal().vec() - expected.normal().vec()).norm() < 1e-5);
    CHECK(b.plane.offset() == doctest::Approx(expected.offset()).epsilon(1e-5));
  }
}

TEST_CASE("symmetric cloud refines to a tiny residual") {
  const SymmetryPlane truth(UnitVector3(1, 2, 0.5), -0.2);
  const PointCloud c = mirrored_cloud(2500, truth, 12);
  const RefineResult r = refine_plane(c, tilt(truth, 3.0));
  CHECK(r.residual < 1e-6);
}
