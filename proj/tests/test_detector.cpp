#include "support.hpp"

#include "symm/detector.hpp"
#include "symm/error.hpp"

#include <doctest.h>

#include <random>

using namespace symm;
using namespace symm::test;

namespace {

std::vector<UnitVector3> normals(const DetectedPlaneSet& s) {
  std::vector<UnitVector3> out;
  for (const auto& p : s.planes) out.push_back(p.plane.normal());
  return out;
}

int count_within(const DetectedPlaneSet& s, const UnitVector3& n, double deg) {
  int c = 0;
  for (const auto& p : s.planes) c += geodesic_deg(p.plane.normal(), n) < deg;
  return c;
}

TriMesh transformed(const TriMesh& m, const Mat3& r, const Vec3& t) {
  TriMesh out = m;
  for (auto& v : out.vertices) v = r * v + t;
  return out;
}

} // namespace

TEST_CASE("config validation") {
  DetectorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_candidates = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.chamfer_gate = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.coarse_points = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("unit cube") {
  const DetectedPlaneSet s = detect_planes(cube_mesh());
  for (const auto& n : cube_axis_normals()) CHECK(count_within(s, n, 1.0) == 1);
  for (const auto& p : s.planes) {
    CHECK(p.residual < 1e-3);
    CHECK(p.chamfer <= DetectorConfig{}.chamfer_gate);
    CHECK(p.score == doctest::Approx(std::exp(-p.residual / DetectorConfig{}.chamfer_gate)));
    // Every plane passes through the cube centre.
    CHECK(std::abs(p.plane.offset()) < 1e-3);
  }
  for (std::size_t i = 1; i < s.planes.size(); ++i) CHECK(s.planes[i - 1].residual <= s.planes[i].residual);
  CHECK_FALSE(s.ubiquitous);
}

TEST_CASE("offset cube reports planes in input coordinates") {
  const Vec3 c(3.0, -1.0, 2.0);
  const DetectedPlaneSet s = detect_planes(cube_mesh(2.0, c));
  REQUIRE(count_within(s, UnitVector3::unit_x(), 1.0) == 1);
  for (const auto& p : s.planes) CHECK(std::abs(p.plane.signed_distance(c)) < 5e-3);
}

TEST_CASE("L-shaped prism") {
  const DetectedPlaneSet s = detect_planes(l_prism());
  CHECK(count_within(s, UnitVector3(1, -1, 0), 1.0) == 1);
  CHECK(count_within(s, UnitVector3::unit_x(), 5.0) == 0);
  CHECK(count_within(s, UnitVector3::unit_y(), 5.0) == 0);
  CHECK(count_within(s, UnitVector3(1, 1, 0), 5.0) == 0);
}

TEST_CASE("scalene tetrahedron has no symmetry") {
  const DetectedPlaneSet s = detect_planes(scalene_tetrahedron());
  CHECK(s.planes.empty());
  CHECK_FALSE(s.ubiquitous);
}

TEST_CASE("mirrored cloud recovers its plane") {
  std::mt19937_64 rng(131);
  for (int i = 0; i < 5; ++i) {
    const SymmetryPlane truth(random_unit(rng), 0.2);
    const DetectedPlaneSet s = detect_planes_from_cloud(mirrored_cloud(2500, truth, 150 + i));
    REQUIRE_FALSE(s.planes.empty());
    CHECK(geodesic_deg(s.planes[0].plane.normal(), truth.normal()) < 0.5);
    CHECK(std::abs(s.planes[0].plane.signed_distance(-truth.offset() * truth.normal().vec())) < 1e-3);
  }
}

TEST_CASE("degenerate input") {
  PointCloud line;
  for (int i = 0; i < 10; ++i) line.points.emplace_back(i, 2 * i, 0);
  try {
    detect_planes_from_cloud(line);
    FAIL("expected DegenerateCloud");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCloud);
  }
  CHECK_THROWS_AS(detect_planes(TriMesh{}), Error);
}

TEST_CASE("sphere is flagged ubiquitous") {
  const DetectedPlaneSet s = detect_planes_from_cloud(sphere_cloud(20000));
  CHECK(s.ubiquitous);
}

TEST_CASE("tighter gate keeps a subset") {
  DetectorConfig loose, tight;
  loose.n_points = tight.n_points = 20000;
  tight.chamfer_gate = 0.004;
  const auto a = detect_planes(l_prism(), loose, 3);
  const auto b = detect_planes(l_prism(), tight, 3);
  CHECK(b.planes.size() <= a.planes.size());
  for (const auto& p : b.planes) CHECK(count_within(a, p.plane.normal(), 1e-6) == 1);
}

TEST_CASE("rotation equivariance") {
  std::mt19937_64 rng(137);
  DetectorConfig cfg;
  cfg.n_points = 20000;
  const auto base = detect_planes(l_prism(), cfg, 1);
  for (int i = 0; i < 3; ++i) {
    const Mat3 r = random_rotation(rng);
    const auto s = detect_planes(transformed(l_prism(), r, random_point(rng)), cfg, 1);
    REQUIRE(s.planes.size() == base.planes.size());
    for (const auto& n : normals(base)) CHECK(count_within(s, rotate(r, n), 1.0) == 1);
  }
}

TEST_CASE("determinism across runs and thread counts") {
  DetectorConfig one, four;
  one.n_points = four.n_points = 20000;
  four.threads = 4;
  const auto a = detect_planes(cube_mesh(), one, 9);
  const auto b = detect_planes(cube_mesh(), one, 9);
  const auto c = detect_planes(cube_mesh(), four, 9);
  REQUIRE(a.planes.size() == b.planes.size());
  REQUIRE(a.planes.size() == c.planes.size());
  for (std::size_t i = 0; i < a.planes.size(); ++i) {
    CHECK(a.planes[i].plane == b.planes[i].plane);
    CHECK(a.planes[i].plane == c.planes[i].plane);
    CHECK(a.planes[i].residual == c.planes[i].residual);
  }
}
