#include "support.hpp"

#include "symm/error.hpp"
#include "symm/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace symm;
using namespace symm::test;

namespace {

struct Oracle {
  std::vector<double> p, r;
  double theta_p, theta_r;
};

// Direct O(n*m) evaluation of the nearest-match definitions.
Oracle brute(const std::vector<UnitVector3>& pred, const std::vector<UnitVector3>& gt,
             const std::vector<double>& thresholds) {
  Oracle o;
  std::vector<double> dp, dr;
  for (const auto& u : pred) {
    double best = 1e9;
    for (const auto& v : gt) best = std::min(best, rad_to_deg(std::acos(std::min(1.0, std::abs(u.dot(v))))));
    dp.push_back(best);
  }
  for (const auto& v : gt) {
    double best = 1e9;
    for (const auto& u : pred) best = std::min(best, rad_to_deg(std::acos(std::min(1.0, std::abs(u.dot(v))))));
    dr.push_back(best);
  }
  for (double phi : thresholds) {
    o.p.push_back(double(std::count_if(dp.begin(), dp.end(), [&](double d) { return d < phi; })) / dp.size());
    o.r.push_back(double(std::count_if(dr.begin(), dr.end(), [&](double d) { return d < phi; })) / dr.size());
  }
  o.theta_p = std::accumulate(dp.begin(), dp.end(), 0.0) / dp.size();
  o.theta_r = std::accumulate(dr.begin(), dr.end(), 0.0) / dr.size();
  return o;
}

std::vector<UnitVector3> random_set(std::size_t n, std::mt19937_64& rng) {
  std::vector<UnitVector3> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_unit(rng));
  return out;
}

UnitVector3 at_angle(double deg) { return UnitVector3(std::sin(deg_to_rad(deg)), 0, std::cos(deg_to_rad(deg))); }

} // namespace

TEST_CASE("identical sets score perfectly") {
  const std::vector<UnitVector3> s{UnitVector3::unit_x(), UnitVector3::unit_y(), UnitVector3::unit_z()};
  const MetricsReport m = evaluate(s, s);
  for (const auto& sc : m.scores) {
    CHECK(sc.precision == 1.0);
    CHECK(sc.recall == 1.0);
    CHECK(sc.f == 1.0);
  }
  CHECK(m.gd_deg == 0.0);
}

TEST_CASE("one of two ground truths found") {
  const std::vector<UnitVector3> gt{at_angle(0), at_angle(40)};
  const std::vector<UnitVector3> pred{at_angle(0)};
  const MetricsReport m = evaluate(pred, gt);
  CHECK(m.at(30).precision == 1.0);
  CHECK(m.at(30).recall == 0.5);
  CHECK(m.at(30).f == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.at(50).f == 1.0);
  CHECK(m.theta_p_deg == doctest::Approx(0.0));
  CHECK(m.theta_r_deg == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(m.gd_deg == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("matching uses a strict threshold") {
  const std::vector<UnitVector3> gt{at_angle(0)};
  const std::vector<UnitVector3> pred{at_angle(15.000001)};
  CHECK(evaluate(pred, gt).at(15).precision == 0.0);
  CHECK(evaluate(pred, gt).at(30).precision == 1.0);
}

TEST_CASE("empty inputs") {
  const std::vector<UnitVector3> gt{UnitVector3::unit_z()};
  const MetricsReport m = evaluate(std::vector<UnitVector3>{}, gt);
  CHECK(m.at(50).precision == 0.0);
  CHECK(m.at(50).recall == 0.0);
  CHECK(m.at(50).f == 0.0);
  CHECK(m.gd_deg == 90.0);
  try {
    evaluate(gt, std::vector<UnitVector3>{});
    FAIL("expected EmptyGroundTruth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyGroundTruth);
  }
}

TEST_CASE("nearest matching agrees with direct evaluation") {
  std::mt19937_64 rng(103);
  const std::vector<double> th{5, 15, 30, 50};
  for (int i = 0; i < 100; ++i) {
    const auto pred = random_set(1 + rng() % 8, rng);
    const auto gt = random_set(1 + rng() % 8, rng);
    const MetricsReport m = evaluate(pred, gt, th);
    const Oracle o = brute(pred, gt, th);
    for (std::size_t k = 0; k < th.size(); ++k) {
      CHECK(m.scores[k].precision == doctest::Approx(o.p[k]).epsilon(1e-9));
      CHECK(m.scores[k].recall == doctest::Approx(o.r[k]).epsilon(1e-9));
    }
    CHECK(std::abs(m.theta_p_deg - o.theta_p) < 1e-9);
    CHECK(std::abs(m.theta_r_deg - o.theta_r) < 1e-9);
  }
}

TEST_CASE("metric symmetries") {
  std::mt19937_64 rng(107);
  for (int i = 0; i < 200; ++i) {
    auto pred = random_set(1 + rng() % 6, rng);
    auto gt = random_set(1 + rng() % 6, rng);
    const MetricsReport m = evaluate(pred, gt);

    const MetricsReport swapped = evaluate(gt, pred);
    for (std::size_t k = 0; k < m.scores.size(); ++k) {
      CHECK(swapped.scores[k].precision == doctest::Approx(m.scores[k].recall));
      CHECK(swapped.scores[k].recall == doctest::Approx(m.scores[k].precision));
    }
    CHECK(swapped.gd_deg == doctest::Approx(m.gd_deg));

    const Mat3 r = random_rotation(rng);
    std::vector<UnitVector3> rp, rg;
    for (const auto& u : pred) rp.push_back(rotate(r, u));
    for (const auto& u : gt) rg.push_back(rng() % 2 ? -rotate(r, u) : rotate(r, u));
    const MetricsReport rot = evaluate(rp, rg);
    CHECK(std::abs(rot.gd_deg - m.gd_deg) < 1e-6);
    for (std::size_t k = 0; k < m.scores.size(); ++k) CHECK(rot.scores[k].f == doctest::Approx(m.scores[k].f));
  }
}

TEST_CASE("hungarian against permutations") {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 5, cols = 1 + rng() % 5;
    std::vector<double> cost(rows * cols);
    for (auto& c : cost) c = u(rng);
    const auto a = hungarian(cost, rows, cols);
    REQUIRE(a.size() == rows);
    double got = 0.0;
    std::vector<int> used;
    for (std::size_t i = 0; i < rows; ++i) {
      if (a[i] < 0) continue;
      got += cost[i * cols + a[i]];
      used.push_back(a[i]);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(used.size() == std::min(rows, cols));

    // Exhaustive: permute the longer side's indices.
    const std::size_t n = std::max(rows, cols);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e18;
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = rows >= cols ? perm[i] : i;
        const std::size_t col = rows >= cols ? i : perm[i];
        if (r < rows && col < cols) c += cost[r * cols + col];
      }
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("one-to-one matching cannot reuse a ground truth") {
  const std::vector<UnitVector3> gt{at_angle(0)};
  const std::vector<UnitVector3> pred{at_angle(1), at_angle(2)};
  CHECK(evaluate(pred, gt).at(5).precision == 1.0);
  const MetricsReport m = evaluate(pred, gt, kDefaultThresholdsDeg, MatchMode::OneToOne);
  CHECK(m.at(5).precision == 0.5);
  CHECK(m.at(5).recall == 1.0);
}

TEST_CASE("random guess baseline") {
  const auto a = random_guess(1000, 5);
  CHECK(a == random_guess(1000, 5));
  for (const auto& u : a) CHECK(u.z() >= 0.0);

  // A uniform direction falls within phi of a fixed plane normal with
  // probability 1 - cos(phi).
  const std::vector<UnitVector3> gt{UnitVector3(0.2, -0.5, 0.7)};
  for (double phi : {5.0, 15.0, 30.0}) {
    int hits = 0;
    const int n = 20000;
    const auto g = random_guess(n, 11);
    for (const auto& u : g) hits += geodesic_deg(u, gt[0]) < phi;
    const double p = 1.0 - std::cos(deg_to_rad(phi));
    CHECK(std::abs(hits / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}
