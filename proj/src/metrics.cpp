#include "symm/metrics.hpp"

#include "symm/error.hpp"
#include "symm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace symm {

const ThresholdScore& MetricsReport::at(double threshold_deg) const {
  for (const auto& s : scores) {
    if (s.threshold_deg == threshold_deg) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "threshold not evaluated");
}

namespace {

constexpr double kMaxDistanceDeg = 90.0;

double f_score(double p, double r) {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

} // namespace

std::vector<int> hungarian(const std::vector<double>& cost, std::size_t rows, std::size_t cols) {
  if (rows == 0) return {};
  if (cols == 0) return std::vector<int>(rows, -1);
  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;  // n <= m
  const std::size_t m = transpose ? rows : cols;
  auto c = [&](std::size_t i, std::size_t j) {  // 1-based
    return transpose ? cost[(j - 1) * cols + (i - 1)] : cost[(i - 1) * cols + (j - 1)];
  };

  // Potentials method (Kuhn-Munkres, O(n^2 m)).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = c(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> match(rows, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transpose) {
      match[j - 1] = static_cast<int>(p[j] - 1);
    } else {
      match[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return match;
}

MetricsReport evaluate(std::span<const UnitVector3> pred, std::span<const UnitVector3> gt,
                       std::span<const double> thresholds_deg, MatchMode mode) {
  if (gt.empty()) {
    throw Error(ErrorCode::EmptyGroundTruth, "metrics are undefined for an object without ground-truth planes");
  }
  MetricsReport r;
  r.n_pred = pred.size();
  r.n_gt = gt.size();

  std::vector<double> dist(pred.size() * gt.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) dist[i * gt.size() + j] = geodesic_deg(pred[i], gt[j]);
  }

  // Per-element distance to its match; unmatched elements sit at 90 degrees.
  std::vector<double> pred_d(pred.size(), kMaxDistanceDeg);
  std::vector<double> gt_d(gt.size(), kMaxDistanceDeg);
  // Pairs counted for precision/recall: in nearest mode every element carries
  // its own nearest distance; in one-to-one mode only assigned pairs count.
  if (mode == MatchMode::Nearest) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (std::size_t j = 0; j < gt.size(); ++j) {
        pred_d[i] = std::min(pred_d[i], dist[i * gt.size() + j]);
        gt_d[j] = std::min(gt_d[j], dist[i * gt.size() + j]);
      }
    }
  } else {
    const auto match = hungarian(dist, pred.size(), gt.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (match[i] < 0) continue;
      const double d = dist[i * gt.size() + static_cast<std::size_t>(match[i])];
      pred_d[i] = d;
      gt_d[static_cast<std::size_t>(match[i])] = d;
    }
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  r.theta_p_deg = pred.empty() ? kMaxDistanceDeg : mean(pred_d);
  r.theta_r_deg = pred.empty() ? kMaxDistanceDeg : mean(gt_d);
  r.gd_deg = 0.5 * (r.theta_p_deg + r.theta_r_deg);

  for (double phi : thresholds_deg) {
    ThresholdScore s{phi, 0.0, 0.0, 0.0};
    if (!pred.empty()) {
      const auto hits_p = std::count_if(pred_d.begin(), pred_d.end(), [phi](double d) { return d < phi; });
      const auto hits_r = std::count_if(gt_d.begin(), gt_d.end(), [phi](double d) { return d < phi; });
      s.precision = static_cast<double>(hits_p) / static_cast<double>(pred.size());
      s.recall = static_cast<double>(hits_r) / static_cast<double>(gt.size());
    }
    s.f = f_score(s.precision, s.recall);
    r.scores.push_back(s);
  }
  return r;
}

std::vector<UnitVector3> random_guess(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "random_guess needs n >= 1");
  Rng rng(seed, streams::kRandomGuess);
  std::vector<UnitVector3> out;
  out.reserve(n);
  while (out.size() < n) {
    const Vec3 g(rng.normal(), rng.normal(), rng.normal());
    if (g.squaredNorm() < 1e-20) continue;
    out.push_back(canonical_hemisphere(UnitVector3(g)));
  }
  return out;
}

} // namespace symm
