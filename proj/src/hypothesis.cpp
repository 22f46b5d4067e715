#include "symm/hypothesis.hpp"

#include "symm/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace symm {

HypothesisBank::HypothesisBank(std::size_t n) : normals_(sample_hemisphere(n)) {}

std::size_t HypothesisBank::nearest(const UnitVector3& n) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < normals_.size(); ++i) {
    const double d = geodesic_deg(normals_[i], n);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

UnitQuaternion residual_between(const UnitVector3& hypothesis, const UnitVector3& gt) {
  const UnitVector3 g = canonical_hemisphere(gt);
  const double c = hypothesis.dot(g);
  if (std::abs(c) <= 1e-12) {
    throw Error(ErrorCode::AntipodalAmbiguity, "hypothesis and ground truth are 90 degrees apart");
  }
  return shortest_arc(hypothesis, c > 0.0 ? g : -g);
}

TrainingTargets assign_ground_truth(const HypothesisBank& bank, std::span<const UnitVector3> gt) {
  TrainingTargets t;
  t.positive.assign(bank.size(), false);
  t.residual.assign(bank.size(), std::nullopt);
  t.assignment.resize(gt.size());

  std::vector<std::optional<std::size_t>> owner(bank.size());
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const std::size_t h = bank.nearest(gt[g]);
    t.assignment[g] = h;
    if (owner[h]) {
      const std::size_t other = *owner[h];
      const bool closer = geodesic_deg(bank[h], gt[g]) < geodesic_deg(bank[h], gt[other]);
      t.warnings.push_back({h, closer ? g : other, closer ? other : g});
      if (!closer) continue;
    }
    owner[h] = g;
  }
  for (std::size_t h = 0; h < bank.size(); ++h) {
    if (!owner[h]) continue;
    t.positive[h] = true;
    t.residual[h] = residual_between(bank[h], gt[*owner[h]]);
  }
  return t;
}

PredictionSet reconstruct_predictions(const HypothesisBank& bank, std::span<const double> probabilities,
                                      std::span<const UnitQuaternion> residuals, double prob_threshold) {
  if (probabilities.size() != bank.size() || residuals.size() != bank.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "expected " + std::to_string(bank.size()) + " probabilities and residuals");
  }
  PredictionSet out;
  for (std::size_t h = 0; h < bank.size(); ++h) {
    const double p = probabilities[h];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
    if (p < prob_threshold) continue;
    out.push_back({SymmetryPlane(apply_residual(bank[h], residuals[h]), 0.0), p});
  }
  return out;
}

} // namespace symm
