#pragma once

#include "symm/geom.hpp"
#include "symm/prediction.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace symm {

inline constexpr std::size_t kDefaultHypotheses = 31;

// Fixed hemisphere normals discretizing plane-normal space.
class HypothesisBank {
public:
  explicit HypothesisBank(std::size_t n = kDefaultHypotheses);

  std::size_t size() const { return normals_.size(); }
  const std::vector<UnitVector3>& normals() const { return normals_; }
  const UnitVector3& operator[](std::size_t i) const { return normals_[i]; }

  // Index of the nearest hypothesis (sign-invariant); ties go to the lower index.
  std::size_t nearest(const UnitVector3& n) const;

private:
  std::vector<UnitVector3> normals_;
};

// Two ground-truth normals fell on one hypothesis; the closer one kept it.
struct CollisionWarning {
  std::size_t hypothesis;
  std::size_t kept_gt;
  std::size_t dropped_gt;
};

struct TrainingTargets {
  std::vector<bool> positive;                          // per hypothesis
  std::vector<std::optional<UnitQuaternion>> residual; // set for positives only
  std::vector<std::size_t> assignment;                 // per ground truth -> hypothesis
  std::vector<CollisionWarning> warnings;
};

// Shortest-arc rotation taking the hypothesis onto whichever of +-gt is
// nearer. Throws AntipodalAmbiguity when the two are 90 degrees apart.
UnitQuaternion residual_between(const UnitVector3& hypothesis, const UnitVector3& gt);

TrainingTargets assign_ground_truth(const HypothesisBank& bank, std::span<const UnitVector3> gt);

inline constexpr double kDefaultProbThreshold = 0.5;

// Emits one through-origin plane per hypothesis whose probability clears the
// threshold; its normal is the hypothesis rotated by the regressed residual.
PredictionSet reconstruct_predictions(const HypothesisBank& bank, std::span<const double> probabilities,
                                      std::span<const UnitQuaternion> residuals,
                                      double prob_threshold = kDefaultProbThreshold);

} // namespace symm
