#pragma once

#include "symm/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace symm {

inline const std::vector<double> kDefaultThresholdsDeg{5.0, 15.0, 30.0, 50.0};

enum class MatchMode {
  // Each prediction (ground truth) is matched to its nearest counterpart;
  // many-to-one matches are allowed.
  Nearest,
  // Minimum-total-distance one-to-one assignment (Hungarian).
  OneToOne,
};

struct ThresholdScore {
  double threshold_deg = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct MetricsReport {
  std::vector<ThresholdScore> scores;  // in the order thresholds were given
  double theta_p_deg = 0.0;            // mean prediction -> nearest gt distance
  double theta_r_deg = 0.0;            // mean gt -> nearest prediction distance
  double gd_deg = 0.0;                 // (theta_p + theta_r) / 2
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;

  const ThresholdScore& at(double threshold_deg) const;
};

// Sign-invariant throughout. A pair matches when its distance is strictly
// below the threshold. With no predictions, precision and recall are 0 and
// both mean distances are 90 degrees. Throws EmptyGroundTruth when gt is empty.
MetricsReport evaluate(std::span<const UnitVector3> pred, std::span<const UnitVector3> gt,
                       std::span<const double> thresholds_deg = kDefaultThresholdsDeg,
                       MatchMode mode = MatchMode::Nearest);

// Minimum-cost assignment for a rows x cols cost matrix (row-major). Returns,
// for each row, the matched column or -1 when rows > cols leaves it unmatched.
std::vector<int> hungarian(const std::vector<double>& cost, std::size_t rows, std::size_t cols);

// Random Guess baseline: n uniform directions, folded onto the hemisphere.
std::vector<UnitVector3> random_guess(std::size_t n, std::uint64_t seed);

} // namespace symm
