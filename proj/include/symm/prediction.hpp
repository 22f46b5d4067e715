#pragma once

#include "symm/geom.hpp"

#include <vector>

namespace symm {

struct Prediction {
  SymmetryPlane plane;
  double confidence = 1.0;
};

using PredictionSet = std::vector<Prediction>;

} // namespace symm
