// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace boxforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointOutsideBox : Error { using Error::Error; };
struct EmptyPredictionSet : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };
struct TooManyPredictions : Error { using Error::Error; };
struct EmptyCandidates : Error { using Error::Error; };
struct InvalidRatios : Error { using Error::Error; };
struct ZeroOverlap : Error { using Error::Error; };
struct ProbabilityOutOfRange : Error { using Error::Error; };
struct NoPositives : Error { using Error::Error; };
struct SpecInvalid : Error { using Error::Error; };

}  // namespace boxforge
