#pragma once

#include <cmath>

namespace fairsample {

/// Numerically stable sigmoid.
template <typename Scalar>
inline Scalar logistic(Scalar z) {
  if (z >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-z));
  }
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(x)) without overflow for large |x|.
template <typename Scalar>
inline Scalar log1pexp(Scalar x) {
  if (x > Scalar(0)) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

}  // namespace fairsample
