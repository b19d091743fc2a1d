#pragma once

#include <span>
#include <vector>

namespace mtp {

/// Ordinary least squares fit y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope; 0 with fewer than 3 points.
  double slope_std_error = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  std::size_t points = 0;
};

/// Throws InvalidArgument with fewer than two points, mismatched lengths or
/// constant x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// One-sided p-value for H1: slope > 0 (Student t with n - 2 degrees of
/// freedom). 0.5 for a zero slope with no residual spread information.
double slope_positive_p_value(const LinearFit& fit);

}  // namespace mtp
