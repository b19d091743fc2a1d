#include "mtp/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "mtp/errors.hpp"

namespace mtp {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("least_squares: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw InvalidArgument("least_squares needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("least_squares: x values are all equal");

  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.residuals.resize(n);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    f.residuals[i] = y[i] - (f.intercept + f.slope * x[i]);
    sse += f.residuals[i] * f.residuals[i];
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (n > 2) f.slope_std_error = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  return f;
}

double slope_positive_p_value(const LinearFit& fit) {
  if (fit.points < 3 || !(fit.slope_std_error > 0.0)) {
    if (fit.slope > 0.0) return 0.0;
    return fit.slope < 0.0 ? 1.0 : 0.5;
  }
  const boost::math::students_t dist(static_cast<double>(fit.points - 2));
  return boost::math::cdf(boost::math::complement(dist, fit.slope / fit.slope_std_error));
}

}  // namespace mtp
