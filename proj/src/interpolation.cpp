#include "ricci/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ricci {

MonotoneCubic::MonotoneCubic(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n < 2 || n != y_.size())
    throw std::invalid_argument("MonotoneCubic: need matching arrays, length >= 2");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("MonotoneCubic: abscissae must strictly increase");

  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  slope_.assign(n, 0.0);
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
  } else {
    // interior slopes: weighted harmonic mean where the secants agree in
    // sign, zero otherwise (Fritsch-Carlson)
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        slope_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) s = 0.0;
      else if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) s = 3.0 * d0;
      return s;
    };
    slope_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
}

std::size_t MonotoneCubic::cell(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  std::size_t k = static_cast<std::size_t>(std::distance(x_.begin(), it));
  if (k == 0) return 0;
  if (k >= x_.size()) return x_.size() - 2;
  return k - 1;
}

double MonotoneCubic::operator()(double xq) const {
  const std::size_t k = cell(xq);
  const double h = x_[k + 1] - x_[k];
  const double s = (xq - x_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[k] + h * h10 * slope_[k] + h01 * y_[k + 1] + h * h11 * slope_[k + 1];
}

double MonotoneCubic::derivative(double xq) const {
  const std::size_t k = cell(xq);
  const double h = x_[k + 1] - x_[k];
  const double s = (xq - x_[k]) / h;
  const double s2 = s * s;
  const double g00 = (6.0 * s2 - 6.0 * s) / h;
  const double g10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double g01 = (-6.0 * s2 + 6.0 * s) / h;
  const double g11 = 3.0 * s2 - 2.0 * s;
  return g00 * y_[k] + g10 * slope_[k] + g01 * y_[k + 1] + g11 * slope_[k + 1];
}

}  // namespace ricci
