#pragma once

#include <span>
#include <vector>

namespace ricci {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slope limiting).
/// Preserves monotonicity of the data on every interval, hence positivity
/// of positive data; C^1 everywhere.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::span<const double> x, std::span<const double> y);

  double operator()(double xq) const;
  /// Derivative of the interpolant.
  double derivative(double xq) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  std::size_t cell(double xq) const;
  std::vector<double> x_, y_, slope_;
};

}  // namespace ricci
