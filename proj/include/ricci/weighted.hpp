#pragma once

#include <memory>
#include <vector>

#include "ricci/grid.hpp"

namespace ricci {

/// Selects a weighted Sobolev norm W^{k,p}_delta. p is 1, 2, or +infinity.
struct NormSpec {
  int k = 0;
  double p = 2.0;
  double delta = -1.0;

  void validate() const;
  bool p_is_inf() const;
};

/// Radial scalar function sampled on a grid.
struct RadialFunction {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// sigma(r) = sqrt(1 + r^2), the weight underlying all the norms here.
double sigma(double r);

/// Surface measure of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
double sphere_volume(int n);

struct WeightedNormResult {
  double value = 0.0;
  double tail_error = 0.0;  // estimated truncation beyond r_max
};

/// Weighted Sobolev norm of a radial function; derivatives use the grid's
/// nonuniform stencils, quadrature is composite trapezoid on the native grid.
/// Radial reductions: |grad u| = |u'|, |grad^2 u|^2 = u''^2 + (n-1)(u'/r)^2.
WeightedNormResult weighted_norm(const RadialFunction& u, const NormSpec& spec, int n);

struct DyadicReport {
  double lambda = 1.0;            // inner ball radius
  double ball_term = 0.0;         // ||u||^p_{W^{k,p}(B_Lambda)}
  std::vector<double> annuli;     // scaled annulus contributions, j = 1..J
  double recombined = 0.0;        // ball + sum of annuli
  double direct = 0.0;            // ||u||^p_{W^{k,p}_delta} on the grid
  double ratio = 0.0;             // recombined / direct
};

/// Scaling decomposition of the weighted norm into dyadic annuli; requires
/// the grid to span at least four annuli beyond the inner ball.
DyadicReport dyadic_decomposition(const RadialFunction& u, const NormSpec& spec,
                                  int n, double lambda = 1.0);

/// Smoothing by convolution with the unit-mass C^inf bump
/// j(x) ~ exp(-1/(1-|x|^2)) scaled to support [-eps, eps], applied in the
/// radial variable with even extension through r = 0. eps must lie in (0,1).
/// Constants are preserved to round-off.
RadialFunction mollify(const RadialFunction& u, double eps);

}  // namespace ricci
