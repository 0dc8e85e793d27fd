#include "ricci/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ricci/interpolation.hpp"

namespace ricci {

double sigma(double r) { return std::sqrt(1.0 + r * r); }

double sphere_volume(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

bool NormSpec::p_is_inf() const { return std::isinf(p); }

void NormSpec::validate() const {
  if (k < 0 || k > 2)
    throw std::invalid_argument("NormSpec: k must lie in {0, 1, 2}");
  if (!(p == 1.0 || p == 2.0 || p_is_inf()))
    throw std::invalid_argument("NormSpec: p must be 1, 2, or inf");
}

namespace {

// |grad^j u| per node, j = 0..k, with the radial reductions; at r = 0 the
// parity limit u'/r -> u''(0) applies.
std::vector<std::vector<double>> derivative_magnitudes(const RadialFunction& u,
                                                       int k, int n) {
  std::vector<std::vector<double>> mag(k + 1);
  mag[0].resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) mag[0][i] = std::abs(u.values[i]);
  if (k == 0) return mag;

  const StencilSet st = derivative_stencils(*u.grid);
  const std::vector<double> d1 = st.first(u.values);
  if (k >= 1) {
    mag[1].resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) mag[1][i] = std::abs(d1[i]);
  }
  if (k >= 2) {
    const std::vector<double> d2 = st.second(u.values);
    mag[2].resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double radial = d2[i];
      const double angular = i == 0 ? d2[0] : d1[i] / u.grid->nodes[i];
      mag[2][i] = std::sqrt(radial * radial + (n - 1) * angular * angular);
    }
  }
  return mag;
}

double trapezoid(const RadialGrid& grid, const std::vector<double>& integrand) {
  double sum = 0.0;
  for (std::size_t i = 1; i < integrand.size(); ++i)
    sum += 0.5 * (grid.nodes[i] - grid.nodes[i - 1]) * (integrand[i] + integrand[i - 1]);
  return sum;
}

// trapezoid restricted to [a, b] with linear interpolation of the integrand
// at the cut points
double trapezoid_between(const RadialGrid& grid, const std::vector<double>& integrand,
                         double a, double b) {
  double sum = 0.0;
  for (std::size_t i = 1; i < integrand.size(); ++i) {
    const double x0 = grid.nodes[i - 1], x1 = grid.nodes[i];
    const double lo = std::max(a, x0), hi = std::min(b, x1);
    if (hi <= lo) continue;
    auto at = [&](double x) {
      const double s = (x - x0) / (x1 - x0);
      return (1.0 - s) * integrand[i - 1] + s * integrand[i];
    };
    sum += 0.5 * (hi - lo) * (at(lo) + at(hi));
  }
  return sum;
}

// fitted power-law extrapolation of the integrand beyond r_max; returns an
// estimate of the dropped tail, +inf when the fit does not decay
double tail_estimate(const RadialGrid& grid, const std::vector<double>& integrand) {
  const std::size_t n = integrand.size();
  const std::size_t start = n - std::max<std::size_t>(4, n / 4);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (integrand[i] < 1e-300 || grid.nodes[i] <= 0.0) continue;
    const double x = std::log(grid.nodes[i]), y = std::log(integrand[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++count;
  }
  if (count < 3) return 0.0;  // integrand vanished; nothing beyond r_max
  const double beta = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double last = integrand[n - 1];
  if (last < 1e-300) return 0.0;
  if (beta >= -1.0) return std::numeric_limits<double>::infinity();
  return last * grid.r_max / (-beta - 1.0);
}

}  // namespace

WeightedNormResult weighted_norm(const RadialFunction& u, const NormSpec& spec, int n) {
  spec.validate();
  if (!u.grid || u.values.size() != u.grid->size())
    throw std::invalid_argument("weighted_norm: values do not match grid");

  const auto mags = derivative_magnitudes(u, spec.k, n);
  WeightedNormResult out;

  if (spec.p_is_inf()) {
    double total = 0.0;
    for (int j = 0; j <= spec.k; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        m = std::max(m, std::pow(sigma(u.grid->nodes[i]), -(spec.delta - j)) * mags[j][i]);
      total += m;
    }
    out.value = total;
    return out;
  }

  const double vol = sphere_volume(n);
  double sum_p = 0.0, tail = 0.0;
  for (int j = 0; j <= spec.k; ++j) {
    const double expo = -(spec.delta - j) - n / spec.p;  // sigma power per wLpdef
    std::vector<double> integrand(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = u.grid->nodes[i];
      integrand[i] = std::pow(std::pow(sigma(r), expo) * mags[j][i], spec.p) *
                     std::pow(r, n - 1);
    }
    sum_p += vol * trapezoid(*u.grid, integrand);
    tail += vol * tail_estimate(*u.grid, integrand);
  }
  out.value = std::pow(sum_p, 1.0 / spec.p);
  // first-order propagation of the integral tail through the 1/p power
  out.tail_error = sum_p > 0.0 && std::isfinite(tail)
                       ? out.value * tail / (spec.p * sum_p)
                       : tail;
  return out;
}

DyadicReport dyadic_decomposition(const RadialFunction& u, const NormSpec& spec,
                                  int n, double lambda) {
  spec.validate();
  if (spec.p_is_inf())
    throw std::invalid_argument("dyadic_decomposition: p must be finite");
  if (!(lambda > 0.0))
    throw std::invalid_argument("dyadic_decomposition: lambda must be positive");

  const double r_max = u.grid->r_max;
  int levels = 0;
  while (lambda * std::pow(2.0, levels + 1) <= r_max) ++levels;
  if (levels < 4)
    throw std::invalid_argument(
        "dyadic_decomposition: grid spans fewer than 4 dyadic annuli");

  DyadicReport rep;
  rep.lambda = lambda;
  const auto mags = derivative_magnitudes(u, spec.k, n);
  const double vol = sphere_volume(n);

  auto unweighted_piece = [&](int j_deriv, double a, double b) {
    std::vector<double> integrand(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = u.grid->nodes[i];
      integrand[i] = std::pow(mags[j_deriv][i], spec.p) * std::pow(r, n - 1);
    }
    return vol * trapezoid_between(*u.grid, integrand, a, b);
  };

  for (int j = 0; j <= spec.k; ++j) rep.ball_term += unweighted_piece(j, 0.0, lambda);

  for (int level = 1; level <= levels; ++level) {
    const double scale = std::pow(2.0, level - 1);  // S_level u(x) = u(scale x)
    const double a = scale * lambda, b = 2.0 * scale * lambda;
    double contrib = 0.0;
    for (int j = 0; j <= spec.k; ++j) {
      // ||grad^j S u||^p over a_Lambda equals scale^{jp - n} times the
      // integral of |grad^j u|^p over the physical annulus [a, b]
      contrib += std::pow(scale, j * spec.p - n) * unweighted_piece(j, a, b);
    }
    rep.annuli.push_back(std::pow(2.0, -spec.p * spec.delta * (level - 1)) * contrib);
  }

  rep.recombined = rep.ball_term;
  for (double c : rep.annuli) rep.recombined += c;
  const double direct_norm = weighted_norm(u, spec, n).value;
  rep.direct = std::pow(direct_norm, spec.p);
  rep.ratio = rep.direct > 0.0
                  ? rep.recombined / rep.direct
                  : (rep.recombined == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  return rep;
}

RadialFunction mollify(const RadialFunction& u, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("mollify: eps must lie in (0, 1)");
  if (!u.grid || u.values.size() != u.grid->size())
    throw std::invalid_argument("mollify: values do not match grid");

  const MonotoneCubic interp(u.grid->nodes, u.values);
  auto evaluate = [&](double s) {
    s = std::abs(s);                       // even extension through r = 0
    if (s > u.grid->r_max) s = u.grid->r_max;  // clamp beyond the grid
    return interp(s);
  };

  // composite Simpson over the kernel support; the normalization uses the
  // same rule, so constants pass through exactly
  constexpr int kPanels = 128;
  const double hq = 2.0 * eps / kPanels;
  auto kernel = [&](double s) {
    const double x = s / eps;
    const double arg = 1.0 - x * x;
    return arg > 1e-14 ? std::exp(-1.0 / arg) : 0.0;
  };
  double z = 0.0;
  for (int q = 0; q <= kPanels; ++q) {
    const double wq = (q == 0 || q == kPanels) ? 1.0 : (q % 2 ? 4.0 : 2.0);
    z += wq * kernel(-eps + q * hq);
  }

  RadialFunction out;
  out.grid = u.grid;
  out.values.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = u.grid->nodes[i];
    double acc = 0.0;
    for (int q = 0; q <= kPanels; ++q) {
      const double wq = (q == 0 || q == kPanels) ? 1.0 : (q % 2 ? 4.0 : 2.0);
      const double s = -eps + q * hq;
      acc += wq * kernel(s) * evaluate(r - s);
    }
    out.values[i] = acc / z;
  }
  return out;
}

}  // namespace ricci
