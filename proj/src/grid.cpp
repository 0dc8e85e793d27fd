#include "ricci/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ricci {

std::string to_string(Stretching s) {
  switch (s) {
    case Stretching::uniform: return "uniform";
    case Stretching::geometric: return "geometric";
    case Stretching::sinh_stretched: return "sinh";
  }
  return "?";
}

Stretching stretching_from_string(const std::string& s) {
  if (s == "uniform") return Stretching::uniform;
  if (s == "geometric") return Stretching::geometric;
  if (s == "sinh" || s == "sinh_stretched" || s == "sinh-stretched")
    return Stretching::sinh_stretched;
  throw std::invalid_argument("unknown grid stretching '" + s + "'");
}

double RadialGrid::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < nodes.size(); ++i)
    g = std::min(g, nodes[i] - nodes[i - 1]);
  return g;
}

RadialGrid build_grid(const GridSpec& spec) {
  if (!(spec.r_max > 0.0))
    throw std::invalid_argument("build_grid: r_max must be positive, got " +
                                std::to_string(spec.r_max));
  if (spec.cells < 3)
    throw std::invalid_argument("build_grid: need at least 3 cells, got " +
                                std::to_string(spec.cells));
  const std::size_t n = spec.cells;
  RadialGrid grid;
  grid.stretching = spec.stretching;
  grid.r_max = spec.r_max;
  grid.nodes.resize(n + 1);

  switch (spec.stretching) {
    case Stretching::uniform:
      for (std::size_t i = 0; i <= n; ++i)
        grid.nodes[i] = spec.r_max * static_cast<double>(i) / static_cast<double>(n);
      break;
    case Stretching::geometric: {
      if (!(spec.ratio > 1.0))
        throw std::invalid_argument("build_grid: geometric ratio must exceed 1, got " +
                                    std::to_string(spec.ratio));
      // first gap chosen so that the geometric sum lands exactly on r_max
      const double q = spec.ratio;
      const double g1 = spec.r_max * (q - 1.0) / (std::pow(q, static_cast<double>(n)) - 1.0);
      double gap = g1;
      grid.nodes[0] = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        grid.nodes[i] = grid.nodes[i - 1] + gap;
        gap *= q;
      }
      break;
    }
    case Stretching::sinh_stretched: {
      if (!(spec.scale > 0.0))
        throw std::invalid_argument("build_grid: sinh scale must be positive, got " +
                                    std::to_string(spec.scale));
      const double c = spec.scale;
      for (std::size_t i = 0; i <= n; ++i) {
        const double xi = static_cast<double>(i) / static_cast<double>(n);
        grid.nodes[i] = spec.r_max * std::sinh(c * xi) / std::sinh(c);
      }
      break;
    }
  }
  grid.nodes[0] = 0.0;
  grid.nodes[n] = spec.r_max;
  for (std::size_t i = 1; i <= n; ++i)
    if (!(grid.nodes[i] > grid.nodes[i - 1]))
      throw std::invalid_argument("build_grid: nodes not strictly increasing");
  return grid;
}

namespace {

// Lagrange differentiation of the quadratic through (x0,x1,x2), evaluated
// at xe. Returns {first-derivative weights, second-derivative weights}.
struct TripleWeights {
  std::array<double, 3> d1, d2;
};

TripleWeights lagrange3(double x0, double x1, double x2, double xe) {
  const double d01 = x0 - x1, d02 = x0 - x2, d12 = x1 - x2;
  TripleWeights w;
  w.d1[0] = (2.0 * xe - x1 - x2) / (d01 * d02);
  w.d1[2] = (2.0 * xe - x0 - x1) / (d02 * d12);
  w.d2[0] = 2.0 / (d01 * d02);
  w.d2[2] = 2.0 / (d02 * d12);
  // center weights close the sum to exactly zero so constants are
  // annihilated to the bit; flat data then stays flat under the flow
  w.d1[1] = -(w.d1[0] + w.d1[2]);
  w.d2[1] = -(w.d2[0] + w.d2[2]);
  return w;
}

}  // namespace

StencilSet derivative_stencils(const RadialGrid& grid) {
  const std::size_t n = grid.cells();
  StencilSet st;
  st.d1.resize(n + 1);
  st.d2.resize(n + 1);

  // node 0: even extension through r = 0
  const double r1 = grid.nodes[1];
  st.d1[0] = {0.0, 0.0, 0.0};
  st.d2[0] = {-2.0 / (r1 * r1), 2.0 / (r1 * r1), 0.0};

  for (std::size_t i = 1; i < n; ++i) {
    const auto w = lagrange3(grid.nodes[i - 1], grid.nodes[i], grid.nodes[i + 1],
                             grid.nodes[i]);
    st.d1[i] = w.d1;
    st.d2[i] = w.d2;
  }

  const auto w = lagrange3(grid.nodes[n - 2], grid.nodes[n - 1], grid.nodes[n],
                           grid.nodes[n]);
  st.d1[n] = w.d1;
  st.d2[n] = w.d2;
  return st;
}

std::vector<double> StencilSet::first(std::span<const double> f) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = first(f, i);
  return out;
}

std::vector<double> StencilSet::second(std::span<const double> f) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = second(f, i);
  return out;
}

}  // namespace ricci
