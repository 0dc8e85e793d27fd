#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ricci {

enum class Stretching { uniform, geometric, sinh_stretched };

std::string to_string(Stretching s);
Stretching stretching_from_string(const std::string& s);

/// Parameters for the radial discretization of [0, r_max].
struct GridSpec {
  Stretching stretching = Stretching::sinh_stretched;
  std::size_t cells = 512;   // N; grid has N+1 nodes
  double r_max = 100.0;
  double ratio = 1.05;       // geometric only, > 1
  double scale = 4.0;        // sinh only, > 0
};

/// Radial grid with node 0 at r = 0 and node N at r_max.
/// Immutable after construction; safe to share across threads.
struct RadialGrid {
  std::vector<double> nodes;
  Stretching stretching = Stretching::uniform;
  double r_max = 0.0;

  std::size_t cells() const { return nodes.size() - 1; }
  std::size_t size() const { return nodes.size(); }
  double operator[](std::size_t i) const { return nodes[i]; }
  double min_gap() const;
};

/// Builds a grid from a spec. Throws std::invalid_argument on bad parameters
/// (non-positive r_max, geometric ratio <= 1, fewer than 3 cells).
RadialGrid build_grid(const GridSpec& spec);

/// Three-point Lagrange differentiation weights on a nonuniform grid.
///
/// Interior node i uses (i-1, i, i+1). Node 0 uses the even extension
/// f(-r) = f(r): the first derivative is identically zero there and the
/// second derivative is 2(f1 - f0)/r1^2. Node N uses the one-sided triple
/// (N-2, N-1, N). All weights reproduce derivatives of quadratics exactly.
struct StencilSet {
  // weights apply to values at support(i) = {i-1, i, i+1}, clamped to
  // {0, 1, 2} at the center and {N-2, N-1, N} at the outer edge
  std::vector<std::array<double, 3>> d1;
  std::vector<std::array<double, 3>> d2;

  std::size_t size() const { return d1.size(); }
  std::size_t support(std::size_t i) const {
    if (i == 0) return 0;
    if (i + 1 == size()) return size() - 3;
    return i - 1;
  }

  // difference-form application: sum of w_j (f_j - f_i) over the two
  // non-evaluation nodes of the triple; constants are annihilated exactly
  double first(std::span<const double> f, std::size_t i) const {
    return apply(d1, f, i);
  }
  double second(std::span<const double> f, std::size_t i) const {
    return apply(d2, f, i);
  }

  std::vector<double> first(std::span<const double> f) const;
  std::vector<double> second(std::span<const double> f) const;

 private:
  double apply(const std::vector<std::array<double, 3>>& w,
               std::span<const double> f, std::size_t i) const {
    const std::size_t s = support(i);
    const std::size_t center = i - s;  // position of the evaluation node
    double acc = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
      if (j != center) acc += w[i][j] * (f[s + j] - f[i]);
    return acc;
  }
};

StencilSet derivative_stencils(const RadialGrid& grid);

}  // namespace ricci
