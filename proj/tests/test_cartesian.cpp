#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "oracle_data.hpp"
#include "ricci/cartesian.hpp"

using namespace ricci;

namespace {

std::shared_ptr<const RadialGrid> cover_grid(double r_max) {
  return std::make_shared<RadialGrid>(
      build_grid({Stretching::sinh_stretched, 128, r_max, 0, 3.0}));
}

MetricProfile flat_profile(double r_max) {
  const auto g = cover_grid(r_max);
  return MetricProfile{g, std::vector<double>(g->size(), 1.0), 0.0, 3};
}

CartesianState manufactured_state(int m, double half_width) {
  CartesianState s;
  s.m = m;
  s.half_width = half_width;
  s.h = 2.0 * half_width / (m - 1);
  s.comp.resize(static_cast<std::size_t>(m) * m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double out[6];
        oracle::cart_perturbation(s.coord(i), s.coord(j), s.coord(k), out);
        for (int c = 0; c < 6; ++c) s.comp[s.index(i, j, k)][c] = out[c];
      }
  return s;
}

}  // namespace

TEST_CASE("init from flat profile is identically zero") {
  const CartesianState s = init_from_profile(flat_profile(20.0), {9, 2.0});
  for (const auto& c : s.comp)
    for (double v : c) CHECK(v == 0.0);
}

TEST_CASE("init pulls back f^2 along the radial direction") {
  // w(r) = r^2 exp(1 - r^2) gives f^2 = 2 at r = 1
  const auto g = cover_grid(20.0);
  MetricProfile p{g, {}, 0.0, 3};
  p.f.resize(g->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = g->nodes[i];
    p.f[i] = std::sqrt(1.0 + r * r * std::exp(1.0 - r * r));
  }
  const CartesianState s = init_from_profile(p, {9, 2.0});
  // node (1, 0, 0): indices (6, 4, 4) on the 9-point axis {-2,...,2}
  const auto& c = s.comp[s.index(6, 4, 4)];
  CHECK(c[0] == doctest::Approx(1.0).epsilon(2e-3));  // h_11 = f^2 - 1 = 1 (pchip)
  CHECK(c[1] == doctest::Approx(0.0));
  CHECK(c[3] == doctest::Approx(0.0));
  CHECK(c[5] == doctest::Approx(0.0));
}

TEST_CASE("coverage precondition is enforced") {
  CHECK_THROWS_AS(init_from_profile(flat_profile(10.0), {9, 8.0}),
                  std::invalid_argument);
}

TEST_CASE("flat data is a fixed point of the Cartesian rhs") {
  const CartesianState s = init_from_profile(flat_profile(20.0), {9, 2.0});
  for (const auto& rhs : rhs_deturck(s))
    for (double v : rhs) CHECK(v == 0.0);
  for (const auto& w : deturck_W(s))
    for (double v : w) CHECK(v == 0.0);
}

TEST_CASE("axis permutation equivariance on symmetric data") {
  const auto g = cover_grid(20.0);
  MetricProfile p{g, {}, 0.0, 3};
  p.f.resize(g->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = g->nodes[i];
    p.f[i] = std::sqrt(1.0 + 0.2 * r * r * std::exp(-r * r) / (1.0 + r * r));
  }
  const CartesianState s = init_from_profile(p, {11, 2.0});
  const auto rhs = rhs_deturck(s);
  // swap x <-> y: node (i,j,k) -> (j,i,k); components permute as
  // xx<->yy, xy<->xy, xz<->yz
  for (int i = 1; i < 10; ++i)
    for (int j = 1; j < 10; ++j)
      for (int k = 1; k < 10; ++k) {
        const auto& a = rhs[s.index(i, j, k)];
        const auto& b = rhs[s.index(j, i, k)];
        CHECK(a[0] == doctest::Approx(b[3]).epsilon(1e-12));
        CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
        CHECK(a[2] == doctest::Approx(b[4]).epsilon(1e-12));
        CHECK(a[5] == doctest::Approx(b[5]).epsilon(1e-12));
      }
}

TEST_CASE("rhs matches the computer-algebra expansion at second order") {
  // evaluation point (0.3, -0.2, 0.5) is a node of both grids
  double err_coarse = 0.0, err_fine = 0.0;
  {
    const CartesianState s = manufactured_state(15, 0.7);  // h = 0.1
    const auto rhs = rhs_deturck(s);
    const auto& v = rhs[s.index(10, 5, 12)];
    for (int c = 0; c < 6; ++c)
      err_coarse = std::max(err_coarse, std::abs(v[c] - oracle::kCartRhs[c]));
  }
  {
    const CartesianState s = manufactured_state(29, 0.7);  // h = 0.05
    const auto rhs = rhs_deturck(s);
    const auto& v = rhs[s.index(20, 10, 24)];
    for (int c = 0; c < 6; ++c)
      err_fine = std::max(err_fine, std::abs(v[c] - oracle::kCartRhs[c]));
  }
  CHECK(err_coarse < 1e-3);
  CHECK(err_coarse / err_fine > 3.0);
}

TEST_CASE("scalar curvature matches the oracle at the sample point") {
  const CartesianState s = manufactured_state(29, 0.7);
  const auto inv = curvature_invariants_at(s, 20, 10, 24);
  CHECK(inv.scalar == doctest::Approx(oracle::kCartScalar).epsilon(2e-3));
  CHECK(inv.rm_norm > 0.0);
}

TEST_CASE("deturck W is radial on symmetric data") {
  const auto g = cover_grid(20.0);
  MetricProfile p{g, {}, 0.0, 3};
  p.f.resize(g->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = g->nodes[i];
    p.f[i] = std::sqrt(1.0 + 0.2 * r * r * std::exp(-r * r) / (1.0 + r * r));
  }
  const CartesianState s = init_from_profile(p, {9, 2.0});
  const auto w = deturck_W(s);
  // on the positive x axis the y and z components vanish by symmetry
  const auto& wx = w[s.index(6, 4, 4)];
  CHECK(std::abs(wx[1]) <= 1e-12 * (1.0 + std::abs(wx[0])));
  CHECK(std::abs(wx[2]) <= 1e-12 * (1.0 + std::abs(wx[0])));
}

TEST_CASE("non positive definite metric raises the blow-up signal") {
  CartesianState s = manufactured_state(9, 0.7);
  s.comp[s.index(4, 4, 4)][0] = -2.0;  // g_xx < 0
  CHECK_THROWS_AS(rhs_deturck(s), std::domain_error);
}

TEST_CASE("flat data stays flat under the Cartesian flow") {
  CartesianState s = init_from_profile(flat_profile(20.0), {10, 2.0});
  const double dt = s.h * s.h / 12.0;
  for (int step = 0; step < 4; ++step) {
    const auto k1 = rhs_deturck(s);
    CartesianState mid = s;
    for (std::size_t q = 0; q < s.comp.size(); ++q)
      for (int c = 0; c < 6; ++c) mid.comp[q][c] += dt * k1[q][c];
    const auto k2 = rhs_deturck(mid);
    for (std::size_t q = 0; q < s.comp.size(); ++q)
      for (int c = 0; c < 6; ++c) s.comp[q][c] += 0.5 * dt * (k1[q][c] + k2[q][c]);
  }
  double sup_h = 0.0;
  for (const auto& c : s.comp)
    for (double v : c) sup_h = std::max(sup_h, std::abs(v));
  CHECK(sup_h <= 1e-12);
}

TEST_CASE("octahedral symmetry is preserved to round-off accumulation") {
  const auto g = cover_grid(20.0);
  MetricProfile p{g, {}, 0.0, 3};
  p.f.resize(g->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = g->nodes[i];
    p.f[i] = std::sqrt(1.0 + 0.2 * r * r * std::exp(-r * r / 4.0) / (1.0 + r * r));
  }
  CartesianState s = init_from_profile(p, {12, 3.0});
  const double dt = 0.9 * s.h * s.h / 12.0;
  const int steps = 5;
  for (int step = 0; step < steps; ++step) {
    const auto k1 = rhs_deturck(s);
    CartesianState mid = s;
    for (std::size_t q = 0; q < s.comp.size(); ++q)
      for (int c = 0; c < 6; ++c) mid.comp[q][c] += dt * k1[q][c];
    const auto k2 = rhs_deturck(mid);
    for (std::size_t q = 0; q < s.comp.size(); ++q)
      for (int c = 0; c < 6; ++c) s.comp[q][c] += 0.5 * dt * (k1[q][c] + k2[q][c]);
  }
  // reflection through the x = 0 plane: node i -> m-1-i, components with a
  // single x index flip sign
  double residual = 0.0;
  for (int i = 0; i < s.m; ++i)
    for (int j = 0; j < s.m; ++j)
      for (int k = 0; k < s.m; ++k) {
        const auto& a = s.comp[s.index(i, j, k)];
        const auto& b = s.comp[s.index(s.m - 1 - i, j, k)];
        residual = std::max({residual, std::abs(a[0] - b[0]),
                             std::abs(a[1] + b[1]), std::abs(a[2] + b[2]),
                             std::abs(a[3] - b[3]), std::abs(a[4] - b[4]),
                             std::abs(a[5] - b[5])});
      }
  CHECK(residual <= 1e-9);
}

TEST_CASE("crosscheck smoke run: flat agrees exactly, bump agrees loosely") {
  const CrosscheckReport flat = crosscheck_run(flat_profile(20.0), {12, 3.0}, 0.01);
  REQUIRE(flat.completed);
  CHECK(std::abs(flat.r_origin_1d) <= 1e-12);
  CHECK(std::abs(flat.r_origin_3d) <= 1e-12);
  CHECK(flat.sup_rm_3d <= 1e-10);

  const auto g = cover_grid(20.0);
  MetricProfile p{g, {}, 0.0, 3};
  p.f.resize(g->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = g->nodes[i];
    p.f[i] = std::sqrt(1.0 + 0.2 * r * r * std::exp(-r * r / 4.0) / (1.0 + r * r));
  }
  const CrosscheckReport rep = crosscheck_run(p, {24, 5.0}, 0.02);
  REQUIRE(rep.completed);
  CHECK(rep.rel_diff < 0.25);  // coarse smoke bound; acceptance pins 5%
}
