#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "ricci/geometry.hpp"
#include "ricci/interpolation.hpp"

using namespace ricci;

namespace {

std::shared_ptr<const RadialGrid> sinh_grid(std::size_t n, double r_max) {
  return std::make_shared<RadialGrid>(
      build_grid({Stretching::sinh_stretched, n, r_max, 0, 4.0}));
}

MetricProfile bump(std::shared_ptr<const RadialGrid> grid, double a, double s,
                   int n) {
  MetricProfile p{grid, {}, 0.0, n};
  p.f.resize(grid->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = grid->nodes[i];
    p.f[i] = std::sqrt(1.0 + a * r * r * std::exp(-r * r / (s * s)) / (1.0 + r * r));
  }
  return p;
}

Trajectory short_bump_run(std::size_t cells, double t_end, double cadence,
                          double amplitude = 0.4) {
  MetricProfile init = bump(sinh_grid(cells, 30.0), amplitude, 2.0, 3);
  SolverConfig cfg;
  cfg.t_end = t_end;
  cfg.output_interval = cadence;
  return evolve(init, cfg);
}

}  // namespace

TEST_CASE("curvature of flat space vanishes, H = 1/r") {
  const auto grid = sinh_grid(48, 20.0);
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  const StencilSet st = derivative_stencils(*grid);
  const CurvatureField cf = curvature_field(flat, st, 3);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CHECK(cf.lambda1[i] == 0.0);
    CHECK(cf.lambda2[i] == 0.0);
    CHECK(cf.scalar[i] == 0.0);
    CHECK(cf.rm_norm[i] == 0.0);
    if (i > 0) CHECK(cf.mean_curv[i] == doctest::Approx(1.0 / grid->nodes[i]));
  }
}

TEST_CASE("round-sphere cap has unit sectional curvatures to stencil order") {
  auto max_err = [](std::size_t cells) {
    const auto grid = std::make_shared<RadialGrid>(
        build_grid({Stretching::uniform, cells, 0.9, 0, 0}));
    MetricProfile p{grid, {}, 0.0, 3};
    p.f.resize(grid->size());
    for (std::size_t i = 0; i < p.size(); ++i)
      p.f[i] = 1.0 / std::sqrt(1.0 - grid->nodes[i] * grid->nodes[i]);
    const StencilSet st = derivative_stencils(*grid);
    const CurvatureField cf = curvature_field(p, st, 3);
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      err = std::max(err, std::abs(cf.lambda1[i] - 1.0));
      if (i == 0) {
        err = std::max(err, std::abs(cf.lambda2[0] - 1.0));  // parity limit
      } else {
        // away from the center lambda2 is algebraic in f, exact to round-off
        CHECK(cf.lambda2[i] == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
    return err;
  };
  const double e1 = max_err(90), e2 = max_err(180);
  CHECK(e1 < 1e-2);
  CHECK(e1 / e2 > 3.0);  // second-order stencils
  CHECK(e2 < e1);
}

TEST_CASE("schwarzschild-type tail: lambda2 = 2m/r^3") {
  const auto grid = std::make_shared<RadialGrid>(
      build_grid({Stretching::uniform, 64, 8.0, 0, 0}));
  MetricProfile p{grid, {}, 0.0, 3};
  p.f.resize(grid->size());
  const double m = 0.1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = grid->nodes[i];
    const double drop = i == 0 ? 0.0 : 2.0 * m * cutoff_chi(r) / r;
    p.f[i] = 1.0 / std::sqrt(1.0 - drop);
  }
  const StencilSet st = derivative_stencils(*grid);
  const CurvatureField cf = curvature_field(p, st, 3);
  const std::size_t i = 16;  // r = 2
  REQUIRE(grid->nodes[i] == doctest::Approx(2.0));
  CHECK(cf.lambda2[i] == doctest::Approx(2.0 * m / 8.0).epsilon(1e-12));
}

TEST_CASE("curvature identities hold nodewise") {
  for (int n : {3, 4, 6}) {
    const auto grid = sinh_grid(64, 25.0);
    const MetricProfile p = bump(grid, 0.5, 2.0, n);
    const StencilSet st = derivative_stencils(*grid);
    const CurvatureField cf = curvature_field(p, st, n);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double expect_r =
          2.0 * (n - 1) * cf.lambda1[i] + (n - 1) * (n - 2) * cf.lambda2[i];
      CHECK(cf.scalar[i] == doctest::Approx(expect_r).epsilon(1e-11));
      const double expect_rm2 = 2.0 * (n - 1) * cf.lambda1[i] * cf.lambda1[i] +
                                (n - 1) * (n - 2) * cf.lambda2[i] * cf.lambda2[i];
      CHECK(cf.rm_norm[i] * cf.rm_norm[i] ==
            doctest::Approx(expect_rm2).epsilon(1e-11));
    }
  }
}

TEST_CASE("quasi-local mass: flat, direct substitution, and closed form") {
  const auto grid = std::make_shared<RadialGrid>(
      build_grid({Stretching::uniform, 80, 20.0, 0, 0}));
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  CHECK(quasilocal_mass(flat, 5.0, 3) == 0.0);
  CHECK_THROWS_AS(quasilocal_mass(flat, 25.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(quasilocal_mass(flat, 0.0, 3), std::invalid_argument);

  // f = 2 in a neighborhood of b = 1: mu = (1 - 1/2) 4 pi = 2 pi
  MetricProfile two{grid, std::vector<double>(grid->size(), 2.0), 0.0, 3};
  two.f[0] = 1.0;
  CHECK(quasilocal_mass(two, 1.0, 3) ==
        doctest::Approx(2.0 * M_PI).epsilon(1e-13));

  // schwarzschild tail with m = 0.1 at b = 10: mu = 10 (1 - sqrt(0.98)) 4 pi
  MetricProfile sch{grid, {}, 0.0, 3};
  sch.f.resize(grid->size());
  for (std::size_t i = 0; i < sch.size(); ++i) {
    const double r = grid->nodes[i];
    const double drop = i == 0 ? 0.0 : 0.2 * cutoff_chi(r) / r;
    sch.f[i] = 1.0 / std::sqrt(1.0 - drop);
  }
  const double expect = 10.0 * (1.0 - std::sqrt(0.98)) * 4.0 * M_PI;
  CHECK(quasilocal_mass(sch, 10.0, 3) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(1.2630).epsilon(1e-4));
}

TEST_CASE("sphere families: flat closed forms and bump bracket") {
  const auto grid = std::make_shared<RadialGrid>(
      build_grid({Stretching::uniform, 200, 10.0, 0, 0}));
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};

  CHECK(sphere_family_radius(flat, SphereFamily::fixed_volume(4.0 * M_PI / 3.0), 3) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sphere_family_radius(flat, SphereFamily::fixed_proper_radius(2.0), 3) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sphere_family_radius(flat, SphereFamily::fixed_area(3.0), 3) == 3.0);
  CHECK_THROWS_AS(sphere_family_radius(flat, SphereFamily::fixed_volume(1e9), 3),
                  std::invalid_argument);

  const MetricProfile bp = bump(grid, 0.5, 2.0, 3);
  const double b =
      sphere_family_radius(bp, SphereFamily::fixed_volume(4.0 * M_PI / 3.0), 3);
  CHECK(b < 1.0);
  double f2min = 1e300, f2max = 0;
  for (double f : bp.f) {
    f2min = std::min(f2min, f * f);
    f2max = std::max(f2max, f * f);
  }
  const auto br = sphere_radius_bracket(SphereFamily::fixed_volume(4.0 * M_PI / 3.0),
                                        f2min, f2max, 3);
  CHECK(b >= br.lo);
  CHECK(b <= br.hi);

  // dense-quadrature oracle: midpoint rule on 200k panels over the same
  // interpolant
  const MonotoneCubic ff(grid->nodes, bp.f);
  const double target = 4.0 * M_PI / 3.0;
  auto integral = [&](double upper) {
    const int panels = 200000;
    const double h = upper / panels;
    double acc = 0.0;
    for (int q = 0; q < panels; ++q) {
      const double r = (q + 0.5) * h;
      acc += 4.0 * M_PI * ff(r) * r * r * h;
    }
    return acc;
  };
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (integral(mid) < target ? lo : hi) = mid;
  }
  CHECK(b == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-5));
}

TEST_CASE("adm mass: flat, closed tail, and linearity") {
  const auto grid = sinh_grid(256, 100.0);
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  const AdmReport zero = adm_mass(flat, 3);
  CHECK(zero.converged);
  CHECK(zero.mass == 0.0);

  auto tail_profile = [&](double m) {
    MetricProfile p{grid, {}, 0.0, 3};
    p.f.resize(grid->size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double r = grid->nodes[i];
      p.f[i] = i == 0 ? 1.0 : std::sqrt(1.0 + 2.0 * m * cutoff_chi(r) / r);
    }
    return p;
  };
  const AdmReport m1 = adm_mass(tail_profile(0.1), 3);
  CHECK(m1.converged);
  CHECK(m1.tail_ok);
  CHECK(std::abs(m1.mass - 16.0 * M_PI * 0.1) <= m1.error_bar);
  const AdmReport m2 = adm_mass(tail_profile(0.2), 3);
  CHECK(m2.mass == doctest::Approx(2.0 * m1.mass).epsilon(1e-10));
}

TEST_CASE("adm mass generalizes across dimensions") {
  // n = 4 tail w = 2m r^{-2}: mass = (n-1) vol(S^3) 2m = 3 (2 pi^2) 2m
  const auto grid = sinh_grid(256, 100.0);
  MetricProfile p{grid, {}, 0.0, 4};
  p.f.resize(grid->size());
  const double m = 0.05;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = grid->nodes[i];
    p.f[i] = i == 0 ? 1.0 : std::sqrt(1.0 + 2.0 * m * cutoff_chi(r) / (r * r));
  }
  const AdmReport rep = adm_mass(p, 4);
  CHECK(rep.converged);
  CHECK(rep.tail_ok);
  const double expect = 3.0 * 2.0 * M_PI * M_PI * 2.0 * m;
  CHECK(std::abs(rep.mass - expect) <= rep.error_bar + 1e-9);
}

TEST_CASE("adm mass is withheld for an oscillating tail sequence") {
  const auto grid = sinh_grid(256, 100.0);
  MetricProfile p{grid, {}, 0.0, 3};
  p.f.resize(grid->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = grid->nodes[i];
    const double ripple = 1.0 + 0.3 * std::sin(40.0 * std::log(1.0 + r));
    p.f[i] = i == 0 ? 1.0 : std::sqrt(1.0 + 0.2 * ripple * cutoff_chi(r) / r);
  }
  const AdmReport rep = adm_mass(p, 3);
  CHECK_FALSE(rep.converged);
  CHECK(std::isnan(rep.mass));
}

TEST_CASE("adm mass is withheld for slowly decaying tails") {
  const auto grid = sinh_grid(256, 100.0);
  MetricProfile p{grid, {}, 0.0, 3};
  p.f.resize(grid->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = grid->nodes[i];
    p.f[i] = i == 0 ? 1.0 : std::sqrt(1.0 + 0.1 * cutoff_chi(r) / std::sqrt(r));
  }
  const AdmReport rep = adm_mass(p, 3);
  CHECK_FALSE(rep.tail_ok);
  CHECK(std::isnan(rep.mass));
}

TEST_CASE("barrier functions: flat, substitution, identity, and limits") {
  const auto grid = std::make_shared<RadialGrid>(
      build_grid({Stretching::uniform, 64, 8.0, 0, 0}));
  const StencilSet st = derivative_stencils(*grid);

  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  const BarrierTriple bf = barrier_functions(flat, st, 0.0, 2.0);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CHECK(bf.u[i] == 0.0);
    CHECK(bf.v[i] == 0.0);
    CHECK(bf.y[i] == 0.0);
  }

  // t = 1, f^2 = 2 at r = 1, m = 2: u_2 = (2/2)(1/2 - 1) = -1/2
  MetricProfile p{grid, {}, 1.0, 3};
  p.f.resize(grid->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = grid->nodes[i];
    p.f[i] = std::sqrt(1.0 + r * r * std::exp(1.0 - r * r));
  }
  REQUIRE(p.f[8] == doctest::Approx(std::sqrt(2.0)));  // r = 1
  const BarrierTriple bt = barrier_functions(p, st, 1.0, 2.0);
  CHECK(bt.u[8] == doctest::Approx(-0.5).epsilon(1e-12));

  for (double m : {0.7, 1.5, 2.0}) {
    const BarrierTriple b = barrier_functions(p, st, 1.0, m);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(b.u[i] ==
            doctest::Approx(-b.v[i] / (p.f[i] * p.f[i])).epsilon(1e-12));
    if (m < 2.0) {
      CHECK(b.u[0] == 0.0);
      CHECK(b.v[0] == 0.0);
    }
    CHECK(b.y[0] == 0.0);
  }
  CHECK_THROWS_AS(barrier_functions(p, st, 1.0, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(barrier_functions(p, st, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("bound ledger: flat closed-form values") {
  const auto grid = sinh_grid(64, 30.0);
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  const BoundLedger lg = bound_ledger(flat, 3);
  CHECK(lg.c_f2_min == 1.0);
  CHECK(lg.c_f2_max == 1.0);
  CHECK(lg.c_u_plus == doctest::Approx(0.25));
  CHECK(lg.c_v_plus == doctest::Approx(1.0 / 6.0));
  CHECK(lg.c_r_min == doctest::Approx(-1.5));
  CHECK(lg.k2 == doctest::Approx(2.0));
  CHECK(lg.c_y_cap == doctest::Approx(-0.75));
  CHECK(lg.c_y_min <= 0.0);
  CHECK(lg.c_lambda2_min == doctest::Approx(-0.5));
  CHECK(lg.c_lambda2_max == doctest::Approx(1.0 / 3.0));
  // invariants
  CHECK(lg.c_w_min <= 0.0);
  CHECK(lg.c_w_max >= 0.0);
  CHECK(lg.c_u_plus >= 0.25);
  CHECK(lg.c_v_plus >= lg.c_f2_max * lg.c_f2_max / 6.0);
  CHECK(lg.c_r_min <= -1.5);
}

TEST_CASE("bound ledger matches a dense-grid scan of the defining extrema") {
  const auto coarse = sinh_grid(96, 30.0);
  const auto dense = sinh_grid(768, 30.0);
  const BoundLedger a = bound_ledger(bump(coarse, 0.5, 2.0, 3), 3);
  const BoundLedger b = bound_ledger(bump(dense, 0.5, 2.0, 3), 3);
  CHECK(a.c_f2_max == doctest::Approx(b.c_f2_max).epsilon(1e-4));
  CHECK(a.c_u_plus == doctest::Approx(b.c_u_plus).epsilon(5e-3));
  CHECK(a.c_v_plus == doctest::Approx(b.c_v_plus).epsilon(5e-3));
  CHECK(a.c_r_min == doctest::Approx(b.c_r_min).epsilon(5e-2));
  CHECK(a.c_y_min == doctest::Approx(b.c_y_min).epsilon(5e-2));
}

TEST_CASE("verify_decay: flat passes, corrupted lambda2 fails the upper bound") {
  const auto grid = sinh_grid(64, 30.0);
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.output_interval = 0.25;
  Trajectory traj = evolve(flat, cfg);
  const BoundLedger lg = bound_ledger(flat, 3);
  CHECK(verify_decay(traj, lg, 3, 0.0).all_pass());

  Trajectory corrupted = short_bump_run(64, 2.0, 0.5);
  const BoundLedger lgb = bound_ledger(corrupted.snapshots.front(), 3);
  const DecayReport clean = verify_decay(corrupted, lgb, 3, 1e-3);
  CHECK(clean.all_pass());
  for (auto& snap : corrupted.snapshots) {
    if (snap.time == 0.0) continue;
    for (std::size_t i = 1; i < snap.size(); ++i) {
      const double q = 1.0 - 1.0 / (snap.f[i] * snap.f[i]);
      const double scaled = std::min(10.0 * q, 0.9);
      snap.f[i] = 1.0 / std::sqrt(1.0 - scaled);
    }
  }
  const DecayReport rep = verify_decay(corrupted, lgb, 3, 1e-3);
  bool lambda2_upper_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "lambda2_upper" && !c.pass) lambda2_upper_failed = true;
  CHECK(lambda2_upper_failed);
}

TEST_CASE("auxiliary pde residuals: flat is exact, bump refines") {
  const auto grid = sinh_grid(48, 25.0);
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.output_interval = 0.25;
  const Trajectory ftraj = evolve(flat, cfg);
  const StencilSet st = derivative_stencils(*grid);
  for (auto which : {AuxiliaryPde::u_equation, AuxiliaryPde::v_equation,
                     AuxiliaryPde::y_equation})
    CHECK(residual_auxiliary_pdes(ftraj, st, 3, which, 1.5).max() == 0.0);

  const Trajectory t1 = short_bump_run(64, 2.0, 0.5);
  const Trajectory t2 = short_bump_run(128, 2.0, 0.25);
  const StencilSet s1 = derivative_stencils(*t1.snapshots.front().grid);
  const StencilSet s2 = derivative_stencils(*t2.snapshots.front().grid);
  const double r_min = 4.0 * t1.snapshots.front().grid->nodes[1];
  for (auto which : {AuxiliaryPde::u_equation, AuxiliaryPde::v_equation,
                     AuxiliaryPde::y_equation}) {
    const double r1 =
        residual_auxiliary_pdes(t1, s1, 3, which, 1.5, r_min).at_time(1.0);
    const double r2 =
        residual_auxiliary_pdes(t2, s2, 3, which, 1.5, r_min).at_time(1.0);
    CHECK(std::log2(r1 / r2) > 1.5);
  }
  CHECK_THROWS_AS(residual_auxiliary_pdes(t1, s1, 3, AuxiliaryPde::u_equation, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(residual_auxiliary_pdes(t1, s1, 3, AuxiliaryPde::y_equation, 0.5),
                  std::invalid_argument);
}

TEST_CASE("scalar evolution residual: flat exact, bump refines") {
  const auto grid = sinh_grid(48, 25.0);
  MetricProfile flat{grid, std::vector<double>(grid->size(), 1.0), 0.0, 3};
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.output_interval = 0.25;
  const StencilSet st = derivative_stencils(*grid);
  CHECK(residual_scalar_evolution(evolve(flat, cfg), st, 3).max() == 0.0);

  const Trajectory t1 = short_bump_run(64, 2.0, 0.5);
  const Trajectory t2 = short_bump_run(128, 2.0, 0.25);
  const StencilSet s1 = derivative_stencils(*t1.snapshots.front().grid);
  const StencilSet s2 = derivative_stencils(*t2.snapshots.front().grid);
  const double r_min = 4.0 * t1.snapshots.front().grid->nodes[1];
  const double r1 = residual_scalar_evolution(t1, s1, 3, r_min).at_time(1.0);
  const double r2 = residual_scalar_evolution(t2, s2, 3, r_min).at_time(1.0);
  CHECK(std::log2(r1 / r2) > 1.5);
}

TEST_CASE("quasi-local sign link along a bump run") {
  const Trajectory traj = short_bump_run(96, 3.0, 0.5);
  const auto grid = traj.snapshots.front().grid;
  const StencilSet st = derivative_stencils(*grid);
  const MassSeries ms = mass_series(traj, SphereFamily::fixed_area(1.0), 3);
  for (std::size_t k = 0; k < ms.times.size(); ++k) {
    const CurvatureField cf = curvature_field(traj.snapshots[k], st, 3);
    const MonotoneCubic l2(grid->nodes, cf.lambda2);
    if (std::abs(ms.mu[k]) > 1e-10)
      CHECK((ms.mu[k] > 0) == (l2(ms.radii[k]) > 0));
  }
}
