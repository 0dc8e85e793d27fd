#pragma once

// Frozen reference values computed with an independent computer-algebra
// oracle (symbolic differentiation, 22 digits, truncated to double).

namespace oracle {

// profile f(r) = 1 + 0.1 r^2 exp(-r^2)
inline double bump_profile(double r) {
  return 1.0 + 0.1 * r * r * std::exp(-r * r);
}

// master-equation rhs for the profile above at r in {1/4, 1/2, 1, 2}
inline constexpr double kMasterRhsRadii[4] = {0.25, 0.5, 1.0, 2.0};
inline constexpr double kMasterRhsN3[4] = {
    -0.05997813205037868590284, -0.1750266738807558351291,
    -0.2091649400524493072903, 0.04217621072656106185548};
inline constexpr double kMasterRhsN5[4] = {
    -0.08236677647705675744768, -0.2499320170408812883078,
    -0.3537060518425927938739, 0.01289783032999715013697};

// DeTurck 1-form xi_1 for the same profile, n = 3
inline constexpr double kXiN3[4] = {
    0.09088649572366427314607, 0.1359327746820060061052,
    0.07492924106665459123805, -0.01446582314829048277919};

// Cartesian DeTurck rhs (-2 Ric + grad W + grad W) at (0.3, -0.2, 0.5) for
// the manufactured perturbation below; component order xx, xy, xz, yy, yz, zz
inline constexpr double kCartPoint[3] = {0.3, -0.2, 0.5};
inline constexpr double kCartRhs[6] = {
    -0.1543460347628335129074, 0.007719714068667064737568,
    0.02466320288738245853087, 0.1165027354548437376732,
    0.008737811489688620966844, -0.05400852960274502534706};
inline constexpr double kCartScalar = 0.07334583398567805744814;

// manufactured metric perturbation used for the Cartesian oracle
inline void cart_perturbation(double x, double y, double z, double out[6]) {
  const double b = std::exp(-(x * x + y * y + z * z));
  out[0] = 0.05 * b;
  out[1] = 0.015 * x * y * b;
  out[2] = -0.02 * x * z * b;
  out[3] = -0.03 * b * (1.0 + 0.5 * x);
  out[4] = 0.01 * y * z * b;
  out[5] = 0.02 * b * (1.0 + 0.3 * y);
}

}  // namespace oracle
