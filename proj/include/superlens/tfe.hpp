#pragma once

#include <array>
#include <vector>

#include "superlens/core.hpp"
#include "superlens/spectral.hpp"

namespace superlens {

/// 4x4 system matrix of the per-mode layered problem for (A, B, C, D).
using TransferMatrix = std::array<std::array<cplx, 4>, 4>;

[[nodiscard]] TransferMatrix transfer_matrix(ModeIndex n, const PhysicalConfig& cfg);

/// Relative threshold (against the Hadamard bound of M_n) under which Sigma_n is treated as singular.
inline constexpr double kSingularTol = 1e-12;

/// Closed-form det(M_n). Throws NearSingularSystem when |Sigma_n| is below kSingularTol
/// times the Hadamard bound of M_n (the smaller of the row and column versions).
[[nodiscard]] cplx sigma_n(ModeIndex n, const PhysicalConfig& cfg);

/// Zeroth-order (flat surface) solution. Only the n = 0 mode is excited.
struct ZerothOrder {
  cplx A, B, C, D;
  cplx gamma0, eta0;
  double a = 0.0;
  double b = 0.0;

  /// u0(z) for 0 <= z <= b; the slab branch is used for z >= a.
  [[nodiscard]] cplx value(double z) const;
  /// d/dz u0 from below (z <= a, lower branch) or above (slab branch).
  [[nodiscard]] cplx dz_lower(double z) const;
  [[nodiscard]] cplx dz_slab(double z) const;
};

[[nodiscard]] ZerothOrder solve_zeroth(const PhysicalConfig& cfg);

/// u_0^(0)(b); the zeroth-order top coefficient of every other mode is zero.
[[nodiscard]] cplx u0_top(const PhysicalConfig& cfg);
[[nodiscard]] cplx u0_top(ModeIndex n, const PhysicalConfig& cfg);

/// Closed-form u_n^(1)(b) = -(8i / (rho Sigma_n)) C_0 gamma_0 gamma_n eta_n g_n.
[[nodiscard]] cplx first_order_top(ModeIndex n, cplx g_n, const PhysicalConfig& cfg);

/// Independent numerical route to u_n^(1)(b): builds the first-order source from the
/// zeroth-order field, integrates the variation-of-parameters particular solution with
/// composite Simpson (z_steps intervals, >= 64) and solves the 4x4 interface system by LU.
[[nodiscard]] cplx first_order_ode_oracle(ModeIndex n, cplx g_n, const PhysicalConfig& cfg, int z_steps);

/// s_n = -rho^2 Sigma_0 Sigma_n / (16 tau gamma_0 eta_0 gamma_n eta_n), so that g_n = s_n u_n^(1)(b).
[[nodiscard]] cplx scaling_factor(ModeIndex n, const PhysicalConfig& cfg);

/// Reduced forms: no slab (rho = kappa = 1) and ideal lens (rho = kappa = -1).
[[nodiscard]] cplx scaling_factor_no_slab(ModeIndex n, const PhysicalConfig& cfg);
[[nodiscard]] cplx scaling_factor_ideal_lens(ModeIndex n, const PhysicalConfig& cfg);

struct ScalingRow {
  ModeIndex n;
  double abs_alpha = 0.0;
  cplx s;
  double abs_s = 0.0;
  double log10_abs_s = 0.0;
  bool resonant = false;
};

/// |s_n| over norm_inf(n) <= N_max in mode_set order. Resonant modes are kept and flagged.
[[nodiscard]] std::vector<ScalingRow> scaling_sweep(const PhysicalConfig& cfg, int n_max);

/// Closed forms of two integrals over [0, a] used when simplifying the first-order coefficients.
/// int sin(gn z) sin(g0 z) dz
[[nodiscard]] cplx integral_sin_sin(cplx gn, cplx g0, double a);
/// int sin(gn z) (a - z) cos(g0 z) dz
[[nodiscard]] cplx integral_sin_ramp_cos(cplx gn, cplx g0, double a);

}  // namespace superlens
