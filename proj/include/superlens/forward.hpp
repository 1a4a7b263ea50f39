#pragma once

#include <functional>
#include <string>
#include <vector>

#include "superlens/core.hpp"
#include "superlens/profile.hpp"
#include "superlens/spectral.hpp"

namespace superlens {

enum class SolverKind { DenseDirect, Iterative };

[[nodiscard]] std::string to_string(SolverKind kind);
/// "dense" or "iterative". Throws InvalidConfig otherwise.
[[nodiscard]] SolverKind solver_kind_from_string(const std::string& name);

/// Discretization of the transformed domain (0, a) x unit cell.
///
/// Laterally the field is expanded in modes norm_inf(n) <= N_f and variable
/// coefficients are applied on an I x I collocation grid. Vertically
/// u is sampled at z_j = j a / M, j = 0..M, with finite differences of order fd_order.
struct Discretization {
  int I = 99;
  int N_f = 12;
  int M = 64;
  int fd_order = 4;
  SolverKind solver = SolverKind::Iterative;
  double iter_tol = 1e-10;
  int iter_max = 400;

  /// Throws NyquistViolation or InvalidConfig.
  void validate() const;

  /// Reduced resolution for quick runs (I = 33, N_f = 8, M = 32).
  static Discretization fast();
};

/// Above this many unknowns the dense-direct solver refuses to run.
inline constexpr std::size_t kDenseUnknownLimit = 4096;

/// Coefficients of the transformed Helmholtz operator
///   c1 (dxx + dyy) + c2 dzz - c3 dxz - c4 dyz - c5 dz + c1 omega^2
/// on the I x I x (M + 1) grid. Lateral factors are stored once; the z-dependence
/// enters only through powers of (a - z), so c2..c5 are evaluated on access.
class CoefficientFields {
 public:
  CoefficientFields(int rows, int cols, int M, double a, std::vector<double> f, std::vector<double> fx,
                    std::vector<double> fy, std::vector<double> lap_f);

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] int levels() const { return M_ + 1; }
  [[nodiscard]] double z(int j) const { return a_ * j / M_; }

  // i is the row-major lateral index, j the z level.
  [[nodiscard]] double c1(std::size_t i) const;
  [[nodiscard]] double c2(int j, std::size_t i) const;
  [[nodiscard]] double c3(int j, std::size_t i) const;
  [[nodiscard]] double c4(int j, std::size_t i) const;
  [[nodiscard]] double c5(int j, std::size_t i) const;

  [[nodiscard]] const std::vector<double>& f() const { return f_; }
  [[nodiscard]] const std::vector<double>& fx() const { return fx_; }
  [[nodiscard]] const std::vector<double>& fy() const { return fy_; }
  [[nodiscard]] const std::vector<double>& lap_f() const { return lap_; }
  [[nodiscard]] bool flat() const { return flat_; }

 private:
  int rows_, cols_, M_;
  double a_;
  std::vector<double> f_, fx_, fy_, lap_;
  bool flat_ = true;
};

/// Samples f = epsilon g and derivatives on the I x I grid and builds the coefficients.
/// Profiles without pointwise derivatives (image indicators) are replaced by their spectrum
/// truncated at N_f. Throws ProfileTooTall if epsilon sup|g| >= a or f >= a at a grid point.
[[nodiscard]] CoefficientFields coefficient_fields(const SurfaceProfile& profile, const PhysicalConfig& cfg,
                                                   const Discretization& disc);

/// Slab closure for one mode: d/dz u_n(a+) = Z u_n(a) + zeta.
struct SlabImpedance {
  cplx Z;
  cplx zeta;
  cplx S;  // sin(eta h) / eta
  cplx C;  // cos(eta h)

  /// u_n(b) from u_n(a).
  [[nodiscard]] cplx top_value(cplx u_a) const { return u_a * C + (Z * u_a + zeta) * S; }
};

/// Throws ResonantMode, DegenerateSlab.
[[nodiscard]] SlabImpedance slab_impedance(ModeIndex n, const PhysicalConfig& cfg);

struct ForwardSolution {
  Discretization disc;
  /// u_n(z_j) for j = 0..M, level-major; each level holds the (2 N_f + 1)^2 modes row-major.
  std::vector<cplx> interior;
  ModeArray top;        // u_n(b), norm_inf(n) <= N_f
  GridField top_field;  // u(x_i, b) on the I x I grid
  int iterations = 0;
  double residual = 0.0;

  [[nodiscard]] cplx interior_mode(int level, ModeIndex n) const;
};

/// Called after every GMRES iteration with (iteration, relative residual estimate).
using ProgressFn = std::function<void(int, double)>;

/// Solves the full transformed problem. Throws NoConvergence, ProfileTooTall, ResonantMode,
/// DegenerateSlab, InvariantError (dense-direct above kDenseUnknownLimit).
[[nodiscard]] ForwardSolution solve_forward(const SurfaceProfile& profile, const PhysicalConfig& cfg,
                                            const Discretization& disc, const ProgressFn& progress = {});

/// Linearized data u_n^(0)(b) + epsilon u_n^(1)(b) over the window of g.
/// Noise-free and with zero remainder: only for round-trip tests of the inversion.
[[nodiscard]] ModeArray synthesize_linear_data(const ModeArray& g, const PhysicalConfig& cfg);

/// Binary dump, little-endian:
///   "SLFS" | u32 version = 1 | i32 I | i32 N_f | i32 M | i32 iterations | f64 residual
///   | top: (2 N_f + 1)^2 x (f64 re, f64 im) | top_field: I^2 complex | interior: (M + 1)(2 N_f + 1)^2 complex
void write_solution(const std::string& path, const ForwardSolution& sol);
[[nodiscard]] ForwardSolution read_solution(const std::string& path);

}  // namespace superlens
