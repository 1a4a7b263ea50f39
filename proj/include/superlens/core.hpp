#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <complex>
#include <numbers>
#include <vector>

namespace superlens {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Physical configuration of the grating + slab problem.
///
/// Sound speed is normalized to one, so `omega` is also the free-space
/// wavenumber. The surface z = epsilon * g(x, y) sits below the slab
/// a < z < b whose medium has density `rho` and bulk modulus `kappa`.
/// Defaults correspond to the reference experiment (wavelength 1.1, unit
/// periods, a = h = 0.1, rho = kappa = -1 + 0.01i, epsilon = 1e-3).
struct PhysicalConfig {
  double omega = kTwoPi / 1.1;
  double period1 = 1.0;
  double period2 = 1.0;
  double a = 0.1;
  double b = 0.2;
  cplx rho{-1.0, 0.01};
  cplx kappa{-1.0, 0.01};
  double epsilon = 1e-3;

  [[nodiscard]] double h() const { return b - a; }
  [[nodiscard]] double wavelength() const { return kTwoPi / omega; }

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;

  static PhysicalConfig from_wavelength(double wavelength);
};

struct ModeIndex {
  int n1 = 0;
  int n2 = 0;

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
  [[nodiscard]] ModeIndex operator-() const { return {-n1, -n2}; }
};

/// max(|n1|, |n2|)
[[nodiscard]] inline int norm_inf(ModeIndex n) {
  return std::max(std::abs(n.n1), std::abs(n.n2));
}

/// Spectral scalars of one lateral mode.
struct ModeScalars {
  std::array<double, 2> alpha{};
  cplx gamma;
  cplx eta;
  cplx phi;  // eta / rho + gamma
  cplx psi;  // eta / rho - gamma
};

/// Square root with Im >= 0 enforced by negation.
[[nodiscard]] cplx branch_sqrt(cplx z);

[[nodiscard]] std::array<double, 2> alpha_of(ModeIndex n, const PhysicalConfig& cfg);
[[nodiscard]] double alpha_sq(ModeIndex n, const PhysicalConfig& cfg);

/// Relative tolerance (times omega) below which gamma_n or eta_n count as resonant.
inline constexpr double kResonanceTol = 1e-12;

/// sqrt(omega^2 - |alpha_n|^2), Im >= 0. Throws ResonantMode near zero.
[[nodiscard]] cplx gamma_of(ModeIndex n, const PhysicalConfig& cfg);
/// sqrt((rho/kappa) omega^2 - |alpha_n|^2), Im >= 0. Throws ResonantMode near zero.
[[nodiscard]] cplx eta_of(ModeIndex n, const PhysicalConfig& cfg);
[[nodiscard]] ModeScalars mode_scalars(ModeIndex n, const PhysicalConfig& cfg);

/// Source term of the top boundary condition: -2 i omega exp(-i omega b).
[[nodiscard]] cplx tau_of(const PhysicalConfig& cfg);

/// All n with norm_inf(n) <= N, row-major (n1 outer, ascending).
[[nodiscard]] std::vector<ModeIndex> mode_set(int N);

}  // namespace superlens
