#pragma once

#include <vector>

#include "superlens/core.hpp"
#include "superlens/measurement.hpp"
#include "superlens/spectral.hpp"

namespace superlens {

/// f^delta_n = s_n (U^delta_n - u_n^(0)(b)) over the window of the data spectrum.
struct ReconCoefficients {
  ModeArray f_delta;
  std::vector<char> usable;  // per mode in ModeArray order; 0 where s_n could not be formed
  cplx u0_subtracted;

  [[nodiscard]] bool is_usable(ModeIndex n) const;
};

[[nodiscard]] ReconCoefficients recon_coefficients(const SpectrumField& U_delta, const PhysicalConfig& cfg);

/// Re sum_{norm_inf(n) <= N} f^delta_n exp(i alpha_n . x) on a rows x cols grid; unusable modes are skipped.
/// Throws CutoffOutOfRange.
[[nodiscard]] GridField reconstruct(const ReconCoefficients& rc, int N, int rows, int cols);

struct ResidualCurve {
  std::vector<int> N;
  std::vector<double> residual;
};

/// ||R^{delta,N}|| = sqrt(sum over N < norm_inf(n) <= W of |U^delta_n - u_n^(0)(b)|^2) for N = 0..N_window,
/// where W is the largest cut-off of the data window.
[[nodiscard]] ResidualCurve residual_curve(const SpectrumField& U_delta, const PhysicalConfig& cfg, int N_window);

struct CutoffChoice {
  int N = 0;
  bool satisfied = true;  // false: no N met the bound and N is the largest available
};

/// Smallest N with residual < c * noise_norm. Throws InvalidConfig unless c > 0 and noise_norm >= 0.
[[nodiscard]] CutoffChoice choose_cutoff(const ResidualCurve& curve, double noise_norm, double c);

/// f^{delta,N} - f = E1 + E2 + E3 on the grid, with f truncated to the Nyquist window.
/// E1: linearization remainder, E2: noise, E3: spectral cut-off (minus the truth tail beyond N).
struct ErrorDecomposition {
  int N = 0;
  GridField E1, E2, E3;
  double norm_E1 = 0.0, norm_E2 = 0.0, norm_E3 = 0.0;
  /// Norm of the truth coefficients outside the Nyquist window (not part of the identity).
  double beyond_window = 0.0;
};

/// truth_g: spectrum of g on a window at least as wide as the data's Nyquist window.
/// clean_top: noiseless u_n(b) (taken as 0 outside its window); the identity is exact when the clean
/// part of the measurement was synthesized from these coefficients. The measurement grid fixes the window.
[[nodiscard]] ErrorDecomposition error_decomposition(const ModeArray& truth_g, const ModeArray& clean_top,
                                                     const Measurement& meas, int N, const PhysicalConfig& cfg);

/// ||f - f^{delta,N}|| / ||f|| in the grid norm, for N = 0..N_max. truth holds samples of f.
[[nodiscard]] std::vector<double> relative_error_curve(const ReconCoefficients& rc, const GridField& truth, int N_max);

}  // namespace superlens
