#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "superlens/core.hpp"
#include "superlens/spectral.hpp"

namespace superlens {

/// Complex white noise: Re and Im of every sample are independent N(0, sigma^2).
struct NoiseSpec {
  double sigma = 0.005;
  std::uint64_t seed = 20240501;
};

/// Reported as the SNR of noiseless data.
inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

struct Measurement {
  GridField u_delta;  // u(x_i, b) + delta_i
  GridField delta;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double snr = kInfiniteSnr;

  /// u_delta - delta.
  [[nodiscard]] GridField clean() const;
};

/// Deterministic noise stream. Sample i (row-major) draws the SplitMix64 outputs with
/// counters 2i and 2i+1 of `seed`, maps them to u1 in (0, 1] and u2 in [0, 1) and applies
/// Box-Muller: delta_i = sigma sqrt(-2 ln u1) (cos 2 pi u2 + i sin 2 pi u2).
[[nodiscard]] GridField noise_grid(int rows, int cols, const NoiseSpec& spec);

/// SplitMix64 output number `counter` of the stream started at `seed`.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter);

[[nodiscard]] Measurement add_noise(const GridField& u, const NoiseSpec& spec);

/// Same noise shape as add_noise(u, {1, seed}), rescaled so that the realized SNR equals
/// target_snr exactly. The effective sigma is stored in the result.
[[nodiscard]] Measurement add_noise_at_snr(const GridField& u, double target_snr, std::uint64_t seed);

/// |u|^2 / |delta|^2 in the grid norm. Throws ZeroNoise if delta vanishes.
[[nodiscard]] double snr_of(const GridField& u, const GridField& delta);

struct ModeNoiseStat {
  ModeIndex n;
  double std_re = 0.0;
  double std_im = 0.0;
  double cov = 0.0;  // sample covariance of (Re U_n, Im U_n)
};

/// Empirical per-mode statistics of dft2 over `trials` noise grids (trial t uses seed + t),
/// for every mode of the Nyquist window of an I x I grid. Throws InvalidConfig if trials < 100.
[[nodiscard]] std::vector<ModeNoiseStat> noise_dft_stats(const NoiseSpec& spec, int I, int trials);

}  // namespace superlens
