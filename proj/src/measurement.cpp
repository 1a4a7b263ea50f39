#include "superlens/measurement.hpp"

#include <cmath>

#include "superlens/errors.hpp"

namespace superlens {

std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GridField noise_grid(int rows, int cols, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw InvalidConfig("noise sigma must be >= 0");
  GridField d(rows, cols);
  if (spec.sigma == 0.0) return d;
  constexpr double kUnit = 0x1.0p-53;
  auto vals = d.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double u1 = static_cast<double>((splitmix64(spec.seed, 2 * i) >> 11) + 1) * kUnit;
    const double u2 = static_cast<double>(splitmix64(spec.seed, 2 * i + 1) >> 11) * kUnit;
    const double r = spec.sigma * std::sqrt(-2.0 * std::log(u1));
    vals[i] = std::polar(r, kTwoPi * u2);
  }
  return d;
}

GridField Measurement::clean() const {
  GridField u(u_delta.rows(), u_delta.cols());
  for (std::size_t i = 0; i < u.size(); ++i) u.values()[i] = u_delta.values()[i] - delta.values()[i];
  return u;
}

double snr_of(const GridField& u, const GridField& delta) {
  if (u.rows() != delta.rows() || u.cols() != delta.cols()) throw GridMismatch("snr_of: grid shapes differ");
  const double dn = grid_l2_norm(delta);
  if (dn == 0.0) throw ZeroNoise("snr_of: noise is identically zero");
  const double un = grid_l2_norm(u);
  return (un * un) / (dn * dn);
}

namespace {

Measurement assemble(const GridField& u, GridField delta, double sigma, std::uint64_t seed) {
  Measurement m;
  m.u_delta = GridField(u.rows(), u.cols());
  for (std::size_t i = 0; i < u.size(); ++i) m.u_delta.values()[i] = u.values()[i] + delta.values()[i];
  m.delta = std::move(delta);
  m.sigma = sigma;
  m.seed = seed;
  m.snr = sigma == 0.0 ? kInfiniteSnr : snr_of(u, m.delta);
  return m;
}

}  // namespace

Measurement add_noise(const GridField& u, const NoiseSpec& spec) {
  return assemble(u, noise_grid(u.rows(), u.cols(), spec), spec.sigma, spec.seed);
}

Measurement add_noise_at_snr(const GridField& u, double target_snr, std::uint64_t seed) {
  if (!(target_snr > 0.0) || std::isinf(target_snr)) throw InvalidConfig("target SNR must be positive and finite");
  const GridField unit = noise_grid(u.rows(), u.cols(), {1.0, seed});
  const double un = grid_l2_norm(u);
  if (un == 0.0) throw InvalidConfig("cannot set an SNR for identically zero data");
  const double scale = un / (std::sqrt(target_snr) * grid_l2_norm(unit));
  GridField delta(u.rows(), u.cols());
  for (std::size_t i = 0; i < delta.size(); ++i) delta.values()[i] = scale * unit.values()[i];
  return assemble(u, std::move(delta), scale, seed);
}

std::vector<ModeNoiseStat> noise_dft_stats(const NoiseSpec& spec, int I, int trials) {
  if (trials < 100) throw InvalidConfig("noise_dft_stats needs at least 100 trials");
  if (I < 1) throw InvalidConfig("grid size must be positive");
  const int N = nyquist_half(I);
  const WindowTransform tr(N, I, I);
  const std::size_t K = tr.mode_count();
  std::vector<double> sr(K), si(K), srr(K), sii(K), sri(K);
  std::vector<cplx> U(K);
  for (int t = 0; t < trials; ++t) {
    const GridField d = noise_grid(I, I, {spec.sigma, spec.seed + static_cast<std::uint64_t>(t)});
    tr.analyze(d.values(), U);
    for (std::size_t k = 0; k < K; ++k) {
      const double re = U[k].real(), im = U[k].imag();
      sr[k] += re;
      si[k] += im;
      srr[k] += re * re;
      sii[k] += im * im;
      sri[k] += re * im;
    }
  }
  const double n = trials;
  std::vector<ModeNoiseStat> out;
  out.reserve(K);
  std::size_t k = 0;
  for (const ModeIndex m : mode_set(N)) {
    const double mr = sr[k] / n, mi = si[k] / n;
    ModeNoiseStat s{m};
    s.std_re = std::sqrt(std::max(0.0, (srr[k] - n * mr * mr) / (n - 1)));
    s.std_im = std::sqrt(std::max(0.0, (sii[k] - n * mi * mi) / (n - 1)));
    s.cov = (sri[k] - n * mr * mi) / (n - 1);
    out.push_back(s);
    ++k;
  }
  return out;
}

}  // namespace superlens
