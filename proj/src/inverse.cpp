#include "superlens/inverse.hpp"

#include <cmath>

#include "superlens/errors.hpp"
#include "superlens/tfe.hpp"

namespace superlens {

namespace {

// Re sum_{N_lo < norm_inf(n) <= N_hi} c_n exp(i alpha_n . x), with a per-mode weight.
template <class Coef>
GridField synth_real(int half, int N_lo, int N_hi, int rows, int cols, Coef&& coef) {
  ModeArray c(half);
  for (const ModeIndex n : c.modes()) {
    const int r = norm_inf(n);
    if (r > N_lo && r <= N_hi) c[n] = coef(n);
  }
  GridField g = synthesize(c, half, rows, cols, true);
  return g;
}

}  // namespace

bool ReconCoefficients::is_usable(ModeIndex n) const {
  if (!f_delta.contains(n)) return false;
  const std::size_t k = static_cast<std::size_t>(n.n1 + f_delta.half1()) * (2 * f_delta.half2() + 1) +
                        static_cast<std::size_t>(n.n2 + f_delta.half2());
  return usable[k] != 0;
}

ReconCoefficients recon_coefficients(const SpectrumField& U_delta, const PhysicalConfig& cfg) {
  cfg.validate();
  ReconCoefficients rc;
  rc.f_delta = ModeArray(U_delta.half1(), U_delta.half2());
  rc.u0_subtracted = u0_top(cfg);
  rc.usable.assign(rc.f_delta.values().size(), 1);
  std::size_t k = 0;
  for (const ModeIndex n : U_delta.modes()) {
    const cplx u0 = (n == ModeIndex{0, 0}) ? rc.u0_subtracted : cplx{};
    try {
      rc.f_delta[n] = scaling_factor(n, cfg) * (U_delta[n] - u0);
    } catch (const NumericalError&) {
      rc.f_delta[n] = 0.0;
      rc.usable[k] = 0;
    }
    ++k;
  }
  return rc;
}

GridField reconstruct(const ReconCoefficients& rc, int N, int rows, int cols) {
  if (N < 0 || N > rc.f_delta.max_cutoff()) throw CutoffOutOfRange("reconstruction cut-off outside the data window");
  // Unusable modes hold 0, so they drop out of the sum.
  return synthesize(rc.f_delta, N, rows, cols, true);
}

ResidualCurve residual_curve(const SpectrumField& U_delta, const PhysicalConfig& cfg, int N_window) {
  const int W = U_delta.max_cutoff();
  if (N_window < 0 || N_window > W) throw CutoffOutOfRange("residual window exceeds the data window");
  const cplx u0 = u0_top(cfg);
  // Shell energies, accumulated from the outside in so the curve is monotone by construction.
  std::vector<double> shell(W + 1, 0.0);
  for (const ModeIndex n : U_delta.modes()) {
    const int r = norm_inf(n);
    if (r > W) continue;
    const cplx d = U_delta[n] - ((n == ModeIndex{0, 0}) ? u0 : cplx{});
    shell[r] += std::norm(d);
  }
  std::vector<double> tail(W + 1, 0.0);
  for (int N = W - 1; N >= 0; --N) tail[N] = tail[N + 1] + shell[N + 1];
  ResidualCurve c;
  for (int N = 0; N <= N_window; ++N) {
    c.N.push_back(N);
    c.residual.push_back(std::sqrt(tail[N]));
  }
  return c;
}

CutoffChoice choose_cutoff(const ResidualCurve& curve, double noise_norm, double c) {
  if (!(c > 0.0)) throw InvalidConfig("discrepancy constant c must be > 0");
  if (!(noise_norm >= 0.0)) throw InvalidConfig("noise norm must be >= 0");
  if (curve.N.empty()) throw InvalidConfig("empty residual curve");
  for (std::size_t i = 0; i < curve.N.size(); ++i)
    if (curve.residual[i] < c * noise_norm) return {curve.N[i], true};
  return {curve.N.back(), false};
}

ErrorDecomposition error_decomposition(const ModeArray& truth_g, const ModeArray& clean_top, const Measurement& meas,
                                       int N, const PhysicalConfig& cfg) {
  const int rows = meas.u_delta.rows(), cols = meas.u_delta.cols();
  if (rows != cols) throw GridMismatch("error decomposition expects a square measurement grid");
  const int W = nyquist_half(rows);
  if (N < 0 || N > W) throw CutoffOutOfRange("decomposition cut-off outside the Nyquist window");
  if (truth_g.max_cutoff() < W) throw CutoffOutOfRange("truth spectrum narrower than the Nyquist window");

  const SpectrumField D = dft2(meas.delta);

  ErrorDecomposition e;
  e.N = N;
  e.E1 = synth_real(W, -1, N, rows, cols, [&](ModeIndex n) -> cplx {
    try {
      const cplx r = clean_top.get(n) - u0_top(n, cfg) - cfg.epsilon * first_order_top(n, truth_g[n], cfg);
      return scaling_factor(n, cfg) * r;
    } catch (const NumericalError&) {
      return 0.0;
    }
  });
  e.E2 = synth_real(W, -1, N, rows, cols, [&](ModeIndex n) -> cplx {
    try {
      return scaling_factor(n, cfg) * D[n];
    } catch (const NumericalError&) {
      return 0.0;
    }
  });
  e.E3 = synth_real(W, N, W, rows, cols, [&](ModeIndex n) { return -cfg.epsilon * truth_g[n]; });
  e.norm_E1 = grid_l2_norm(e.E1);
  e.norm_E2 = grid_l2_norm(e.E2);
  e.norm_E3 = grid_l2_norm(e.E3);
  double beyond = 0.0;
  for (const ModeIndex n : truth_g.modes())
    if (norm_inf(n) > W) beyond += std::norm(cfg.epsilon * truth_g[n]);
  e.beyond_window = std::sqrt(beyond);
  return e;
}

std::vector<double> relative_error_curve(const ReconCoefficients& rc, const GridField& truth, int N_max) {
  const double tn = grid_l2_norm(truth);
  if (tn == 0.0) throw InvalidConfig("relative error undefined for a zero truth field");
  std::vector<double> out;
  for (int N = 0; N <= N_max; ++N) {
    const GridField r = reconstruct(rc, N, truth.rows(), truth.cols());
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) acc += std::norm(r.values()[i] - truth.values()[i]);
    out.push_back(std::sqrt(acc / static_cast<double>(r.size())) / tn);
  }
  return out;
}

}  // namespace superlens
