#include <cmath>

#include "doctest.h"
#include "superlens/errors.hpp"
#include "superlens/forward.hpp"
#include "superlens/inverse.hpp"
#include "superlens/profile.hpp"
#include "superlens/tfe.hpp"

using namespace superlens;

namespace {

constexpr int kI = 21;

PhysicalConfig lens() {
  PhysicalConfig cfg;
  cfg.epsilon = 0.001;
  return cfg;
}

// Noise-free linearized data sampled on the kI x kI grid.
GridField linear_grid(const SurfaceProfile& p, const PhysicalConfig& cfg) {
  const int W = nyquist_half(kI);
  const ModeArray g = profile_spectrum(p, W, 63);
  return synthesize(synthesize_linear_data(g, cfg), W, kI, kI, false);
}

GridField flat_grid(const PhysicalConfig& cfg) { return GridField(kI, kI, u0_top(cfg)); }

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

struct SolvedCase {
  ForwardSolution sol;
  ModeArray g;
};

SolvedCase solve_small(double eps) {
  PhysicalConfig cfg = lens();
  cfg.epsilon = eps;
  Discretization d;
  d.I = kI;
  d.N_f = 6;
  d.M = 32;
  return {solve_forward(make_profile1(), cfg, d), profile_spectrum(make_profile1(), nyquist_half(kI), 63)};
}

}  // namespace

TEST_CASE("linear data round trip") {
  const PhysicalConfig cfg = lens();
  const GridField data = linear_grid(make_profile1(), cfg);
  const ReconCoefficients rc = recon_coefficients(dft2(data), cfg);
  const ModeArray g = profile_spectrum(make_profile1(), 3, 63);
  for (const ModeIndex n : mode_set(3)) {
    CHECK(rc.is_usable(n));
    CHECK(std::abs(rc.f_delta[n] - cfg.epsilon * g[n]) < 1e-10 * cfg.epsilon);
  }
  CHECK(rc.u0_subtracted == u0_top(cfg));

  const GridField r = reconstruct(rc, 3, kI, kI);
  for (int i1 = 0; i1 < kI; ++i1)
    for (int i2 = 0; i2 < kI; ++i2) {
      const double want = cfg.epsilon * profile1(static_cast<double>(i1) / kI, static_cast<double>(i2) / kI);
      CHECK(std::abs(r(i1, i2) - want) < 1e-10 * cfg.epsilon);
    }
  CHECK_THROWS_AS((void)reconstruct(rc, 11, kI, kI), CutoffOutOfRange);
  CHECK_THROWS_AS((void)reconstruct(rc, -1, kI, kI), CutoffOutOfRange);

  GridField truth(kI, kI);
  for (int i1 = 0; i1 < kI; ++i1)
    for (int i2 = 0; i2 < kI; ++i2)
      truth(i1, i2) = cfg.epsilon * profile1(static_cast<double>(i1) / kI, static_cast<double>(i2) / kI);
  const auto rel = relative_error_curve(rc, truth, 5);
  CHECK(rel.size() == 6u);
  CHECK(rel[3] < 1e-8);
  CHECK(rel[0] > 0.1);
}

TEST_CASE("flat data reconstructs nothing") {
  const PhysicalConfig cfg = lens();
  const ReconCoefficients rc = recon_coefficients(dft2(flat_grid(cfg)), cfg);
  for (const ModeIndex n : rc.f_delta.modes()) CHECK(std::abs(rc.f_delta[n]) < 1e-14);
  const auto curve = residual_curve(dft2(flat_grid(cfg)), cfg, 10);
  for (const double r : curve.residual) CHECK(r < 1e-16);
}

TEST_CASE("noise on flat data propagates through s_n") {
  const PhysicalConfig cfg = lens();
  const double sigma = 1e-4;
  const int trials = 300;
  const ModeIndex n{1, 1};
  double m1 = 0, m2 = 0;
  for (int t = 0; t < trials; ++t) {
    const Measurement m = add_noise(flat_grid(cfg), {sigma, static_cast<std::uint64_t>(100 + t)});
    const double v = recon_coefficients(dft2(m.u_delta), cfg).f_delta[n].real();
    m1 += v;
    m2 += v * v;
  }
  m1 /= trials;
  const double sd = std::sqrt((m2 - trials * m1 * m1) / (trials - 1));
  const double want = std::abs(scaling_factor(n, cfg)) * sigma / kI;
  // sd of the sample sd ~ 4%, sd of the mean ~ 6% of want
  CHECK(sd == doctest::Approx(want).epsilon(0.15));
  CHECK(std::abs(m1) < 0.25 * want);
}

TEST_CASE("residual curve") {
  PhysicalConfig cfg = lens();
  const GridField clean = linear_grid(make_profile1(), cfg);
  const Measurement m = add_noise(clean, {0.005, 3});
  const SpectrumField U = dft2(m.u_delta);
  const auto curve = residual_curve(U, cfg, 10);
  REQUIRE(curve.N.size() == 11u);
  for (std::size_t k = 0; k < curve.N.size(); ++k) CHECK(curve.N[k] == static_cast<int>(k));
  for (std::size_t k = 1; k < curve.residual.size(); ++k) CHECK(curve.residual[k] <= curve.residual[k - 1]);
  CHECK(curve.residual.back() == 0.0);
  // residual at N = 0 is everything but the mean, by Parseval
  double acc = 0.0;
  for (const ModeIndex n : U.modes())
    if (norm_inf(n) > 0) acc += std::norm(U[n] - u0_top(n, cfg));
  CHECK(curve.residual[0] == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));

  // a shorter reported window keeps the full tail
  const auto shorter = residual_curve(U, cfg, 4);
  REQUIRE(shorter.residual.size() == 5u);
  for (int k = 0; k <= 4; ++k) CHECK(shorter.residual[k] == curve.residual[k]);
  CHECK_THROWS_AS((void)residual_curve(U, cfg, 11), CutoffOutOfRange);
}

TEST_CASE("choose_cutoff") {
  ResidualCurve c{{0, 1, 2, 3, 4}, {5.0, 3.0, 2.0, 0.5, 0.0}};
  CHECK(choose_cutoff(c, 1.0, 1.0).N == 3);
  CHECK(choose_cutoff(c, 1.0, 1.0).satisfied);
  CHECK(choose_cutoff(c, 2.0, 1.0).N == 3);  // strict inequality
  CHECK(choose_cutoff(c, 1.0, 100.0).N == 0);
  CHECK(choose_cutoff(c, 0.0, 1.0).N == 4);
  CHECK_FALSE(choose_cutoff(c, 0.0, 1.0).satisfied);
  CHECK_THROWS_AS((void)choose_cutoff(c, 1.0, 0.0), InvalidConfig);
  CHECK_THROWS_AS((void)choose_cutoff(c, -1.0, 1.0), InvalidConfig);

  int prev = 1000;
  for (double noise : {0.0, 0.1, 0.3, 0.6, 1.0, 2.5, 4.0, 10.0}) {
    const int N = choose_cutoff(c, noise, 1.0).N;
    CHECK(N <= prev);
    prev = N;
  }
}

TEST_CASE("error decomposition of linear data vanishes") {
  const PhysicalConfig cfg = lens();
  const int W = nyquist_half(kI);
  const ModeArray g = profile_spectrum(make_profile1(), W, 63);
  const ModeArray lin = synthesize_linear_data(g, cfg);
  const Measurement m = add_noise(synthesize(lin, W, kI, kI, false), {0.0, 1});
  const ErrorDecomposition e = error_decomposition(g, lin, m, 3, cfg);
  CHECK(e.norm_E1 < 1e-10 * cfg.epsilon);
  CHECK(e.norm_E2 == 0.0);
  CHECK(e.norm_E3 < 1e-12 * cfg.epsilon);
  CHECK_THROWS_AS((void)error_decomposition(profile_spectrum(make_profile1(), 4, 63), lin, m, 3, cfg),
                  CutoffOutOfRange);
}

TEST_CASE("error decomposition identity on a full forward solve") {
  const PhysicalConfig cfg = lens();
  const SolvedCase s = solve_small(cfg.epsilon);
  const int W = nyquist_half(kI);
  const Measurement m = add_noise(s.sol.top_field, {2e-5, 8});
  const ReconCoefficients rc = recon_coefficients(dft2(m.u_delta), cfg);
  GridField f_trunc(kI, kI);
  {
    ModeArray eg(W);
    for (const ModeIndex n : eg.modes()) eg[n] = cfg.epsilon * s.g[n];
    f_trunc = synthesize(eg, W, kI, kI, true);
  }
  for (int N : {0, 2, 3, 6}) {
    const ErrorDecomposition e = error_decomposition(s.g, s.sol.top, m, N, cfg);
    const GridField r = reconstruct(rc, N, kI, kI);
    GridField sum(kI, kI);
    for (std::size_t i = 0; i < sum.size(); ++i)
      sum.values()[i] = f_trunc.values()[i] + e.E1.values()[i] + e.E2.values()[i] + e.E3.values()[i];
    CHECK(max_abs_diff(r, sum) < 1e-10 * cfg.epsilon);
    CHECK(e.beyond_window < 1e-12);
  }

  // E2 is linear in the noise
  const Measurement m2 = add_noise(s.sol.top_field, {4e-5, 8});
  const double e2a = error_decomposition(s.g, s.sol.top, m, 3, cfg).norm_E2;
  const double e2b = error_decomposition(s.g, s.sol.top, m2, 3, cfg).norm_E2;
  CHECK(e2b / e2a == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("linearization remainder is second order") {
  Measurement m;
  double e1[2];
  const double eps[2] = {0.001, 0.002};
  for (int k = 0; k < 2; ++k) {
    PhysicalConfig cfg = lens();
    cfg.epsilon = eps[k];
    const SolvedCase s = solve_small(eps[k]);
    m = add_noise(s.sol.top_field, {0.0, 1});
    e1[k] = error_decomposition(s.g, s.sol.top, m, 3, cfg).norm_E1;
  }
  MESSAGE("E1 ratio " << e1[1] / e1[0]);
  CHECK(e1[1] / e1[0] == doctest::Approx(4.0).epsilon(0.3));
}
