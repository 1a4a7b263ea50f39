#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "superlens/errors.hpp"
#include "superlens/tfe.hpp"

using namespace superlens;

namespace {

const cplx kI{0.0, 1.0};

// Composite Simpson on [0, a] with n (even) intervals.
template <class F>
cplx simpson(F&& f, double a, int n) {
  const double h = a / n;
  cplx acc = f(0.0) + f(a);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("closed-form determinant matches the Leibniz expansion") {
  std::mt19937_64 rng(101);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const PhysicalConfig cfg = oracle::random_config(rng);
    const ModeIndex n = oracle::random_mode(rng, 4);
    try {
      const cplx sig = sigma_n(n, cfg);
      const cplx det = oracle::det4(transfer_matrix(n, cfg));
      CHECK(oracle::rel(sig, det) < 1e-10);
      ++checked;
    } catch (const NumericalError&) {
    }
  }
  CHECK(checked > 990);
}

TEST_CASE("determinant special cases") {
  PhysicalConfig cfg;
  cfg.rho = cfg.kappa = 1.0;
  // phi = 2 gamma, psi = 0: Sigma = 4 gamma^2 exp(-i gamma (a + h))
  for (const ModeIndex n : {ModeIndex{0, 0}, ModeIndex{1, 0}, ModeIndex{2, 1}}) {
    const cplx g = gamma_of(n, cfg);
    CHECK(oracle::rel(sigma_n(n, cfg), 4.0 * g * g * std::exp(-kI * g * cfg.b)) < 1e-12);
  }
  cfg.rho = cfg.kappa = -1.0;
  // phi = 0, psi = -2 gamma: Sigma = -4 gamma^2 exp(i gamma (h - a))
  for (const ModeIndex n : {ModeIndex{0, 0}, ModeIndex{1, 0}, ModeIndex{2, 1}}) {
    const cplx g = gamma_of(n, cfg);
    CHECK(oracle::rel(sigma_n(n, cfg), -4.0 * g * g * std::exp(kI * g * (cfg.h() - cfg.a))) < 1e-12);
  }
}

TEST_CASE("zeroth-order solution satisfies every condition") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const PhysicalConfig cfg = oracle::random_config(rng);
    const ZerothOrder z = solve_zeroth(cfg);
    const ModeScalars s = mode_scalars({0, 0}, cfg);
    const cplx tau = tau_of(cfg);
    const double scale = std::max({std::abs(z.A), std::abs(z.B), std::abs(z.C), 1.0});
    // top: (1/rho) u' = i gamma u + tau
    CHECK(std::abs(z.dz_slab(cfg.b) / cfg.rho - kI * s.gamma * z.value(cfg.b) - tau) < 1e-10 * scale * cfg.omega);
    // continuity at a
    const cplx up = z.A * std::exp(kI * s.eta * cfg.a) + z.B * std::exp(-kI * s.eta * cfg.a);
    const cplx um = z.C * std::exp(kI * s.gamma * cfg.a) + z.D * std::exp(-kI * s.gamma * cfg.a);
    CHECK(std::abs(up - um) < 1e-10 * scale);
    CHECK(std::abs(z.value(cfg.a) - um) < 1e-10 * scale);
    // flux at a
    CHECK(std::abs(z.dz_slab(cfg.a) / cfg.rho - z.dz_lower(cfg.a)) < 1e-10 * scale * cfg.omega);
    // Dirichlet at 0
    CHECK(std::abs(z.C + z.D) == 0.0);
    CHECK(std::abs(z.value(0.0)) == 0.0);
    // Helmholtz in both layers, by central differences at interior points
    const double hz = 1e-4;
    for (double zz : {0.3 * cfg.a, 0.7 * cfg.a}) {
      const cplx d2 = (z.value(zz + hz) - 2.0 * z.value(zz) + z.value(zz - hz)) / (hz * hz);
      CHECK(std::abs(d2 + s.gamma * s.gamma * z.value(zz)) < 1e-4 * scale * cfg.omega * cfg.omega);
    }
    const double zs = 0.5 * (cfg.a + cfg.b);
    const cplx d2 = (z.value(zs + hz) - 2.0 * z.value(zs) + z.value(zs - hz)) / (hz * hz);
    CHECK(std::abs(d2 + s.eta * s.eta * z.value(zs)) < 1e-4 * scale * cfg.omega * cfg.omega);
  }
}

TEST_CASE("without a slab the zeroth order is the mirror solution") {
  PhysicalConfig cfg;
  cfg.rho = cfg.kappa = 1.0;
  const ZerothOrder z = solve_zeroth(cfg);
  CHECK(std::abs(z.C + 1.0) < 1e-12);
  for (double zz = 0.0; zz <= cfg.b; zz += cfg.b / 17)
    CHECK(std::abs(z.value(zz) + 2.0 * kI * std::sin(cfg.omega * zz)) < 1e-12);
}

TEST_CASE("first-order closed form agrees with the ODE oracle") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    const PhysicalConfig cfg = oracle::random_config(rng);
    const ModeIndex n = oracle::random_mode(rng, 3);
    const cplx g{nd(rng), nd(rng)};
    const cplx closed = first_order_top(n, g, cfg);
    const cplx ode = first_order_ode_oracle(n, g, cfg, 1024);
    CHECK(oracle::rel(closed, ode) < 1e-6);
    CHECK(oracle::rel(scaling_factor(n, cfg) * closed, g) < 1e-12);
  }
}

TEST_CASE("ODE oracle converges with z_steps") {
  const PhysicalConfig cfg;
  const cplx g{0.3, -0.1};
  const ModeIndex n{2, 1};
  const cplx ref = first_order_top(n, g, cfg);
  const double e1 = oracle::rel(first_order_ode_oracle(n, g, cfg, 64), ref);
  const double e2 = oracle::rel(first_order_ode_oracle(n, g, cfg, 128), ref);
  CHECK(e2 < e1);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
  CHECK_THROWS_AS((void)first_order_ode_oracle(n, g, cfg, 32), InvalidConfig);
}

TEST_CASE("integral closed forms") {
  for (auto [gn, g0, a] : {std::tuple{cplx{3.0}, cplx{5.7}, 0.1}, std::tuple{cplx{0.0, 9.0}, cplx{5.7}, 0.2},
                           std::tuple{cplx{2.0, 0.3}, cplx{1.1}, 0.5}}) {
    const cplx q1 = simpson([&](double z) { return std::sin(gn * z) * std::sin(g0 * z); }, a, 2000);
    const cplx q2 = simpson([&](double z) { return std::sin(gn * z) * (a - z) * std::cos(g0 * z); }, a, 2000);
    CHECK(oracle::rel(integral_sin_sin(gn, g0, a), q1) < 1e-10);
    CHECK(oracle::rel(integral_sin_ramp_cos(gn, g0, a), q2) < 1e-10);
  }
}

TEST_CASE("scaling factor special cases") {
  PhysicalConfig cfg;
  cfg.rho = cfg.kappa = 1.0;
  for (const ModeIndex n : mode_set(4)) CHECK(oracle::rel(scaling_factor(n, cfg), scaling_factor_no_slab(n, cfg)) < 1e-12);

  cfg.rho = cfg.kappa = -1.0;
  cfg.b = 0.25;
  for (const ModeIndex n : mode_set(4))
    CHECK(oracle::rel(scaling_factor(n, cfg), scaling_factor_ideal_lens(n, cfg)) < 1e-12);

  cfg.b = 2 * cfg.a;
  for (const ModeIndex n : mode_set(12)) CHECK(std::abs(std::abs(scaling_factor(n, cfg)) * 2 * cfg.omega - 1.0) < 1e-12);
}

TEST_CASE("scaling sweep") {
  PhysicalConfig cfg;
  const auto rows = scaling_sweep(cfg, 12);
  CHECK(rows.size() == 625);
  CHECK(rows[312].n == ModeIndex{0, 0});
  for (const auto& r : rows) {
    CHECK_FALSE(r.resonant);
    CHECK(r.abs_s == doctest::Approx(std::pow(10.0, r.log10_abs_s)));
  }
  // lossy lens: |s_n| grows along the axis once the loss dominates
  double prev = 0.0;
  int growth = 0;
  for (int k = 0; k <= 12; ++k) {
    const double v = std::abs(scaling_factor({k, 0}, cfg));
    growth += v > prev;
    prev = v;
  }
  CHECK(growth >= 10);

  PhysicalConfig res = cfg;
  res.omega = kTwoPi;  // gamma vanishes for n = (1, 0)
  const auto rr = scaling_sweep(res, 1);
  int flagged = 0;
  for (const auto& r : rr) flagged += r.resonant;
  CHECK(flagged == 4);
  CHECK(std::isnan(rr[1].abs_s));
}

TEST_CASE("first order vanishes with g and is linear in g") {
  const PhysicalConfig cfg;
  CHECK(first_order_top({1, 2}, 0.0, cfg) == cplx{});
  const cplx a = first_order_top({1, 2}, 1.0, cfg);
  CHECK(oracle::rel(first_order_top({1, 2}, cplx{2.0, -3.0}, cfg), a * cplx{2.0, -3.0}) < 1e-14);
  CHECK(u0_top({1, 0}, cfg) == cplx{});
  CHECK(std::abs(u0_top({0, 0}, cfg)) == doctest::Approx(0.00906).epsilon(0.01));
}
