#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "superlens/core.hpp"
#include "superlens/errors.hpp"

using namespace superlens;

TEST_CASE("alpha_of") {
  PhysicalConfig cfg;
  auto a0 = alpha_of({0, 0}, cfg);
  CHECK(a0[0] == 0.0);
  CHECK(a0[1] == 0.0);
  auto a1 = alpha_of({1, 0}, cfg);
  CHECK(a1[0] == doctest::Approx(kTwoPi));
  CHECK(a1[1] == 0.0);
  cfg.period2 = 2.0;
  auto a2 = alpha_of({2, -3}, cfg);
  CHECK(a2[0] == doctest::Approx(4 * M_PI));
  CHECK(a2[1] == doctest::Approx(-3 * M_PI));
}

TEST_CASE("gamma_of branches") {
  PhysicalConfig cfg = PhysicalConfig::from_wavelength(1.1);
  CHECK(std::abs(gamma_of({0, 0}, cfg) - cplx{cfg.omega, 0.0}) < 1e-14);

  const cplx g10 = gamma_of({1, 0}, cfg);
  CHECK(std::abs(g10.real()) < 1e-14);
  CHECK(g10.imag() == doctest::Approx(2.6175).epsilon(1e-4));
  CHECK(g10.imag() == doctest::Approx(std::sqrt(4 * M_PI * M_PI - cfg.omega * cfg.omega)).epsilon(1e-14));

  // propagating modes are real positive
  cfg.omega = 20.0;
  for (const auto n : mode_set(3)) {
    if (std::sqrt(alpha_sq(n, cfg)) < cfg.omega) {
      const cplx g = gamma_of(n, cfg);
      CHECK(g.real() > 0.0);
      CHECK(g.imag() == 0.0);
    }
  }
}

TEST_CASE("resonant mode is rejected") {
  PhysicalConfig cfg;
  cfg.omega = kTwoPi;
  CHECK_THROWS_AS((void)gamma_of({1, 0}, cfg), ResonantMode);
  cfg.rho = cfg.kappa = cplx{1.0, 0.0};
  CHECK_THROWS_AS((void)eta_of({0, 1}, cfg), ResonantMode);
}

TEST_CASE("eta_of") {
  PhysicalConfig cfg = PhysicalConfig::from_wavelength(1.1);
  for (cplx m : {cplx{1.0, 0.0}, cplx{-1.0, 0.01}, cplx{2.5, -0.3}}) {
    cfg.rho = cfg.kappa = m;
    for (const auto n : mode_set(4)) CHECK(std::abs(eta_of(n, cfg) - gamma_of(n, cfg)) < 1e-12);
  }
  cfg.rho = cfg.kappa = 1.0;
  CHECK(std::abs(eta_of({0, 0}, cfg) - cfg.omega) < 1e-14);

  cfg.rho = cplx{-1.0, 0.01};
  cfg.kappa = cplx{-1.2, 0.05};
  const cplx e = eta_of({1, 0}, cfg);
  const cplx want = cfg.rho / cfg.kappa * cfg.omega * cfg.omega - 4 * M_PI * M_PI;
  CHECK(e.imag() > 0.0);
  CHECK(std::abs(e * e - want) < 1e-12 * std::abs(want));
}

TEST_CASE("mode scalar invariants over random configurations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const PhysicalConfig cfg = oracle::random_config(rng);
    const ModeIndex n = oracle::random_mode(rng, 8);
    const double w2 = cfg.omega * cfg.omega;
    const ModeScalars s = mode_scalars(n, cfg);
    CHECK(s.gamma.imag() >= 0.0);
    CHECK(s.eta.imag() >= 0.0);
    const double scale = std::max(w2, alpha_sq(n, cfg));
    CHECK(std::abs(s.gamma * s.gamma + alpha_sq(n, cfg) - w2) < 1e-12 * scale);
    CHECK(std::abs(s.eta * s.eta + alpha_sq(n, cfg) - cfg.rho / cfg.kappa * w2) < 1e-12 * scale);
    CHECK(gamma_of(n, cfg) == gamma_of(-n, cfg));
    CHECK(std::abs(s.phi - (s.eta / cfg.rho + s.gamma)) == 0.0);
  }
}

TEST_CASE("tau_of") {
  PhysicalConfig cfg = PhysicalConfig::from_wavelength(1.1);
  cfg.b = 0.2;
  const cplx t = tau_of(cfg);
  CHECK(std::abs(t) == doctest::Approx(2 * cfg.omega).epsilon(1e-15));
  // Euler: -2i w (cos(wb) - i sin(wb)) = -2w sin(wb) - 2i w cos(wb)
  const double wb = cfg.omega * cfg.b;
  CHECK(std::abs(t - cplx{-2 * cfg.omega * std::sin(wb), -2 * cfg.omega * std::cos(wb)}) < 1e-13);
  cfg.a = 0.0;
  cfg.b = 0.0;
  CHECK(std::abs(tau_of(cfg) - cplx{0.0, -2 * cfg.omega}) < 1e-15);
}

TEST_CASE("mode_set") {
  CHECK(mode_set(0).size() == 1);
  CHECK(mode_set(0)[0] == ModeIndex{0, 0});
  CHECK(mode_set(1).size() == 9);
  const auto m3 = mode_set(3);
  CHECK(m3.size() == 49);
  CHECK(m3.front() == ModeIndex{-3, -3});
  CHECK(m3[1] == ModeIndex{-3, -2});
  CHECK(m3.back() == ModeIndex{3, 3});
  for (const auto n : m3) CHECK(norm_inf(n) <= 3);
  CHECK(norm_inf({-4, 2}) == 4);
}

TEST_CASE("config validation") {
  PhysicalConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.b = cfg.a;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = PhysicalConfig{};
  cfg.epsilon = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = PhysicalConfig{};
  cfg.omega = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}
