#include <cmath>
#include <random>

#include "doctest.h"
#include "superlens/errors.hpp"
#include "superlens/spectral.hpp"

using namespace superlens;

namespace {

GridField random_field(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  GridField u(r, c);
  for (auto& v : u.values()) v = {nd(rng), nd(rng)};
  return u;
}

double max_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

}  // namespace

TEST_CASE("dft2 of a constant") {
  GridField u(9, 11, cplx{2.0, -1.0});
  const auto U = dft2(u);
  CHECK(U.half1() == 4);
  CHECK(U.half2() == 5);
  for (const auto n : U.modes()) {
    const cplx want = (n == ModeIndex{0, 0}) ? cplx{2.0, -1.0} : cplx{};
    CHECK(std::abs(U[n] - want) < 1e-14);
  }
}

TEST_CASE("dft2 of a sampled Fourier mode") {
  const int I = 15;
  GridField u(I, I);
  for (int i1 = 0; i1 < I; ++i1)
    for (int i2 = 0; i2 < I; ++i2) u(i1, i2) = std::exp(cplx{0.0, kTwoPi * i1 / I});
  const auto U = dft2(u);
  for (const auto n : U.modes()) {
    const cplx want = (n == ModeIndex{1, 0}) ? cplx{1.0} : cplx{};
    CHECK(std::abs(U[n] - want) < 1e-13);
  }
  CHECK(grid_l2_norm(u) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Parseval and round trip on odd grids") {
  std::mt19937_64 rng(11);
  for (auto [r, c] : {std::pair{9, 9}, std::pair{15, 7}, std::pair{33, 33}}) {
    const GridField u = random_field(r, c, rng);
    const auto U = dft2(u);
    double spec = 0.0;
    for (const auto& v : U.values()) spec += std::norm(v);
    double grid = 0.0;
    for (const auto& v : u.values()) grid += std::norm(v);
    grid /= static_cast<double>(u.size());
    CHECK(std::abs(spec - grid) < 1e-10 * grid);
    CHECK(std::abs(grid_l2_norm(u) - std::sqrt(spec)) < 1e-12 * std::sqrt(spec));

    if (r == c) {
      const GridField back = synthesize(U, U.max_cutoff(), r, c, false);
      CHECK(max_diff(back, u) < 1e-10);
    }
  }
}

TEST_CASE("dft2 linearity and conjugate symmetry") {
  std::mt19937_64 rng(3);
  const GridField u = random_field(13, 13, rng);
  const GridField v = random_field(13, 13, rng);
  GridField w(13, 13);
  const cplx alpha{0.3, -2.0};
  for (std::size_t k = 0; k < w.size(); ++k) w.values()[k] = u.values()[k] + alpha * v.values()[k];
  const auto U = dft2(u), V = dft2(v), W = dft2(w);
  for (const auto n : W.modes()) CHECK(std::abs(W[n] - (U[n] + alpha * V[n])) < 1e-12);

  GridField re(13, 13);
  for (std::size_t k = 0; k < re.size(); ++k) re.values()[k] = u.values()[k].real();
  const auto R = dft2(re);
  for (const auto n : R.modes()) CHECK(std::abs(R[-n] - std::conj(R[n])) < 1e-14);
}

TEST_CASE("synthesize") {
  ModeArray c(2);
  c[{0, 0}] = 0.7;
  const auto g = synthesize(c, 0, 5, 6, true);
  for (const auto& v : g.values()) CHECK(std::abs(v - cplx{0.7}) < 1e-15);

  c[{1, 0}] = cplx{0.0, 1.0};
  const auto h = synthesize(c, 1, 8, 8, true);
  // Re(i exp(i 2 pi x)) = -sin(2 pi x)
  for (int i1 = 0; i1 < 8; ++i1)
    CHECK(h(i1, 3).real() == doctest::Approx(0.7 - std::sin(kTwoPi * i1 / 8)).epsilon(1e-13));
  CHECK(h(3, 3).imag() == 0.0);

  CHECK_THROWS_AS((void)synthesize(c, 3, 8, 8, false), CutoffOutOfRange);
  CHECK_THROWS_AS((void)synthesize(c, -1, 8, 8, false), CutoffOutOfRange);
}

TEST_CASE("even grids drop the Nyquist row") {
  GridField u(8, 8);
  CHECK(dft2(u).half1() == 3);
}

TEST_CASE("WindowTransform analysis inverts synthesis on the window") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const int N = 4;
  WindowTransform tr(N, 11, 13);
  std::vector<cplx> modes(tr.mode_count()), back(tr.mode_count());
  for (auto& v : modes) v = {nd(rng), nd(rng)};
  std::vector<cplx> grid(tr.grid_size());
  tr.synthesize(modes, grid);
  tr.analyze(grid, back);
  for (std::size_t k = 0; k < modes.size(); ++k) CHECK(std::abs(back[k] - modes[k]) < 1e-13);
}

TEST_CASE("grid_l2_norm") {
  CHECK(grid_l2_norm(GridField(7, 7, 1.0)) == doctest::Approx(1.0));
  CHECK(grid_l2_norm(GridField(4, 3, cplx{0.0, 2.0})) == doctest::Approx(2.0));
}
