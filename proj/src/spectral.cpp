#include "superlens/spectral.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "superlens/errors.hpp"

namespace superlens {

GridField::GridField(int rows, int cols, cplx fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
  if (rows < 1 || cols < 1) throw InvariantError("GridField needs at least one sample per axis");
}

ModeArray::ModeArray(int half1, int half2)
    : half1_(half1),
      half2_(half2),
      data_(static_cast<std::size_t>(2 * half1 + 1) * static_cast<std::size_t>(2 * half2 + 1)) {
  if (half1 < 0 || half2 < 0) throw InvariantError("ModeArray half-widths must be >= 0");
}

std::vector<ModeIndex> ModeArray::modes() const {
  std::vector<ModeIndex> out;
  out.reserve(data_.size());
  for (int n1 = -half1_; n1 <= half1_; ++n1)
    for (int n2 = -half2_; n2 <= half2_; ++n2) out.push_back({n1, n2});
  return out;
}

namespace {

// table[i * K + k] = exp(sign * 2 pi i (k - half) i / samples)
std::vector<cplx> twiddles(int half, int samples, double sign) {
  const int K = 2 * half + 1;
  std::vector<cplx> t(static_cast<std::size_t>(samples) * K);
  for (int i = 0; i < samples; ++i)
    for (int k = 0; k < K; ++k) {
      // Reduce the phase index exactly before converting to an angle.
      const long long p = (static_cast<long long>(k - half) * i) % samples;
      const double ang = sign * kTwoPi * static_cast<double>(p) / samples;
      t[static_cast<std::size_t>(i) * K + k] = {std::cos(ang), std::sin(ang)};
    }
  return t;
}

}  // namespace

SpectrumField dft2(const GridField& u) {
  const int I1 = u.rows();
  const int I2 = u.cols();
  const int h1 = nyquist_half(I1);
  const int h2 = nyquist_half(I2);
  const int K1 = 2 * h1 + 1;
  const int K2 = 2 * h2 + 1;
  const auto t1 = twiddles(h1, I1, -1.0);
  const auto t2 = twiddles(h2, I2, -1.0);

  // stage 1: along i2
  std::vector<cplx> tmp(static_cast<std::size_t>(I1) * K2);
  for (int i1 = 0; i1 < I1; ++i1)
    for (int i2 = 0; i2 < I2; ++i2) {
      const cplx v = u(i1, i2);
      const cplx* row = &t2[static_cast<std::size_t>(i2) * K2];
      cplx* out = &tmp[static_cast<std::size_t>(i1) * K2];
      for (int k2 = 0; k2 < K2; ++k2) out[k2] += row[k2] * v;
    }
  SpectrumField U(h1, h2);
  auto dst = U.values();
  const double scale = 1.0 / (static_cast<double>(I1) * I2);
  for (int i1 = 0; i1 < I1; ++i1) {
    const cplx* row = &t1[static_cast<std::size_t>(i1) * K1];
    const cplx* src = &tmp[static_cast<std::size_t>(i1) * K2];
    for (int k1 = 0; k1 < K1; ++k1) {
      cplx* out = &dst[static_cast<std::size_t>(k1) * K2];
      const cplx w = row[k1];
      for (int k2 = 0; k2 < K2; ++k2) out[k2] += w * src[k2];
    }
  }
  for (auto& c : dst) c *= scale;
  return U;
}

GridField synthesize(const ModeArray& coeffs, int N, int rows, int cols, bool take_real) {
  if (N < 0 || N > coeffs.max_cutoff())
    throw CutoffOutOfRange("cut-off N = " + std::to_string(N) + " outside the coefficient window [0, " +
                           std::to_string(coeffs.max_cutoff()) + "]");
  const int K = 2 * N + 1;
  std::vector<cplx> modes(static_cast<std::size_t>(K) * K);
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2)
      modes[static_cast<std::size_t>(n1 + N) * K + (n2 + N)] = coeffs[{n1, n2}];
  GridField out(rows, cols);
  WindowTransform(N, rows, cols).synthesize(modes, out.values());
  if (take_real)
    for (auto& v : out.values()) v = {v.real(), 0.0};
  return out;
}

double grid_l2_norm(const GridField& u) {
  double acc = 0.0;
  for (const auto& v : u.values()) acc += std::norm(v);
  return std::sqrt(acc / static_cast<double>(u.size()));
}

WindowTransform::WindowTransform(int N, int rows, int cols)
    : N_(N), K_(2 * N + 1), rows_(rows), cols_(cols),
      e1_(twiddles(N, rows, 1.0)), e2_(twiddles(N, cols, 1.0)),
      scratch_(static_cast<std::size_t>(K_) * static_cast<std::size_t>(std::max(rows, cols))) {
  if (N < 0) throw InvariantError("WindowTransform cut-off must be >= 0");
  e2c_.resize(e2_.size());
  for (int i2 = 0; i2 < cols_; ++i2)
    for (int k = 0; k < K_; ++k)
      e2c_[static_cast<std::size_t>(k) * cols_ + i2] = std::conj(e2_[static_cast<std::size_t>(i2) * K_ + k]);
}

void WindowTransform::synthesize(std::span<const cplx> modes, std::span<cplx> grid) const {
  // tmp[k1 * cols + i2] = sum_k2 c[k1, k2] e2[i2, k2]
  cplx* tmp = scratch_.data();
  for (int k1 = 0; k1 < K_; ++k1) {
    const cplx* c = &modes[static_cast<std::size_t>(k1) * K_];
    cplx* out = tmp + static_cast<std::size_t>(k1) * cols_;
    for (int i2 = 0; i2 < cols_; ++i2) {
      const cplx* e = &e2_[static_cast<std::size_t>(i2) * K_];
      cplx acc{};
      for (int k2 = 0; k2 < K_; ++k2) acc += c[k2] * e[k2];
      out[i2] = acc;
    }
  }
  for (int i1 = 0; i1 < rows_; ++i1) {
    cplx* out = &grid[static_cast<std::size_t>(i1) * cols_];
    std::fill(out, out + cols_, cplx{});
    const cplx* e = &e1_[static_cast<std::size_t>(i1) * K_];
    for (int k1 = 0; k1 < K_; ++k1) {
      const cplx w = e[k1];
      const cplx* src = tmp + static_cast<std::size_t>(k1) * cols_;
      for (int i2 = 0; i2 < cols_; ++i2) out[i2] += w * src[i2];
    }
  }
}

void WindowTransform::analyze(std::span<const cplx> grid, std::span<cplx> modes) const {
  // tmp[k1 * cols + i2] = sum_i1 conj(e1[i1, k1]) u[i1, i2]
  cplx* tmp = scratch_.data();
  std::fill(tmp, tmp + static_cast<std::size_t>(K_) * cols_, cplx{});
  for (int i1 = 0; i1 < rows_; ++i1) {
    const cplx* src = &grid[static_cast<std::size_t>(i1) * cols_];
    const cplx* e = &e1_[static_cast<std::size_t>(i1) * K_];
    for (int k1 = 0; k1 < K_; ++k1) {
      const cplx w = std::conj(e[k1]);
      cplx* out = tmp + static_cast<std::size_t>(k1) * cols_;
      for (int i2 = 0; i2 < cols_; ++i2) out[i2] += w * src[i2];
    }
  }
  const double scale = 1.0 / (static_cast<double>(rows_) * cols_);
  for (int k1 = 0; k1 < K_; ++k1) {
    const cplx* src = tmp + static_cast<std::size_t>(k1) * cols_;
    cplx* out = &modes[static_cast<std::size_t>(k1) * K_];
    for (int k2 = 0; k2 < K_; ++k2) {
      const cplx* e = &e2c_[static_cast<std::size_t>(k2) * cols_];
      cplx acc{};
      for (int i2 = 0; i2 < cols_; ++i2) acc += src[i2] * e[i2];
      out[k2] = acc * scale;
    }
  }
}

}  // namespace superlens
