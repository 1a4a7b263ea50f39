#pragma once

#include <span>
#include <vector>

#include "superlens/core.hpp"

namespace superlens {

/// Complex samples on the periodic grid x_i = (i1 / I1 * period1, i2 / I2 * period2),
/// 0 <= i_k < I_k. Row-major storage, i1 outer.
class GridField {
 public:
  GridField() = default;
  GridField(int rows, int cols, cplx fill = {});

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  cplx& operator()(int i1, int i2) { return data_[index(i1, i2)]; }
  const cplx& operator()(int i1, int i2) const { return data_[index(i1, i2)]; }

  [[nodiscard]] std::span<cplx> values() { return data_; }
  [[nodiscard]] std::span<const cplx> values() const { return data_; }

  bool operator==(const GridField&) const = default;

 private:
  [[nodiscard]] std::size_t index(int i1, int i2) const {
    return static_cast<std::size_t>(i1) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(i2);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<cplx> data_;
};

/// Complex coefficients on the centered mode window |n1| <= half1, |n2| <= half2.
class ModeArray {
 public:
  ModeArray() = default;
  ModeArray(int half1, int half2);
  explicit ModeArray(int half) : ModeArray(half, half) {}

  [[nodiscard]] int half1() const { return half1_; }
  [[nodiscard]] int half2() const { return half2_; }
  /// Largest N such that every mode with norm_inf <= N is stored.
  [[nodiscard]] int max_cutoff() const { return std::min(half1_, half2_); }

  [[nodiscard]] bool contains(ModeIndex n) const {
    return std::abs(n.n1) <= half1_ && std::abs(n.n2) <= half2_;
  }
  cplx& operator[](ModeIndex n) { return data_[index(n)]; }
  const cplx& operator[](ModeIndex n) const { return data_[index(n)]; }
  /// Zero outside the window.
  [[nodiscard]] cplx get(ModeIndex n) const { return contains(n) ? data_[index(n)] : cplx{}; }

  /// Every stored mode, row-major.
  [[nodiscard]] std::vector<ModeIndex> modes() const;
  [[nodiscard]] std::span<cplx> values() { return data_; }
  [[nodiscard]] std::span<const cplx> values() const { return data_; }

 private:
  [[nodiscard]] std::size_t index(ModeIndex n) const {
    return static_cast<std::size_t>(n.n1 + half1_) * static_cast<std::size_t>(2 * half2_ + 1) +
           static_cast<std::size_t>(n.n2 + half2_);
  }

  int half1_ = 0;
  int half2_ = 0;
  std::vector<cplx> data_ = std::vector<cplx>(1);
};

using SpectrumField = ModeArray;

/// Half-width of the centered window a grid of I samples resolves: floor((I - 1) / 2).
/// For even I the unpaired Nyquist row is excluded.
[[nodiscard]] inline int nyquist_half(int samples) { return (samples - 1) / 2; }

/// U_n = (1 / (I1 I2)) sum_i exp(-2 pi i (n1 i1 / I1 + n2 i2 / I2)) u(x_i) on the centered window.
[[nodiscard]] SpectrumField dft2(const GridField& u);

/// sum_{norm_inf(n) <= N} c_n exp(i alpha_n . x_i) on an I1 x I2 grid; real part only if take_real.
[[nodiscard]] GridField synthesize(const ModeArray& coeffs, int N, int rows, int cols, bool take_real);

/// sqrt(mean |u_i|^2). Equal to the l2 norm of dft2(u) on odd grids (Parseval).
[[nodiscard]] double grid_l2_norm(const GridField& u);

/// Precomputed separable transform between a square mode window (|n_k| <= N) and an
/// I1 x I2 grid. Used on hot paths where the same window/grid pair is transformed many times.
/// Holds scratch space, so one instance must not be shared across threads.
class WindowTransform {
 public:
  WindowTransform(int N, int rows, int cols);

  [[nodiscard]] int cutoff() const { return N_; }
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::size_t mode_count() const { return static_cast<std::size_t>(K_) * K_; }
  [[nodiscard]] std::size_t grid_size() const { return static_cast<std::size_t>(rows_) * cols_; }

  /// modes: K*K row-major (n1 outer, both from -N); grid: rows*cols row-major.
  void synthesize(std::span<const cplx> modes, std::span<cplx> grid) const;
  /// Forward DFT with the 1/(I1 I2) factor, restricted to the window.
  void analyze(std::span<const cplx> grid, std::span<cplx> modes) const;

 private:
  int N_;
  int K_;
  int rows_;
  int cols_;
  std::vector<cplx> e1_;  // [i1 * K + k] = exp(+2 pi i (k - N) i1 / rows)
  std::vector<cplx> e2_;  // [i2 * K + k] = exp(+2 pi i (k - N) i2 / cols)
  std::vector<cplx> e2c_;  // [k * cols + i2] = conj(e2_[i2 * K + k])
  mutable std::vector<cplx> scratch_;
};

}  // namespace superlens
