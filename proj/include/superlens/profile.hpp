#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "superlens/core.hpp"
#include "superlens/spectral.hpp"

namespace superlens {

enum class ProfileKind { TrigPoly, AnalyticPeaks, ImageIndicator, SpectrumDefined };

[[nodiscard]] std::string to_string(ProfileKind kind);

/// Value and derivatives of g at one point.
struct ProfileJet {
  double g = 0.0;
  double gx = 0.0;
  double gy = 0.0;
  double gxx = 0.0;
  double gyy = 0.0;

  [[nodiscard]] double lap() const { return gxx + gyy; }
};

/// The same quantities sampled on an I1 x I2 grid (row-major, i1 outer).
struct ProfileGrids {
  int rows = 0;
  int cols = 0;
  std::vector<double> g, gx, gy, lap;
};

/// Grayscale raster, pixel values in [0, 1], row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  [[nodiscard]] double at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

/// Coefficients g_n of a profile over norm_inf(n) <= N_max.
using ProfileSpectrum = ModeArray;

/// A biperiodic, amplitude-free surface profile g. Immutable once built.
///
/// Samplers wrap their argument into the period cell before evaluating, so
/// periodicity is exact. Profiles defined on the unit square are stretched
/// to the configured periods.
class SurfaceProfile {
 public:
  using Sampler = std::function<double(double, double)>;
  using JetSampler = std::function<ProfileJet(double, double)>;

  /// `value` and `jet` take unit-cell coordinates in [0, 1)^2; `jet` may be empty.
  SurfaceProfile(ProfileKind kind, Sampler value, JetSampler jet, double period1 = 1.0,
                 double period2 = 1.0, std::map<std::string, std::string> metadata = {});

  /// Re sum_n c_n exp(i alpha_n . x) with analytic derivatives.
  static SurfaceProfile from_spectrum(const ProfileSpectrum& coeffs, double period1 = 1.0, double period2 = 1.0);
  /// g == level.
  static SurfaceProfile flat(double level = 0.0, double period1 = 1.0, double period2 = 1.0);

  [[nodiscard]] ProfileKind kind() const { return kind_; }
  [[nodiscard]] double period1() const { return period1_; }
  [[nodiscard]] double period2() const { return period2_; }
  [[nodiscard]] const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// g at physical point (x, y).
  [[nodiscard]] double operator()(double x, double y) const;
  [[nodiscard]] bool has_derivatives() const { return static_cast<bool>(jet_); }
  /// Physical-coordinate derivatives. Throws InvariantError if !has_derivatives().
  [[nodiscard]] ProfileJet jet(double x, double y) const;

  /// Samples on the grid x_i = (i1 / rows * period1, i2 / cols * period2).
  /// Derivative grids are left empty when the profile has no derivatives.
  [[nodiscard]] ProfileGrids sample(int rows, int cols) const;

  /// max |g| estimated on a 256 x 256 grid (exact for the indicator).
  [[nodiscard]] double sup_abs() const { return sup_abs_; }

  /// Coefficients used by from_spectrum, if any.
  [[nodiscard]] const ProfileSpectrum* spectrum() const { return spectrum_.get(); }

 private:
  struct DeferSup {};
  SurfaceProfile(DeferSup, ProfileKind kind, Sampler value, JetSampler jet, double period1, double period2,
                 std::map<std::string, std::string> metadata);

  ProfileKind kind_;
  Sampler value_;
  JetSampler jet_;
  double period1_;
  double period2_;
  std::map<std::string, std::string> metadata_;
  std::shared_ptr<const ProfileSpectrum> spectrum_;
  double sup_abs_ = 0.0;
};

/// p(x) + p(y) with p(t) = (0.5 + sin 2 pi t + cos 4 pi t + sin 6 pi t) / 4, unit cell.
[[nodiscard]] double profile1(double x, double y);
[[nodiscard]] ProfileJet profile1_jet(double x, double y);
/// Periodic extension of q(8x - 4, 8y - 4) over the unit cell.
[[nodiscard]] double profile2(double x, double y);
[[nodiscard]] ProfileJet profile2_jet(double x, double y);

[[nodiscard]] SurfaceProfile make_profile1(double period1 = 1.0, double period2 = 1.0);
[[nodiscard]] SurfaceProfile make_profile2(double period1 = 1.0, double period2 = 1.0);

/// Indicator of (pixel >= threshold), nearest-pixel sampling, image top at y -> period2.
/// Throws EmptyImage, BadThreshold.
[[nodiscard]] SurfaceProfile profile3_from_image(const GrayImage& image, double threshold = 0.5,
                                                 double period1 = 1.0, double period2 = 1.0);

/// Built-in 32 x 32 binary test glyph used when no image is supplied.
[[nodiscard]] GrayImage builtin_glyph();

/// g_n from the quad_I x quad_I DFT of samples of g. Throws NyquistViolation unless quad_I > 2 N_max.
[[nodiscard]] ProfileSpectrum profile_spectrum(const SurfaceProfile& p, int n_max, int quad_I);

}  // namespace superlens
