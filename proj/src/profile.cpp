#include "superlens/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "superlens/errors.hpp"

namespace superlens {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_unit(double t) {
  double w = t - std::floor(t);
  if (w >= 1.0) w = 0.0;
  return w;
}

// p(t) and its first two derivatives.
std::array<double, 3> p1(double t) {
  const double w = kTwoPi * t;
  const double v = 0.25 * (0.5 + std::sin(w) + std::cos(2 * w) + std::sin(3 * w));
  const double d1 = 0.25 * (kTwoPi * std::cos(w) - 2 * kTwoPi * std::sin(2 * w) + 3 * kTwoPi * std::cos(3 * w));
  const double k2 = kTwoPi * kTwoPi;
  const double d2 = 0.25 * (-k2 * std::sin(w) - 4 * k2 * std::cos(2 * w) - 9 * k2 * std::sin(3 * w));
  return {v, d1, d2};
}

// One term P(s, t) exp(-(s - s0)^2 - (t - t0)^2) of q, with the partials of P supplied.
struct GaussTerm {
  double P, Ps, Pss, Pt, Ptt;
  double s0, t0;
};

// returns {value, d/ds, d/dt, d2/ds2, d2/dt2}
std::array<double, 5> eval_term(const GaussTerm& term, double s, double t) {
  const double Qs = -2.0 * (s - term.s0);
  const double Qt = -2.0 * (t - term.t0);
  const double E = std::exp(-(s - term.s0) * (s - term.s0) - (t - term.t0) * (t - term.t0));
  return {term.P * E,
          (term.Ps + term.P * Qs) * E,
          (term.Pt + term.P * Qt) * E,
          (term.Pss + 2 * term.Ps * Qs - 2 * term.P + term.P * Qs * Qs) * E,
          (term.Ptt + 2 * term.Pt * Qt - 2 * term.P + term.P * Qt * Qt) * E};
}

std::array<double, 5> q_jet(double s, double t) {
  const GaussTerm terms[3] = {
      {0.3 * (1 - s) * (1 - s), -0.6 * (1 - s), 0.6, 0.0, 0.0, 0.0, -1.0},
      {-(0.2 * s - s * s * s - std::pow(t, 5)), -(0.2 - 3 * s * s), 6 * s, 5 * std::pow(t, 4),
       20 * std::pow(t, 3), 0.0, 0.0},
      {-0.03, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0},
  };
  std::array<double, 5> acc{};
  for (const auto& term : terms) {
    const auto v = eval_term(term, s, t);
    for (int k = 0; k < 5; ++k) acc[k] += v[k];
  }
  return acc;
}

double sample_sup(const SurfaceProfile& p) {
  const auto grids = p.sample(256, 256);
  double m = 0.0;
  for (double v : grids.g) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::TrigPoly: return "trig-poly";
    case ProfileKind::AnalyticPeaks: return "analytic-peaks";
    case ProfileKind::ImageIndicator: return "image-indicator";
    case ProfileKind::SpectrumDefined: return "spectrum-defined";
  }
  return "unknown";
}

SurfaceProfile::SurfaceProfile(DeferSup, ProfileKind kind, Sampler value, JetSampler jet, double period1,
                               double period2, std::map<std::string, std::string> metadata)
    : kind_(kind), value_(std::move(value)), jet_(std::move(jet)), period1_(period1), period2_(period2),
      metadata_(std::move(metadata)) {
  if (!(period1 > 0.0) || !(period2 > 0.0)) throw InvalidConfig("profile periods must be > 0");
  if (!value_) throw InvalidConfig("profile needs a value sampler");
}

SurfaceProfile::SurfaceProfile(ProfileKind kind, Sampler value, JetSampler jet, double period1, double period2,
                               std::map<std::string, std::string> metadata)
    : SurfaceProfile(DeferSup{}, kind, std::move(value), std::move(jet), period1, period2, std::move(metadata)) {
  sup_abs_ = sample_sup(*this);
}

double SurfaceProfile::operator()(double x, double y) const {
  return value_(wrap_unit(x / period1_), wrap_unit(y / period2_));
}

ProfileJet SurfaceProfile::jet(double x, double y) const {
  if (!jet_) throw InvariantError("profile '" + to_string(kind_) + "' has no pointwise derivatives");
  ProfileJet j = jet_(wrap_unit(x / period1_), wrap_unit(y / period2_));
  j.gx /= period1_;
  j.gy /= period2_;
  j.gxx /= period1_ * period1_;
  j.gyy /= period2_ * period2_;
  return j;
}

ProfileGrids SurfaceProfile::sample(int rows, int cols) const {
  ProfileGrids out;
  out.rows = rows;
  out.cols = cols;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  out.g.resize(n);

  if (spectrum_) {
    // Spectral synthesis of g and its derivatives on the grid.
    const ProfileSpectrum& c = *spectrum_;
    const int N = c.max_cutoff();
    const int K = 2 * N + 1;
    WindowTransform tr(N, rows, cols);
    std::vector<cplx> modes(static_cast<std::size_t>(K) * K);
    GridField buf(rows, cols);
    auto run = [&](auto factor, std::vector<double>& dst) {
      for (int n1 = -N; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2)
          modes[static_cast<std::size_t>(n1 + N) * K + (n2 + N)] = c[{n1, n2}] * factor(n1, n2);
      tr.synthesize(modes, buf.values());
      dst.resize(n);
      for (std::size_t k = 0; k < n; ++k) dst[k] = buf.values()[k].real();
    };
    const double k1 = kTwoPi / period1_;
    const double k2 = kTwoPi / period2_;
    const cplx i{0.0, 1.0};
    run([](int, int) { return cplx{1.0}; }, out.g);
    run([&](int n1, int) { return i * (k1 * n1); }, out.gx);
    run([&](int, int n2) { return i * (k2 * n2); }, out.gy);
    std::vector<double> gxx, gyy;
    run([&](int n1, int) { return cplx{-(k1 * n1) * (k1 * n1)}; }, gxx);
    run([&](int, int n2) { return cplx{-(k2 * n2) * (k2 * n2)}; }, gyy);
    out.lap.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.lap[k] = gxx[k] + gyy[k];
    return out;
  }

  if (jet_) {
    out.gx.resize(n);
    out.gy.resize(n);
    out.lap.resize(n);
  }
  for (int i1 = 0; i1 < rows; ++i1)
    for (int i2 = 0; i2 < cols; ++i2) {
      const std::size_t k = static_cast<std::size_t>(i1) * cols + i2;
      const double x = period1_ * i1 / rows;
      const double y = period2_ * i2 / cols;
      if (jet_) {
        const ProfileJet j = jet(x, y);
        out.g[k] = j.g;
        out.gx[k] = j.gx;
        out.gy[k] = j.gy;
        out.lap[k] = j.lap();
      } else {
        out.g[k] = (*this)(x, y);
      }
    }
  return out;
}

SurfaceProfile SurfaceProfile::from_spectrum(const ProfileSpectrum& coeffs, double period1, double period2) {
  auto spec = std::make_shared<const ProfileSpectrum>(coeffs);
  const int N = spec->max_cutoff();
  auto jet = [spec, N](double s, double t) {
    ProfileJet j;
    const cplx i{0.0, 1.0};
    for (int n1 = -N; n1 <= N; ++n1)
      for (int n2 = -N; n2 <= N; ++n2) {
        const cplx c = (*spec)[{n1, n2}];
        if (c == cplx{}) continue;
        const double w1 = kTwoPi * n1;
        const double w2 = kTwoPi * n2;
        const cplx e = c * std::exp(i * (w1 * s + w2 * t));
        j.g += e.real();
        j.gx += (i * w1 * e).real();
        j.gy += (i * w2 * e).real();
        j.gxx += -(w1 * w1) * e.real();
        j.gyy += -(w2 * w2) * e.real();
      }
    return j;
  };
  auto value = [jet](double s, double t) { return jet(s, t).g; };
  SurfaceProfile p(DeferSup{}, ProfileKind::SpectrumDefined, value, jet, period1, period2,
                   {{"n_max", std::to_string(N)}});
  p.spectrum_ = std::move(spec);
  p.sup_abs_ = sample_sup(p);
  return p;
}

SurfaceProfile SurfaceProfile::flat(double level, double period1, double period2) {
  ProfileSpectrum c(0);
  c[{0, 0}] = level;
  return from_spectrum(c, period1, period2);
}

double profile1(double x, double y) { return p1(wrap_unit(x))[0] + p1(wrap_unit(y))[0]; }

ProfileJet profile1_jet(double x, double y) {
  const auto px = p1(wrap_unit(x));
  const auto py = p1(wrap_unit(y));
  return {px[0] + py[0], px[1], py[1], px[2], py[2]};
}

double profile2(double x, double y) {
  return q_jet(8.0 * wrap_unit(x) - 4.0, 8.0 * wrap_unit(y) - 4.0)[0];
}

ProfileJet profile2_jet(double x, double y) {
  const auto q = q_jet(8.0 * wrap_unit(x) - 4.0, 8.0 * wrap_unit(y) - 4.0);
  return {q[0], 8.0 * q[1], 8.0 * q[2], 64.0 * q[3], 64.0 * q[4]};
}

SurfaceProfile make_profile1(double period1, double period2) {
  return SurfaceProfile(ProfileKind::TrigPoly, profile1, profile1_jet, period1, period2, {{"name", "profile1"}});
}

SurfaceProfile make_profile2(double period1, double period2) {
  return SurfaceProfile(ProfileKind::AnalyticPeaks, profile2, profile2_jet, period1, period2, {{"name", "profile2"}});
}

SurfaceProfile profile3_from_image(const GrayImage& image, double threshold, double period1, double period2) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw EmptyImage("profile image is empty or malformed");
  if (!(threshold > 0.0 && threshold < 1.0)) throw BadThreshold("threshold must lie in (0, 1)");
  auto img = std::make_shared<const GrayImage>(image);
  auto value = [img, threshold](double s, double t) {
    const int col = std::min(img->width - 1, static_cast<int>(std::floor(s * img->width)));
    const int row = img->height - 1 - std::min(img->height - 1, static_cast<int>(std::floor(t * img->height)));
    return img->at(row, col) >= threshold ? 1.0 : 0.0;
  };
  return SurfaceProfile(ProfileKind::ImageIndicator, value, {}, period1, period2,
                        {{"name", "profile3"},
                         {"width", std::to_string(image.width)},
                         {"height", std::to_string(image.height)},
                         {"threshold", std::to_string(threshold)}});
}

GrayImage builtin_glyph() {
  // Blocky "R" with an offset square dot; no mirror or rotation symmetry.
  static const char* rows[32] = {
      "................................",
      "................................",
      "................................",
      "....##############..............",
      "....###############.............",
      "....####.......#####............",
      "....####........####............",
      "....####........####............",
      "....####........####............",
      "....####.......#####............",
      "....###############.............",
      "....##############..............",
      "....####....####................",
      "....####.....####...............",
      "....####......####..............",
      "....####.......####.............",
      "....####........####............",
      "....####.........####...........",
      "....####..........####..........",
      "................................",
      "................................",
      "......................######....",
      "......................######....",
      "......................######....",
      "......................######....",
      "................................",
      "................................",
      "..##############################",
      "..##############################",
      "................................",
      "................................",
      "................................",
  };
  GrayImage img;
  img.width = 32;
  img.height = 32;
  img.pixels.resize(32 * 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) img.pixels[static_cast<std::size_t>(r) * 32 + c] = rows[r][c] == '#' ? 1.0 : 0.0;
  return img;
}

ProfileSpectrum profile_spectrum(const SurfaceProfile& p, int n_max, int quad_I) {
  if (n_max < 0) throw InvariantError("n_max must be >= 0");
  if (quad_I <= 2 * n_max)
    throw NyquistViolation("profile_spectrum needs quad_I > 2 * N_max (got quad_I = " + std::to_string(quad_I) +
                           ", N_max = " + std::to_string(n_max) + ")");
  const auto grids = p.sample(quad_I, quad_I);
  GridField u(quad_I, quad_I);
  for (std::size_t k = 0; k < grids.g.size(); ++k) u.values()[k] = grids.g[k];
  const SpectrumField full = dft2(u);
  ProfileSpectrum out(n_max);
  for (const auto n : out.modes()) out[n] = full[n];
  return out;
}

}  // namespace superlens
