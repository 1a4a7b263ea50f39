#include "superlens/tfe.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "superlens/errors.hpp"

namespace superlens {

namespace {

const cplx I1{0.0, 1.0};

// Smaller of the row-wise and column-wise Hadamard bounds on |det m|.
double hadamard_bound(const TransferMatrix& m) {
  double rows = 1.0, cols = 1.0;
  for (int r = 0; r < 4; ++r) {
    double sr = 0.0, sc = 0.0;
    for (int c = 0; c < 4; ++c) {
      sr += std::norm(m[r][c]);
      sc += std::norm(m[c][r]);
    }
    rows *= std::sqrt(sr);
    cols *= std::sqrt(sc);
  }
  return std::min(rows, cols);
}

}  // namespace

TransferMatrix transfer_matrix(ModeIndex n, const PhysicalConfig& cfg) {
  const ModeScalars s = mode_scalars(n, cfg);
  const double a = cfg.a;
  const double b = cfg.b;
  const cplx ea = std::exp(I1 * s.eta * a), eb = std::exp(I1 * s.eta * b);
  const cplx ga = std::exp(I1 * s.gamma * a);
  TransferMatrix m{};
  m[0] = {I1 * s.psi * eb, -I1 * s.phi / eb, 0.0, 0.0};
  m[1] = {ea, 1.0 / ea, -ga, -1.0 / ga};
  m[2] = {I1 / cfg.rho * s.eta * ea, -I1 / cfg.rho * s.eta / ea, -I1 * s.gamma * ga, I1 * s.gamma / ga};
  m[3] = {0.0, 0.0, 1.0, 1.0};
  return m;
}

cplx sigma_n(ModeIndex n, const PhysicalConfig& cfg) {
  const ModeScalars s = mode_scalars(n, cfg);
  const double a = cfg.a;
  const double h = cfg.h();
  const cplx sig = std::exp(-I1 * s.gamma * a) *
                       (std::exp(-I1 * s.eta * h) * s.phi * s.phi - std::exp(I1 * s.eta * h) * s.psi * s.psi) +
                   std::exp(I1 * s.gamma * a) * (std::exp(I1 * s.eta * h) - std::exp(-I1 * s.eta * h)) * s.phi * s.psi;
  const double scale = hadamard_bound(transfer_matrix(n, cfg));
  if (!(std::abs(sig) >= kSingularTol * scale)) {
    std::ostringstream os;
    os << "layered system singular for mode (" << n.n1 << ", " << n.n2 << "): |Sigma_n| = " << std::abs(sig)
       << " vs scale " << scale;
    throw NearSingularSystem(os.str());
  }
  return sig;
}

cplx ZerothOrder::value(double z) const {
  if (z >= a) return A * std::exp(I1 * eta0 * z) + B * std::exp(-I1 * eta0 * z);
  return 2.0 * I1 * C * std::sin(gamma0 * z);
}

cplx ZerothOrder::dz_lower(double z) const { return 2.0 * I1 * C * gamma0 * std::cos(gamma0 * z); }

cplx ZerothOrder::dz_slab(double z) const {
  return I1 * eta0 * (A * std::exp(I1 * eta0 * z) - B * std::exp(-I1 * eta0 * z));
}

ZerothOrder solve_zeroth(const PhysicalConfig& cfg) {
  cfg.validate();
  const ModeIndex zero{0, 0};
  const ModeScalars s = mode_scalars(zero, cfg);
  const cplx sig = sigma_n(zero, cfg);
  const cplx tau = tau_of(cfg);
  const double a = cfg.a;
  ZerothOrder z;
  z.gamma0 = s.gamma;
  z.eta0 = s.eta;
  z.a = cfg.a;
  z.b = cfg.b;
  const cplx gm = std::exp(-I1 * s.gamma * a), gp = std::exp(I1 * s.gamma * a);
  z.A = I1 * std::exp(-I1 * s.eta * a) * tau / sig * (s.psi * gm - s.phi * gp);
  z.B = I1 * std::exp(I1 * s.eta * a) * tau / sig * (s.phi * gm - s.psi * gp);
  z.C = -2.0 * I1 * s.eta * tau / (cfg.rho * sig);
  z.D = -z.C;
  return z;
}

cplx u0_top(const PhysicalConfig& cfg) {
  const ZerothOrder z = solve_zeroth(cfg);
  return z.A * std::exp(I1 * z.eta0 * cfg.b) + z.B * std::exp(-I1 * z.eta0 * cfg.b);
}

cplx u0_top(ModeIndex n, const PhysicalConfig& cfg) {
  return (n == ModeIndex{0, 0}) ? u0_top(cfg) : cplx{};
}

cplx first_order_top(ModeIndex n, cplx g_n, const PhysicalConfig& cfg) {
  const ZerothOrder z = solve_zeroth(cfg);
  const ModeScalars s = mode_scalars(n, cfg);
  const cplx sig = sigma_n(n, cfg);
  return -8.0 * I1 / (cfg.rho * sig) * z.C * z.gamma0 * s.gamma * s.eta * g_n;
}

cplx first_order_ode_oracle(ModeIndex n, cplx g_n, const PhysicalConfig& cfg, int z_steps) {
  if (z_steps < 64) throw InvalidConfig("first_order_ode_oracle needs z_steps >= 64");
  if (z_steps % 2 != 0) ++z_steps;
  const ZerothOrder z0 = solve_zeroth(cfg);
  const ModeScalars s = mode_scalars(n, cfg);
  const double a = cfg.a;
  const double al2 = alpha_sq(n, cfg);
  const double w2 = cfg.omega * cfg.omega;

  // First-order source for u^(0) = u^(0)(z): a^{-1} [(a - z) (Lap g) d/dz + 2 omega^2 g] u^(0),
  // with Lap g -> -|alpha_n|^2 g_n in Fourier space.
  auto source = [&](double z) {
    return (-al2 * (a - z) * z0.dz_lower(z) + 2.0 * w2 * z0.value(z)) * g_n / a;
  };

  // w(a) = gamma^{-1} int_0^a sin(gamma (a - z)) v dz,  w'(a) = int_0^a cos(gamma (a - z)) v dz
  const double hz = a / z_steps;
  cplx wa{}, dwa{};
  for (int k = 0; k <= z_steps; ++k) {
    const double z = k * hz;
    const double wt = (k == 0 || k == z_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const cplx v = source(z);
    wa += wt * std::sin(s.gamma * (a - z)) * v;
    dwa += wt * std::cos(s.gamma * (a - z)) * v;
  }
  wa *= hz / 3.0 / s.gamma;
  dwa *= hz / 3.0;

  const TransferMatrix tm = transfer_matrix(n, cfg);
  Eigen::Matrix4cd m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = tm[r][c];
  Eigen::Vector4cd rhs;
  rhs << 0.0, wa, dwa + z0.dz_slab(a) * g_n / (cfg.rho * a), 0.0;
  const Eigen::Vector4cd coef = m.fullPivLu().solve(rhs);
  return coef(0) * std::exp(I1 * s.eta * cfg.b) + coef(1) * std::exp(-I1 * s.eta * cfg.b);
}

cplx scaling_factor(ModeIndex n, const PhysicalConfig& cfg) {
  const ModeIndex zero{0, 0};
  const ModeScalars s0 = mode_scalars(zero, cfg);
  const ModeScalars s = mode_scalars(n, cfg);
  const cplx sig0 = sigma_n(zero, cfg);
  const cplx sig = sigma_n(n, cfg);
  return -cfg.rho * cfg.rho * sig0 * sig / (16.0 * tau_of(cfg) * s0.gamma * s0.eta * s.gamma * s.eta);
}

cplx scaling_factor_no_slab(ModeIndex n, const PhysicalConfig& cfg) {
  return std::exp(-I1 * gamma_of(n, cfg) * cfg.b) / (2.0 * I1 * cfg.omega);
}

cplx scaling_factor_ideal_lens(ModeIndex n, const PhysicalConfig& cfg) {
  const double h = cfg.h();
  return std::exp(2.0 * I1 * cfg.omega * h) / (2.0 * I1 * cfg.omega) * std::exp(-I1 * gamma_of(n, cfg) * (cfg.a - h));
}

std::vector<ScalingRow> scaling_sweep(const PhysicalConfig& cfg, int n_max) {
  std::vector<ScalingRow> rows;
  for (const ModeIndex n : mode_set(n_max)) {
    ScalingRow r;
    r.n = n;
    r.abs_alpha = std::sqrt(alpha_sq(n, cfg));
    try {
      r.s = scaling_factor(n, cfg);
      r.abs_s = std::abs(r.s);
      r.log10_abs_s = std::log10(r.abs_s);
    } catch (const NumericalError&) {
      r.resonant = true;
      r.s = cplx{std::nan(""), std::nan("")};
      r.abs_s = std::nan("");
      r.log10_abs_s = std::nan("");
    }
    rows.push_back(r);
  }
  return rows;
}

cplx integral_sin_sin(cplx gn, cplx g0, double a) {
  return 0.5 * (std::sin((gn - g0) * a) / (gn - g0) - std::sin((gn + g0) * a) / (gn + g0));
}

cplx integral_sin_ramp_cos(cplx gn, cplx g0, double a) {
  return a * gn / (gn * gn - g0 * g0) -
         0.5 * (std::sin((gn + g0) * a) / ((gn + g0) * (gn + g0)) + std::sin((gn - g0) * a) / ((gn - g0) * (gn - g0)));
}

}  // namespace superlens
