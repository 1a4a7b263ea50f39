#include "superlens/core.hpp"

#include <cmath>
#include <sstream>

#include "superlens/errors.hpp"

namespace superlens {

void PhysicalConfig::validate() const {
  std::ostringstream why;
  if (!(omega > 0.0)) why << "omega must be > 0; ";
  if (!(period1 > 0.0) || !(period2 > 0.0)) why << "periods must be > 0; ";
  if (!(a > 0.0)) why << "a must be > 0; ";
  if (!(b > a)) why << "b must exceed a (slab thickness h = b - a > 0); ";
  if (!(epsilon >= 0.0)) why << "epsilon must be >= 0; ";
  if (!std::isfinite(rho.real()) || !std::isfinite(rho.imag()) || rho == cplx{})
    why << "rho must be finite and nonzero; ";
  if (!std::isfinite(kappa.real()) || !std::isfinite(kappa.imag()) || kappa == cplx{})
    why << "kappa must be finite and nonzero; ";
  const auto msg = why.str();
  if (!msg.empty()) throw InvalidConfig("invalid PhysicalConfig: " + msg);
}

PhysicalConfig PhysicalConfig::from_wavelength(double wavelength) {
  PhysicalConfig cfg;
  cfg.omega = kTwoPi / wavelength;
  return cfg;
}

cplx branch_sqrt(cplx z) {
  cplx r = std::sqrt(z);
  if (r.imag() < 0.0) r = -r;
  // Exactly-real negative radicands can land on the cut with Im == 0 and Re < 0.
  if (r.imag() == 0.0 && r.real() < 0.0) r = -r;
  return r;
}

std::array<double, 2> alpha_of(ModeIndex n, const PhysicalConfig& cfg) {
  return {kTwoPi * n.n1 / cfg.period1, kTwoPi * n.n2 / cfg.period2};
}

double alpha_sq(ModeIndex n, const PhysicalConfig& cfg) {
  const auto al = alpha_of(n, cfg);
  return al[0] * al[0] + al[1] * al[1];
}

namespace {

void check_resonance(cplx value, ModeIndex n, const PhysicalConfig& cfg, const char* what) {
  if (std::abs(value) < kResonanceTol * cfg.omega) {
    std::ostringstream os;
    os << what << " vanishes for mode (" << n.n1 << ", " << n.n2 << "): resonant mode";
    throw ResonantMode(os.str());
  }
}

}  // namespace

cplx gamma_of(ModeIndex n, const PhysicalConfig& cfg) {
  const cplx g = branch_sqrt(cplx{cfg.omega * cfg.omega - alpha_sq(n, cfg), 0.0});
  check_resonance(g, n, cfg, "gamma_n");
  return g;
}

cplx eta_of(ModeIndex n, const PhysicalConfig& cfg) {
  const cplx e = branch_sqrt((cfg.rho / cfg.kappa) * (cfg.omega * cfg.omega) - alpha_sq(n, cfg));
  check_resonance(e, n, cfg, "eta_n");
  return e;
}

ModeScalars mode_scalars(ModeIndex n, const PhysicalConfig& cfg) {
  ModeScalars s;
  s.alpha = alpha_of(n, cfg);
  s.gamma = gamma_of(n, cfg);
  s.eta = eta_of(n, cfg);
  s.phi = s.eta / cfg.rho + s.gamma;
  s.psi = s.eta / cfg.rho - s.gamma;
  return s;
}

cplx tau_of(const PhysicalConfig& cfg) {
  const cplx i{0.0, 1.0};
  return -2.0 * i * cfg.omega * std::exp(-i * cfg.omega * cfg.b);
}

std::vector<ModeIndex> mode_set(int N) {
  std::vector<ModeIndex> out;
  if (N < 0) return out;
  out.reserve(static_cast<std::size_t>((2 * N + 1) * (2 * N + 1)));
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) out.push_back({n1, n2});
  return out;
}

}  // namespace superlens
