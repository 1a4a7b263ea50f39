#include "superlens/forward.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "superlens/errors.hpp"
#include "superlens/tfe.hpp"

namespace superlens {

namespace {

const cplx I1{0.0, 1.0};

// Fornberg's recursion: weights of derivatives 0..m at x0 over the given nodes.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

// Weights over nodes first .. first + w.size() - 1 (node 0 carries the Dirichlet zero).
struct Stencil {
  int first = 0;
  std::vector<double> w;
};

Stencil make_stencil(int j, int count, int M, int deriv, double h) {
  int first = j - count / 2;
  first = std::clamp(first, 0, M - count + 1);
  std::vector<double> x(count);
  for (int s = 0; s < count; ++s) x[s] = first + s;
  const auto c = fd_weights(j, x, deriv);
  Stencil st{first, c[deriv]};
  const double scale = std::pow(h, -deriv);
  for (auto& v : st.w) v *= scale;
  return st;
}

double rel_mismatch(double p, double q) { return std::abs(p - q) / std::max(1.0, std::abs(q)); }

// The discrete transformed operator, matrix-free. Unknowns: u_n(z_j), j = 1..M, level-major.
class TransformedOperator {
 public:
  TransformedOperator(const CoefficientFields& cf, const PhysicalConfig& cfg, const Discretization& disc)
      : cf_(cf), cfg_(cfg), N_(disc.N_f), K_(2 * disc.N_f + 1), KK_(static_cast<std::size_t>(K_) * K_),
        M_(disc.M), h_(cfg.a / disc.M), tr_(disc.N_f, disc.I, disc.I) {
    const std::size_t G = tr_.grid_size();
    lam_.resize(KK_);
    alpha1_.resize(KK_);
    alpha2_.resize(KK_);
    slab_.resize(KK_);
    const double w2 = cfg.omega * cfg.omega;
    std::size_t k = 0;
    for (const ModeIndex n : mode_set(N_)) {
      const auto al = alpha_of(n, cfg);
      alpha1_[k] = al[0];
      alpha2_[k] = al[1];
      lam_[k] = w2 - alpha_sq(n, cfg);
      slab_[k] = slab_impedance(n, cfg);
      ++k;
    }

    const int p = disc.fd_order;
    for (int j = 1; j < M_; ++j) {
      const bool centered = j - p / 2 >= 0 && j + p / 2 <= M_;
      d2_.push_back(make_stencil(j, centered ? p + 1 : p + 2, M_, 2, h_));
      d1_.push_back(make_stencil(j, p + 1, M_, 1, h_));
    }
    d1_top_ = make_stencil(M_, p + 1, M_, 1, h_);

    // Lateral factors: c1 = a^2 + d1, c2 = a^2 + (a - z)^2 |grad f|^2, c3 = (a - z) q3, ...
    const double a = cfg.a;
    d1c_.resize(G);
    grad2_.resize(G);
    q3_.resize(G);
    q4_.resize(G);
    q5_.resize(G);
    for (std::size_t i = 0; i < G; ++i) {
      const double f = cf.f()[i], fx = cf.fx()[i], fy = cf.fy()[i];
      d1c_[i] = (a - f) * (a - f) - a * a;
      grad2_[i] = fx * fx + fy * fy;
      q3_[i] = 2.0 * (a - f) * fx;
      q4_[i] = 2.0 * (a - f) * fy;
      q5_[i] = 2.0 * grad2_[i] + (a - f) * cf.lap_f()[i];
    }
    fhat_.resize(KK_);
    std::vector<cplx> fg(cf.f().begin(), cf.f().end());
    tr_.analyze(fg, fhat_);

    for (auto* v : {&ga_, &gzz_, &gz_, &gxz_, &gyz_, &phys_}) v->resize(G);
    for (auto* v : {&ma_, &mzz_, &mz_, &mxz_, &myz_, &back_}) v->resize(KK_);
  }

  [[nodiscard]] std::size_t size() const { return KK_ * M_; }
  [[nodiscard]] std::size_t modes() const { return KK_; }
  [[nodiscard]] int levels() const { return M_; }
  [[nodiscard]] const SlabImpedance& slab(std::size_t k) const { return slab_[k]; }

  [[nodiscard]] std::vector<cplx> rhs() const {
    std::vector<cplx> b(size());
    const std::size_t k0 = KK_ / 2;
    const cplx zeta0 = slab_[k0].zeta / cfg_.rho;
    cplx* top = &b[(M_ - 1) * KK_];
    for (std::size_t k = 0; k < KK_; ++k) top[k] = -zeta0 * fhat_[k] / cfg_.a;
    top[k0] += zeta0;
    return b;
  }

  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) {
    y.assign(size(), cplx{});
    auto level = [&](int l) -> const cplx* { return l == 0 ? nullptr : &x[(l - 1) * KK_]; };
    const double a = cfg_.a;
    const double inv_a2 = 1.0 / (a * a);

    for (int j = 1; j < M_; ++j) {
      const Stencil& s2 = d2_[j - 1];
      const Stencil& s1 = d1_[j - 1];
      std::fill(mzz_.begin(), mzz_.end(), cplx{});
      std::fill(mz_.begin(), mz_.end(), cplx{});
      accumulate(s2, level, mzz_);
      accumulate(s1, level, mz_);
      const cplx* u = level(j);
      cplx* out = &y[(j - 1) * KK_];
      for (std::size_t k = 0; k < KK_; ++k) {
        ma_[k] = lam_[k] * u[k];
        out[k] = ma_[k] + mzz_[k];
      }
      if (cf_.flat()) continue;

      for (std::size_t k = 0; k < KK_; ++k) {
        mxz_[k] = I1 * alpha1_[k] * mz_[k];
        myz_[k] = I1 * alpha2_[k] * mz_[k];
      }
      tr_.synthesize(ma_, ga_);
      tr_.synthesize(mzz_, gzz_);
      tr_.synthesize(mz_, gz_);
      tr_.synthesize(mxz_, gxz_);
      tr_.synthesize(myz_, gyz_);
      const double r = a - cf_.z(j);
      for (std::size_t i = 0; i < phys_.size(); ++i)
        phys_[i] = d1c_[i] * ga_[i] + r * r * grad2_[i] * gzz_[i] -
                   r * (q3_[i] * gxz_[i] + q4_[i] * gyz_[i] + q5_[i] * gz_[i]);
      tr_.analyze(phys_, back_);
      for (std::size_t k = 0; k < KK_; ++k) out[k] += back_[k] * inv_a2;
    }

    // Interface row: d/dz u(a-) = (1/rho)(1 - f/a)(Z u(a) + zeta); zeta moves to the rhs.
    std::fill(mz_.begin(), mz_.end(), cplx{});
    accumulate(d1_top_, level, mz_);
    const cplx* U = level(M_);
    cplx* out = &y[(M_ - 1) * KK_];
    for (std::size_t k = 0; k < KK_; ++k) {
      ma_[k] = slab_[k].Z * U[k];
      out[k] = mz_[k] - ma_[k] / cfg_.rho;
    }
    if (cf_.flat()) return;
    tr_.synthesize(ma_, ga_);
    for (std::size_t i = 0; i < phys_.size(); ++i) phys_[i] = cf_.f()[i] * ga_[i];
    tr_.analyze(phys_, back_);
    const cplx s = 1.0 / (cfg_.rho * a);
    for (std::size_t k = 0; k < KK_; ++k) out[k] += s * back_[k];
  }

  // Dense matrix of the same operator. Products with lateral coefficients become
  // convolutions with their grid DFTs, which is exactly what the collocation computes.
  [[nodiscard]] Eigen::MatrixXcd assemble(int I) const {
    const std::size_t n = size();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const int W = 2 * N_;
    const int KW = 2 * W + 1;
    WindowTransform wide(W, I, I);
    auto spectrum_of = [&](const std::vector<double>& v) {
      std::vector<cplx> g(v.begin(), v.end()), s(static_cast<std::size_t>(KW) * KW);
      wide.analyze(g, s);
      return s;
    };
    const auto D1 = spectrum_of(d1c_), Gr = spectrum_of(grad2_), Q3 = spectrum_of(q3_), Q4 = spectrum_of(q4_),
               Q5 = spectrum_of(q5_), F = spectrum_of(cf_.f());
    const auto ms = mode_set(N_);
    auto conv = [&](const std::vector<cplx>& s, std::size_t k, std::size_t m) {
      const int p1 = ms[k].n1 - ms[m].n1 + W, p2 = ms[k].n2 - ms[m].n2 + W;
      return s[static_cast<std::size_t>(p1) * KW + p2];
    };
    auto col = [&](int l, std::size_t m) { return static_cast<Eigen::Index>((l - 1) * KK_ + m); };
    const double a = cfg_.a;
    const double inv_a2 = 1.0 / (a * a);

    for (int j = 1; j < M_; ++j) {
      const Stencil& s2 = d2_[j - 1];
      const Stencil& s1 = d1_[j - 1];
      const double r = a - cf_.z(j);
      for (std::size_t k = 0; k < KK_; ++k) {
        const auto row = col(j, k);
        A(row, col(j, k)) += lam_[k];
        for (std::size_t t = 0; t < s2.w.size(); ++t)
          if (s2.first + static_cast<int>(t) > 0) A(row, col(s2.first + static_cast<int>(t), k)) += s2.w[t];
        if (cf_.flat()) continue;
        for (std::size_t m = 0; m < KK_; ++m) {
          A(row, col(j, m)) += inv_a2 * conv(D1, k, m) * lam_[m];
          const cplx cz = -r * inv_a2 *
                          (conv(Q3, k, m) * I1 * alpha1_[m] + conv(Q4, k, m) * I1 * alpha2_[m] + conv(Q5, k, m));
          const cplx czz = r * r * inv_a2 * conv(Gr, k, m);
          for (std::size_t t = 0; t < s2.w.size(); ++t) {
            const int l = s2.first + static_cast<int>(t);
            if (l > 0) A(row, col(l, m)) += czz * s2.w[t];
          }
          for (std::size_t t = 0; t < s1.w.size(); ++t) {
            const int l = s1.first + static_cast<int>(t);
            if (l > 0) A(row, col(l, m)) += cz * s1.w[t];
          }
        }
      }
    }
    for (std::size_t k = 0; k < KK_; ++k) {
      const auto row = col(M_, k);
      for (std::size_t t = 0; t < d1_top_.w.size(); ++t) {
        const int l = d1_top_.first + static_cast<int>(t);
        if (l > 0) A(row, col(l, k)) += d1_top_.w[t];
      }
      A(row, col(M_, k)) -= slab_[k].Z / cfg_.rho;
      if (cf_.flat()) continue;
      for (std::size_t m = 0; m < KK_; ++m) A(row, col(M_, m)) += conv(F, k, m) * slab_[m].Z / (cfg_.rho * a);
    }
    return A;
  }

  // Flat-surface operator, one M x M block per mode; used as the preconditioner.
  [[nodiscard]] Eigen::MatrixXcd flat_block(std::size_t k) const {
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(M_, M_);
    for (int j = 1; j < M_; ++j) {
      B(j - 1, j - 1) += lam_[k];
      const Stencil& s2 = d2_[j - 1];
      for (std::size_t t = 0; t < s2.w.size(); ++t) {
        const int l = s2.first + static_cast<int>(t);
        if (l > 0) B(j - 1, l - 1) += s2.w[t];
      }
    }
    for (std::size_t t = 0; t < d1_top_.w.size(); ++t) {
      const int l = d1_top_.first + static_cast<int>(t);
      if (l > 0) B(M_ - 1, l - 1) += d1_top_.w[t];
    }
    B(M_ - 1, M_ - 1) -= slab_[k].Z / cfg_.rho;
    return B;
  }

 private:
  template <class Level>
  void accumulate(const Stencil& s, Level&& level, std::vector<cplx>& out) const {
    for (std::size_t t = 0; t < s.w.size(); ++t) {
      const int l = s.first + static_cast<int>(t);
      if (l == 0) continue;
      const cplx* u = level(l);
      const double w = s.w[t];
      for (std::size_t k = 0; k < KK_; ++k) out[k] += w * u[k];
    }
  }

  const CoefficientFields& cf_;
  PhysicalConfig cfg_;
  int N_;
  int K_;
  std::size_t KK_;
  int M_;
  double h_;
  WindowTransform tr_;
  std::vector<double> lam_, alpha1_, alpha2_;
  std::vector<SlabImpedance> slab_;
  std::vector<Stencil> d2_, d1_;
  Stencil d1_top_;
  std::vector<double> d1c_, grad2_, q3_, q4_, q5_;
  std::vector<cplx> fhat_;
  std::vector<cplx> ga_, gzz_, gz_, gxz_, gyz_, phys_;
  std::vector<cplx> ma_, mzz_, mz_, mxz_, myz_, back_;
};

class FlatPreconditioner {
 public:
  explicit FlatPreconditioner(const TransformedOperator& op, int N) : KK_(op.modes()), M_(op.levels()) {
    std::map<std::pair<int, int>, std::size_t> classes;
    cls_.resize(KK_);
    std::size_t k = 0;
    for (const ModeIndex n : mode_set(N)) {
      const auto key = std::pair{std::abs(n.n1), std::abs(n.n2)};
      auto it = classes.find(key);
      if (it == classes.end()) {
        it = classes.emplace(key, lu_.size()).first;
        lu_.emplace_back(op.flat_block(k));
      }
      cls_[k] = it->second;
      ++k;
    }
  }

  void apply(const std::vector<cplx>& v, std::vector<cplx>& out) const {
    out.resize(v.size());
    Eigen::VectorXcd col(M_);
    for (std::size_t k = 0; k < KK_; ++k) {
      for (int j = 0; j < M_; ++j) col(j) = v[j * KK_ + k];
      const Eigen::VectorXcd s = lu_[cls_[k]].solve(col);
      for (int j = 0; j < M_; ++j) out[j * KK_ + k] = s(j);
    }
  }

 private:
  std::size_t KK_;
  int M_;
  std::vector<std::size_t> cls_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;
};

double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

// Right-preconditioned restarted GMRES. Returns (iterations, true relative residual).
std::pair<int, double> gmres(TransformedOperator& op, const FlatPreconditioner& pre, const std::vector<cplx>& b,
                             std::vector<cplx>& x, double tol, int iter_max, const ProgressFn& progress) {
  constexpr int kRestart = 40;
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(n, cplx{});
    return {0, 0.0};
  }
  pre.apply(b, x);
  std::vector<cplx> r(n), w(n), z(n);
  int iters = 0;
  double rel = 0.0;
  while (true) {
    op.apply(x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    const double beta = norm2(r);
    rel = beta / bnorm;
    if (rel <= tol) return {iters, rel};
    if (iters >= iter_max) {
      std::ostringstream os;
      os << "GMRES reached iter_max = " << iter_max << " with relative residual " << rel << " > " << tol;
      throw NoConvergence(os.str());
    }

    std::vector<std::vector<cplx>> V{r};
    for (auto& v : V[0]) v /= beta;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(kRestart + 1, kRestart);
    std::vector<double> cs(kRestart);
    std::vector<cplx> sn(kRestart);
    std::vector<cplx> g(kRestart + 1);
    g[0] = beta;
    int used = 0;
    for (int j = 0; j < kRestart && iters < iter_max; ++j) {
      pre.apply(V[j], z);
      op.apply(z, w);
      for (int i = 0; i <= j; ++i) {
        cplx hij{};
        for (std::size_t t = 0; t < n; ++t) hij += std::conj(V[i][t]) * w[t];
        H(i, j) = hij;
        for (std::size_t t = 0; t < n; ++t) w[t] -= hij * V[i][t];
      }
      const double hn = norm2(w);
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const cplx t1 = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn[i]) * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t1;
      }
      const cplx h1 = H(j, j), h2 = H(j + 1, j);
      const double t = std::hypot(std::abs(h1), std::abs(h2));
      if (std::abs(h1) == 0.0) {
        cs[j] = 0.0;
        sn[j] = std::conj(h2) / std::abs(h2);
      } else {
        cs[j] = std::abs(h1) / t;
        sn[j] = h1 / std::abs(h1) * std::conj(h2) / t;
      }
      H(j, j) = cs[j] * h1 + sn[j] * h2;
      H(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      ++iters;
      ++used;
      const double est = std::abs(g[j + 1]) / bnorm;
      if (progress) progress(iters, est);
      if (est <= 0.5 * tol || hn == 0.0) break;
      V.emplace_back(w);
      for (auto& v : V.back()) v /= hn;
    }
    Eigen::VectorXcd y(used);
    for (int i = used - 1; i >= 0; --i) {
      cplx s = g[i];
      for (int k = i + 1; k < used; ++k) s -= H(i, k) * y(k);
      y(i) = s / H(i, i);
    }
    std::fill(w.begin(), w.end(), cplx{});
    for (int i = 0; i < used; ++i)
      for (std::size_t t = 0; t < n; ++t) w[t] += y(i) * V[i][t];
    pre.apply(w, z);
    for (std::size_t t = 0; t < n; ++t) x[t] += z[t];
  }
}

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvariantError("truncated forward-solution file");
  return v;
}

void put_complex(std::ofstream& os, std::span<const cplx> v) {
  for (const auto& c : v) {
    put(os, c.real());
    put(os, c.imag());
  }
}

void get_complex(std::ifstream& is, std::span<cplx> v) {
  for (auto& c : v) {
    const double re = get<double>(is);
    c = {re, get<double>(is)};
  }
}

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

}  // namespace

std::string to_string(SolverKind kind) { return kind == SolverKind::DenseDirect ? "dense" : "iterative"; }

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "dense") return SolverKind::DenseDirect;
  if (name == "iterative") return SolverKind::Iterative;
  throw InvalidConfig("solver must be 'dense' or 'iterative', got '" + name + "'");
}

void Discretization::validate() const {
  if (N_f < 0) throw InvalidConfig("N_f must be >= 0");
  if (I <= 2 * N_f) {
    std::ostringstream os;
    os << "Nyquist: I = " << I << " must exceed 2 N_f = " << 2 * N_f;
    throw NyquistViolation(os.str());
  }
  if (M < 8) throw InvalidConfig("M must be >= 8");
  if (fd_order != 2 && fd_order != 4) throw InvalidConfig("fd_order must be 2 or 4");
  if (!(iter_tol > 0.0 && iter_tol <= 1e-4)) throw InvalidConfig("iter_tol must lie in (0, 1e-4]");
  if (iter_max < 1) throw InvalidConfig("iter_max must be >= 1");
}

Discretization Discretization::fast() {
  Discretization d;
  d.I = 33;
  d.N_f = 8;
  d.M = 32;
  return d;
}

CoefficientFields::CoefficientFields(int rows, int cols, int M, double a, std::vector<double> f,
                                     std::vector<double> fx, std::vector<double> fy, std::vector<double> lap_f)
    : rows_(rows), cols_(cols), M_(M), a_(a), f_(std::move(f)), fx_(std::move(fx)), fy_(std::move(fy)),
      lap_(std::move(lap_f)) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (f_.size() != n || fx_.size() != n || fy_.size() != n || lap_.size() != n)
    throw GridMismatch("coefficient grids do not match rows x cols");
  for (std::size_t i = 0; i < n; ++i) {
    if (f_[i] >= a_) throw ProfileTooTall("surface reaches the slab: f >= a at a grid point");
    if (f_[i] != 0.0 || fx_[i] != 0.0 || fy_[i] != 0.0 || lap_[i] != 0.0) flat_ = false;
  }
}

double CoefficientFields::c1(std::size_t i) const { return (a_ - f_[i]) * (a_ - f_[i]); }

double CoefficientFields::c2(int j, std::size_t i) const {
  const double r = a_ - z(j);
  return a_ * a_ + r * r * (fx_[i] * fx_[i] + fy_[i] * fy_[i]);
}

double CoefficientFields::c3(int j, std::size_t i) const { return 2.0 * (a_ - z(j)) * (a_ - f_[i]) * fx_[i]; }

double CoefficientFields::c4(int j, std::size_t i) const { return 2.0 * (a_ - z(j)) * (a_ - f_[i]) * fy_[i]; }

double CoefficientFields::c5(int j, std::size_t i) const {
  const double g2 = fx_[i] * fx_[i] + fy_[i] * fy_[i];
  return (a_ - z(j)) * (2.0 * g2 + (a_ - f_[i]) * lap_[i]);
}

CoefficientFields coefficient_fields(const SurfaceProfile& profile, const PhysicalConfig& cfg,
                                     const Discretization& disc) {
  cfg.validate();
  disc.validate();
  if (rel_mismatch(profile.period1(), cfg.period1) > 1e-12 || rel_mismatch(profile.period2(), cfg.period2) > 1e-12)
    throw GridMismatch("profile periods differ from the configured periods");
  if (cfg.epsilon * profile.sup_abs() >= cfg.a) {
    std::ostringstream os;
    os << "epsilon * sup|g| = " << cfg.epsilon * profile.sup_abs() << " must stay below a = " << cfg.a;
    throw ProfileTooTall(os.str());
  }
  const SurfaceProfile smooth = profile.has_derivatives()
                                    ? profile
                                    : SurfaceProfile::from_spectrum(profile_spectrum(profile, disc.N_f, disc.I),
                                                                    cfg.period1, cfg.period2);
  const ProfileGrids s = smooth.sample(disc.I, disc.I);
  auto scaled = [&](const std::vector<double>& v) {
    std::vector<double> out(v);
    for (auto& x : out) x *= cfg.epsilon;
    return out;
  };
  return CoefficientFields(disc.I, disc.I, disc.M, cfg.a, scaled(s.g), scaled(s.gx), scaled(s.gy), scaled(s.lap));
}

SlabImpedance slab_impedance(ModeIndex n, const PhysicalConfig& cfg) {
  const cplx gamma = gamma_of(n, cfg);
  const cplx eta = eta_of(n, cfg);
  const double h = cfg.h();
  SlabImpedance s;
  s.C = std::cos(eta * h);
  s.S = std::abs(eta * h) < 1e-4 ? h * (1.0 - (eta * h) * (eta * h) / 6.0) : std::sin(eta * h) / eta;
  const cplx rg = cfg.rho * gamma;
  const cplx den = s.C - I1 * rg * s.S;
  const double scale = std::abs(s.C) + std::abs(rg * s.S);
  if (!(std::abs(den) >= 1e-12 * scale)) {
    std::ostringstream os;
    os << "slab elimination degenerate for mode (" << n.n1 << ", " << n.n2 << ")";
    throw DegenerateSlab(os.str());
  }
  s.Z = (I1 * rg * s.C + eta * eta * s.S) / den;
  s.zeta = (n == ModeIndex{0, 0}) ? cfg.rho * tau_of(cfg) / den : cplx{};
  return s;
}

cplx ForwardSolution::interior_mode(int level, ModeIndex n) const {
  const int K = 2 * disc.N_f + 1;
  return interior[static_cast<std::size_t>(level) * K * K + static_cast<std::size_t>(n.n1 + disc.N_f) * K +
                  static_cast<std::size_t>(n.n2 + disc.N_f)];
}

ForwardSolution solve_forward(const SurfaceProfile& profile, const PhysicalConfig& cfg, const Discretization& disc,
                              const ProgressFn& progress) {
  const CoefficientFields cf = coefficient_fields(profile, cfg, disc);
  TransformedOperator op(cf, cfg, disc);
  const std::vector<cplx> b = op.rhs();
  std::vector<cplx> x;

  ForwardSolution sol;
  sol.disc = disc;
  if (disc.solver == SolverKind::DenseDirect) {
    if (op.size() > kDenseUnknownLimit) {
      std::ostringstream os;
      os << "dense-direct solver limited to " << kDenseUnknownLimit << " unknowns, got " << op.size();
      throw InvalidConfig(os.str());
    }
    const Eigen::MatrixXcd A = op.assemble(disc.I);
    Eigen::VectorXcd bv(static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i) bv(static_cast<Eigen::Index>(i)) = b[i];
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu = A.partialPivLu();
    Eigen::VectorXcd xv = lu.solve(bv);
    const double bn = bv.norm();
    // a few rounds of iterative refinement; the 1/h^2 rows amplify rounding
    for (sol.iterations = 1;; ++sol.iterations) {
      const Eigen::VectorXcd r = bv - A * xv;
      sol.residual = bn > 0.0 ? r.norm() / bn : 0.0;
      if (sol.residual <= 0.1 * disc.iter_tol || sol.iterations >= 4) break;
      xv += lu.solve(r);
    }
    x.assign(xv.data(), xv.data() + xv.size());
    if (sol.residual > disc.iter_tol) throw NearSingularSystem("dense solve left residual above iter_tol");
  } else {
    const FlatPreconditioner pre(op, disc.N_f);
    std::tie(sol.iterations, sol.residual) = gmres(op, pre, b, x, disc.iter_tol, disc.iter_max, progress);
  }

  const std::size_t KK = op.modes();
  sol.interior.assign(KK, cplx{});  // level 0: Dirichlet
  sol.interior.insert(sol.interior.end(), x.begin(), x.end());
  sol.top = ModeArray(disc.N_f);
  const cplx* U = &x[(disc.M - 1) * KK];
  auto tv = sol.top.values();
  for (std::size_t k = 0; k < KK; ++k) tv[k] = op.slab(k).top_value(U[k]);
  sol.top_field = GridField(disc.I, disc.I);
  WindowTransform(disc.N_f, disc.I, disc.I).synthesize(sol.top.values(), sol.top_field.values());
  return sol;
}

ModeArray synthesize_linear_data(const ModeArray& g, const PhysicalConfig& cfg) {
  ModeArray out(g.half1(), g.half2());
  for (const ModeIndex n : g.modes()) out[n] = u0_top(n, cfg) + cfg.epsilon * first_order_top(n, g[n], cfg);
  return out;
}

void write_solution(const std::string& path, const ForwardSolution& sol) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvariantError("cannot open " + path + " for writing");
  os.write("SLFS", 4);
  put<std::uint32_t>(os, 1);
  put<std::int32_t>(os, sol.disc.I);
  put<std::int32_t>(os, sol.disc.N_f);
  put<std::int32_t>(os, sol.disc.M);
  put<std::int32_t>(os, sol.iterations);
  put<double>(os, sol.residual);
  put_complex(os, sol.top.values());
  put_complex(os, sol.top_field.values());
  put_complex(os, sol.interior);
  if (!os) throw InvariantError("write failed for " + path);
}

ForwardSolution read_solution(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvariantError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SLFS", 4) != 0) throw InvariantError(path + " is not a forward-solution dump");
  if (get<std::uint32_t>(is) != 1) throw InvariantError("unsupported forward-solution version");
  ForwardSolution sol;
  sol.disc.I = get<std::int32_t>(is);
  sol.disc.N_f = get<std::int32_t>(is);
  sol.disc.M = get<std::int32_t>(is);
  sol.iterations = get<std::int32_t>(is);
  sol.residual = get<double>(is);
  if (sol.disc.I <= 0 || sol.disc.N_f < 0 || sol.disc.M < 1 || sol.disc.I > 1 << 14 || sol.disc.N_f > 1 << 12)
    throw InvariantError("corrupt forward-solution header");
  sol.top = ModeArray(sol.disc.N_f);
  sol.top_field = GridField(sol.disc.I, sol.disc.I);
  const std::size_t K = 2 * static_cast<std::size_t>(sol.disc.N_f) + 1;
  sol.interior.resize((static_cast<std::size_t>(sol.disc.M) + 1) * K * K);
  get_complex(is, sol.top.values());
  get_complex(is, sol.top_field.values());
  get_complex(is, sol.interior);
  return sol;
}

}  // namespace superlens
