#include "superlens/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "superlens/errors.hpp"
#include "superlens/io.hpp"
#include "superlens/tfe.hpp"

namespace superlens {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool g_verbose = false;

void log(const std::string& msg) {
  if (g_verbose) std::cerr << msg << std::endl;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw InvalidConfig("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    throw InvalidConfig("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

int parse_small_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < -1000000 || x > 1000000) throw InvalidConfig("key '" + key + "': value out of range");
  return static_cast<int>(x);
}

struct KeyDef {
  ConfigKey doc;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

// Order matters where one key depends on another (h after a).
const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = [] {
    std::vector<KeyDef> d;
    auto num = [&](std::string name, std::string help, auto field) {
      d.push_back({{name, "", help},
                   [name, field](ExperimentConfig& c, const std::string& v) { field(c) = parse_double(name, v); },
                   [field](const ExperimentConfig& c) { return fmt(field(const_cast<ExperimentConfig&>(c))); }});
    };
    auto integer = [&](std::string name, std::string help, auto field) {
      d.push_back({{name, "", help},
                   [name, field](ExperimentConfig& c, const std::string& v) { field(c) = parse_small_int(name, v); },
                   [field](const ExperimentConfig& c) {
                     return std::to_string(field(const_cast<ExperimentConfig&>(c)));
                   }});
    };
    auto text = [&](std::string name, std::string help, auto field) {
      d.push_back({{name, "", help}, [field](ExperimentConfig& c, const std::string& v) { field(c) = v; },
                   [field](const ExperimentConfig& c) { return field(const_cast<ExperimentConfig&>(c)); }});
    };

    d.push_back({{"wavelength", "", "incident wavelength lambda (omega = 2 pi / lambda)"},
                 [](ExperimentConfig& c, const std::string& v) {
                   c.phys.omega = kTwoPi / parse_double("wavelength", v);
                 },
                 [](const ExperimentConfig& c) { return fmt(c.phys.wavelength()); }});
    num("period1", "grating period along x", [](ExperimentConfig& c) -> double& { return c.phys.period1; });
    num("period2", "grating period along y", [](ExperimentConfig& c) -> double& { return c.phys.period2; });
    d.push_back({{"a", "", "height of the slab's lower face"},
                 [](ExperimentConfig& c, const std::string& v) {
                   const double h = c.phys.h();
                   c.phys.a = parse_double("a", v);
                   c.phys.b = c.phys.a + h;
                 },
                 [](const ExperimentConfig& c) { return fmt(c.phys.a); }});
    d.push_back({{"h", "", "slab thickness (measurement plane at b = a + h)"},
                 [](ExperimentConfig& c, const std::string& v) { c.phys.b = c.phys.a + parse_double("h", v); },
                 [](const ExperimentConfig& c) { return fmt(c.phys.h()); }});
    d.push_back({{"rho_re", "", "Re of the slab density"},
                 [](ExperimentConfig& c, const std::string& v) { c.phys.rho.real(parse_double("rho_re", v)); },
                 [](const ExperimentConfig& c) { return fmt(c.phys.rho.real()); }});
    d.push_back({{"rho_im", "", "Im of the slab density"},
                 [](ExperimentConfig& c, const std::string& v) { c.phys.rho.imag(parse_double("rho_im", v)); },
                 [](const ExperimentConfig& c) { return fmt(c.phys.rho.imag()); }});
    d.push_back({{"kappa_re", "", "Re of the slab bulk modulus"},
                 [](ExperimentConfig& c, const std::string& v) { c.phys.kappa.real(parse_double("kappa_re", v)); },
                 [](const ExperimentConfig& c) { return fmt(c.phys.kappa.real()); }});
    d.push_back({{"kappa_im", "", "Im of the slab bulk modulus"},
                 [](ExperimentConfig& c, const std::string& v) { c.phys.kappa.imag(parse_double("kappa_im", v)); },
                 [](const ExperimentConfig& c) { return fmt(c.phys.kappa.imag()); }});
    num("epsilon", "deformation amplitude (f = epsilon g)",
        [](ExperimentConfig& c) -> double& { return c.phys.epsilon; });
    text("profile", "profile1 | profile2 | image | flat | none",
         [](ExperimentConfig& c) -> std::string& { return c.profile; });
    text("image", "PGM file for profile = image (empty: built-in glyph)",
         [](ExperimentConfig& c) -> std::string& { return c.image; });
    num("threshold", "indicator threshold for image profiles", [](ExperimentConfig& c) -> double& { return c.threshold; });
    integer("I", "samples per period on the measurement grid", [](ExperimentConfig& c) -> int& { return c.disc.I; });
    integer("N_f", "lateral mode cut-off of the forward solver", [](ExperimentConfig& c) -> int& { return c.disc.N_f; });
    integer("M", "z intervals in the forward solver", [](ExperimentConfig& c) -> int& { return c.disc.M; });
    integer("fd_order", "finite-difference order in z (2 or 4)",
            [](ExperimentConfig& c) -> int& { return c.disc.fd_order; });
    d.push_back({{"solver", "", "iterative | dense"},
                 [](ExperimentConfig& c, const std::string& v) { c.disc.solver = solver_kind_from_string(v); },
                 [](const ExperimentConfig& c) { return to_string(c.disc.solver); }});
    num("iter_tol", "relative residual tolerance of the forward solver",
        [](ExperimentConfig& c) -> double& { return c.disc.iter_tol; });
    integer("iter_max", "iteration cap of the forward solver",
            [](ExperimentConfig& c) -> int& { return c.disc.iter_max; });
    num("sigma", "noise standard deviation of Re and Im per sample",
        [](ExperimentConfig& c) -> double& { return c.noise.sigma; });
    d.push_back({{"seed", "", "noise seed"},
                 [](ExperimentConfig& c, const std::string& v) {
                   const long long s = parse_int("seed", v);
                   if (s < 0) throw InvalidConfig("seed must be >= 0");
                   c.noise.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.noise.seed); }});
    num("target_snr", "if > 0, rescale the noise to this SNR (sigma is ignored)",
        [](ExperimentConfig& c) -> double& { return c.target_snr; });
    num("noise_norm", "if > 0, noise level used by the discrepancy principle instead of the realized one",
        [](ExperimentConfig& c) -> double& { return c.noise_norm; });
    num("c", "discrepancy-principle constant", [](ExperimentConfig& c) -> double& { return c.c; });
    integer("N_window", "largest cut-off considered by the inversion",
            [](ExperimentConfig& c) -> int& { return c.N_window; });
    text("output", "output directory", [](ExperimentConfig& c) -> std::string& { return c.output; });

    const ExperimentConfig defaults;
    for (auto& k : d) k.doc.default_value = k.get(defaults);
    return d;
  }();
  return defs;
}

std::string forward_key(const ExperimentConfig& c) {
  std::ostringstream os;
  const auto m = c.to_map();
  for (const char* k : {"wavelength", "period1", "period2", "a", "h", "rho_re", "rho_im", "kappa_re", "kappa_im",
                        "epsilon", "profile", "image", "threshold", "I", "N_f", "M", "fd_order", "solver", "iter_tol",
                        "iter_max"})
    os << k << '=' << m.at(k) << ';';
  return os.str();
}

json config_json(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : c.to_map()) j[k] = v;
  return j;
}

json snr_json(double snr) { return std::isinf(snr) ? json("inf") : json(snr); }

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw InvariantError("cannot create output directory " + d + ": " + ec.message());
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string two_digits(int n) { return (n < 10 ? "0" : "") + std::to_string(n); }

int argmin(const std::vector<double>& v, int upto) {
  int best = 0;
  for (int i = 1; i <= upto && i < static_cast<int>(v.size()); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

void write_inversion_files(const std::string& dir, const ExperimentConfig& cfg, const Inversion& inv) {
  for (int N = 0; N <= cfg.N_window; ++N)
    write_pseudocolor(path_in(dir, "recon_N" + two_digits(N) + ".ppm"), reconstruct(inv.rc, N, cfg.disc.I, cfg.disc.I));
  CsvWriter rw(path_in(dir, "residual.csv"), {"N", "residual", "c_noise_norm"});
  for (std::size_t i = 0; i < inv.curve.N.size(); ++i) {
    rw.cell(inv.curve.N[i]).cell(inv.curve.residual[i]).cell(cfg.c * inv.noise_norm);
    rw.end_row();
  }
  if (!inv.rel_error.empty()) {
    CsvWriter ew(path_in(dir, "relative_error.csv"), {"N", "relative_error"});
    for (std::size_t N = 0; N < inv.rel_error.size(); ++N) {
      ew.cell(static_cast<int>(N)).cell(inv.rel_error[N]);
      ew.end_row();
    }
  }
}

json inversion_json(const ExperimentConfig& cfg, const Inversion& inv) {
  json j;
  j["chosen_N"] = inv.choice.N;
  j["discrepancy_satisfied"] = inv.choice.satisfied;
  j["noise_norm"] = inv.noise_norm;
  j["c"] = cfg.c;
  j["residual"] = inv.curve.residual;
  if (!inv.rel_error.empty()) {
    j["relative_error"] = inv.rel_error;
    j["relative_error_at_chosen_N"] = inv.rel_error[inv.choice.N];
    j["argmin_relative_error_N0_8"] = argmin(inv.rel_error, 8);
  }
  if (inv.decomposition) {
    const auto& d = *inv.decomposition;
    j["decomposition"] = {{"N", d.N},           {"E1", d.norm_E1}, {"E2", d.norm_E2},
                          {"E3", d.norm_E3},    {"beyond_window", d.beyond_window}};
  }
  return j;
}

double grid_max(const GridField& g) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : g.values()) m = std::max(m, v.real());
  return m;
}

double grid_min(const GridField& g) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : g.values()) m = std::min(m, v.real());
  return m;
}

}  // namespace

void set_verbose(bool on) { g_verbose = on; }

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& d : key_defs()) k.push_back(d.doc);
    return k;
  }();
  return keys;
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    bool known = false;
    for (const auto& d : key_defs()) known = known || d.doc.name == k;
    if (!known) throw InvalidConfig("unknown config key '" + k + "'");
  }
  ExperimentConfig c;
  for (const auto& d : key_defs()) {
    const auto it = kv.find(d.doc.name);
    if (it == kv.end())
      c.defaulted.push_back(d.doc.name);
    else
      d.set(c, it->second);
  }
  c.validate();
  return c;
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  for (const auto& d : key_defs()) m[d.doc.name] = d.get(*this);
  return m;
}

void ExperimentConfig::validate() const {
  phys.validate();
  disc.validate();
  if (profile != "profile1" && profile != "profile2" && profile != "image" && profile != "flat" && profile != "none")
    throw InvalidConfig("profile must be profile1, profile2, image, flat or none");
  if (!(threshold > 0.0 && threshold < 1.0)) throw BadThreshold("threshold must lie in (0, 1)");
  if (!(noise.sigma >= 0.0)) throw InvalidConfig("sigma must be >= 0");
  if (target_snr < 0.0) throw InvalidConfig("target_snr must be >= 0");
  if (noise_norm < 0.0) throw InvalidConfig("noise_norm must be >= 0");
  if (!(c > 0.0)) throw InvalidConfig("c must be > 0");
  if (N_window < 0 || N_window > nyquist_half(disc.I))
    throw CutoffOutOfRange("N_window must lie in [0, (I - 1) / 2]");
}

std::optional<SurfaceProfile> build_profile(const ExperimentConfig& cfg) {
  const double p1 = cfg.phys.period1, p2 = cfg.phys.period2;
  if (cfg.profile == "profile1") return make_profile1(p1, p2);
  if (cfg.profile == "profile2") return make_profile2(p1, p2);
  if (cfg.profile == "flat") return SurfaceProfile::flat(0.0, p1, p2);
  if (cfg.profile == "image")
    return profile3_from_image(cfg.image.empty() ? builtin_glyph() : read_pgm(cfg.image), cfg.threshold, p1, p2);
  return std::nullopt;
}

ModeArray truth_spectrum(const SurfaceProfile& p, int W) { return profile_spectrum(p, W, std::max(4 * W + 3, 63)); }

GridField truth_grid(const SurfaceProfile& p, const PhysicalConfig& phys, int I) {
  GridField g(I, I);
  for (int i1 = 0; i1 < I; ++i1)
    for (int i2 = 0; i2 < I; ++i2)
      g(i1, i2) = phys.epsilon * p(i1 * phys.period1 / I, i2 * phys.period2 / I);
  return g;
}

Measurement measure(const ExperimentConfig& cfg, const GridField& clean) {
  if (cfg.target_snr > 0.0) return add_noise_at_snr(clean, cfg.target_snr, cfg.noise.seed);
  return add_noise(clean, cfg.noise);
}

Inversion invert(const ExperimentConfig& cfg, const Measurement& meas, const SurfaceProfile* truth,
                 const ModeArray* clean_top) {
  if (meas.u_delta.rows() != cfg.disc.I || meas.u_delta.cols() != cfg.disc.I) {
    std::ostringstream os;
    os << "data grid " << meas.u_delta.rows() << " x " << meas.u_delta.cols() << " does not match I = " << cfg.disc.I;
    throw GridMismatch(os.str());
  }
  Inversion inv;
  inv.U = dft2(meas.u_delta);
  inv.rc = recon_coefficients(inv.U, cfg.phys);
  inv.curve = residual_curve(inv.U, cfg.phys, cfg.N_window);
  inv.noise_norm = cfg.noise_norm > 0.0 ? cfg.noise_norm : grid_l2_norm(meas.delta);
  inv.choice = choose_cutoff(inv.curve, inv.noise_norm, cfg.c);
  if (truth) {
    inv.rel_error = relative_error_curve(inv.rc, truth_grid(*truth, cfg.phys, cfg.disc.I), cfg.N_window);
    if (clean_top) {
      const ModeArray g = truth_spectrum(*truth, nyquist_half(cfg.disc.I));
      inv.decomposition = error_decomposition(g, *clean_top, meas, inv.choice.N, cfg.phys);
    }
  }
  return inv;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, const ForwardSolution* cached) {
  const auto profile = build_profile(cfg);
  if (!profile) throw InvalidConfig("the pipeline needs a profile (profile = none given)");
  PipelineResult r;
  if (cached) {
    r.forward = *cached;
  } else {
    log("forward solve: " + forward_key(cfg));
    r.forward = solve_forward(*profile, cfg.phys, cfg.disc, [](int it, double res) {
      if (g_verbose && it % 5 == 0) std::cerr << "  gmres " << it << "  " << res << std::endl;
    });
  }
  r.meas = measure(cfg, r.forward.top_field);
  r.inv = invert(cfg, r.meas, &*profile, &r.forward.top);
  return r;
}

std::vector<std::map<std::string, std::string>> experiment_rows(int id) {
  using M = std::map<std::string, std::string>;
  switch (id) {
    case 1:
      return {M{{"profile", "profile1"}, {"sigma", "0.005"}},
              M{{"profile", "profile1"}, {"sigma", "0.01"}},
              M{{"profile", "profile1"}, {"sigma", "0.02"}}};
    case 2:
      return {M{{"profile", "profile2"}, {"sigma", "0.005"}},
              M{{"profile", "profile2"}, {"rho_im", "0.001"}, {"kappa_im", "0.001"}, {"sigma", "0.0009"}},
              // slab absent; the printed sigma = 1 is kept for the record but the noise is set by SNR
              M{{"profile", "profile2"},
                {"rho_re", "1"},
                {"rho_im", "0"},
                {"kappa_re", "1"},
                {"kappa_im", "0"},
                {"sigma", "1"},
                {"target_snr", "9.3"}}};
    case 3:
      return {M{{"profile", "image"}, {"rho_im", "0.001"}, {"kappa_im", "0.001"}, {"sigma", "0.0025"}, {"c", "1.3"}},
              M{{"profile", "image"},
                {"rho_im", "0.001"},
                {"kappa_im", "0.001"},
                {"epsilon", "0.01"},
                {"sigma", "0.031"},
                {"c", "1.3"}}};
    default:
      throw InvalidConfig("experiment id must be 1, 2 or 3");
  }
}

std::vector<double> experiment_reference_snr(int id) {
  switch (id) {
    case 1: return {10.9, 5.5, 2.8};
    case 2: return {9.4, 9.3, 9.3};
    case 3: return {10.6, 10.6};
    default: throw InvalidConfig("experiment id must be 1, 2 or 3");
  }
}

std::vector<double> experiment_snr_sweep(int id) {
  switch (id) {
    case 1: return {0.55, 1.1, 2.8, 5.5, 11.0, 22.0, 44.0};
    case 2: return {0.84, 2.1, 5.3, 9.3, 21.0};
    case 3: return {1.3, 2.6, 5.3, 10.6, 21.0};
    default: throw InvalidConfig("experiment id must be 1, 2 or 3");
  }
}

std::string cmd_forward(const ExperimentConfig& cfg) {
  const auto profile = build_profile(cfg);
  if (!profile) throw InvalidConfig("forward needs a profile (profile = none given)");
  ensure_dir(cfg.output);
  const auto t0 = std::chrono::steady_clock::now();
  const ForwardSolution sol = solve_forward(*profile, cfg.phys, cfg.disc);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Measurement meas = measure(cfg, sol.top_field);

  {
    CsvWriter w(path_in(cfg.output, "top_field.csv"), {"i1", "i2", "re_u", "im_u", "abs_u"});
    for (int i1 = 0; i1 < cfg.disc.I; ++i1)
      for (int i2 = 0; i2 < cfg.disc.I; ++i2) {
        const cplx u = sol.top_field(i1, i2);
        w.cell(i1).cell(i2).cell(u.real()).cell(u.imag()).cell(std::abs(u));
        w.end_row();
      }
    CsvWriter c(path_in(cfg.output, "top_coefficients.csv"), {"n1", "n2", "re_u", "im_u"});
    for (const ModeIndex n : sol.top.modes()) {
      c.cell(n.n1).cell(n.n2).cell(sol.top[n].real()).cell(sol.top[n].imag());
      c.end_row();
    }
  }
  write_measurement_csv(path_in(cfg.output, "measurement.csv"), meas);
  write_pseudocolor(path_in(cfg.output, "abs_top.ppm"), sol.top_field, true);
  write_solution(path_in(cfg.output, "solution.bin"), sol);

  json j;
  j["command"] = "forward";
  j["config"] = config_json(cfg);
  j["defaulted"] = cfg.defaulted;
  j["iterations"] = sol.iterations;
  j["residual"] = sol.residual;
  j["seconds"] = secs;
  j["snr"] = snr_json(meas.snr);
  j["sigma_effective"] = meas.sigma;
  j["noise_norm"] = grid_l2_norm(meas.delta);
  j["data_norm"] = grid_l2_norm(sol.top_field);
  const cplx u00 = sol.top[{0, 0}];
  j["u0_top"] = {u00.real(), u00.imag()};
  const std::string out = j.dump(2) + "\n";
  write_text_file(path_in(cfg.output, "forward.json"), out);
  return out;
}

std::string cmd_invert(const ExperimentConfig& cfg, const std::string& data_file) {
  const Measurement meas = read_measurement_csv(data_file);
  const auto truth = build_profile(cfg);
  ensure_dir(cfg.output);
  const Inversion inv = invert(cfg, meas, truth ? &*truth : nullptr, nullptr);
  write_inversion_files(cfg.output, cfg, inv);
  json j = inversion_json(cfg, inv);
  j["command"] = "invert";
  j["data_file"] = data_file;
  j["config"] = config_json(cfg);
  j["defaulted"] = cfg.defaulted;
  j["snr"] = snr_json(meas.snr);
  const std::string out = j.dump(2) + "\n";
  write_text_file(path_in(cfg.output, "invert.json"), out);
  return out;
}

std::string cmd_sweep_sn(const ExperimentConfig& cfg, const std::vector<std::pair<cplx, cplx>>& media) {
  ensure_dir(cfg.output);
  json sets = json::array();
  for (std::size_t k = 0; k < media.size(); ++k) {
    PhysicalConfig phys = cfg.phys;
    phys.rho = media[k].first;
    phys.kappa = media[k].second;
    const auto rows = scaling_sweep(phys, cfg.N_window);
    const std::string name = "sweep_sn_" + std::to_string(k) + ".csv";
    CsvWriter w(path_in(cfg.output, name),
                {"n1", "n2", "norm_inf", "abs_alpha", "re_s", "im_s", "abs_s", "log10_abs_s", "resonant"});
    std::vector<double> shell_max(cfg.N_window + 1, 0.0);
    for (const auto& r : rows) {
      w.cell(r.n.n1).cell(r.n.n2).cell(norm_inf(r.n)).cell(r.abs_alpha).cell(r.s.real()).cell(r.s.imag());
      w.cell(r.abs_s).cell(r.log10_abs_s).cell(r.resonant ? 1 : 0);
      w.end_row();
      if (!r.resonant) shell_max[norm_inf(r.n)] = std::max(shell_max[norm_inf(r.n)], r.abs_s);
    }
    // knee: first shell whose largest |s_n| exceeds ten times |s_0|
    int knee = -1;
    for (int s = 1; s <= cfg.N_window && knee < 0; ++s)
      if (shell_max[s] > 10.0 * shell_max[0]) knee = s;
    sets.push_back({{"file", name},
                    {"rho", {phys.rho.real(), phys.rho.imag()}},
                    {"kappa", {phys.kappa.real(), phys.kappa.imag()}},
                    {"knee", knee},
                    {"shell_max_abs_s", shell_max}});
  }
  json j;
  j["command"] = "sweep-sn";
  j["config"] = config_json(cfg);
  j["defaulted"] = cfg.defaulted;
  j["sets"] = sets;
  const std::string out = j.dump(2) + "\n";
  write_text_file(path_in(cfg.output, "sweep_sn.json"), out);
  return out;
}

std::string cmd_experiment(int id, const std::map<std::string, std::string>& overrides) {
  const auto rows = experiment_rows(id);
  const auto ref = experiment_reference_snr(id);
  const std::string base = overrides.contains("output") ? overrides.at("output") : ExperimentConfig{}.output;
  const std::string root = path_in(base, "experiment" + std::to_string(id));
  ensure_dir(root);

  std::map<std::string, ForwardSolution> cache;
  json jrows = json::array();
  std::vector<ExperimentConfig> cfgs;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto kv = rows[r];
    for (const auto& [k, v] : overrides) kv[k] = v;
    kv["output"] = path_in(root, "row" + std::to_string(r + 1));
    const ExperimentConfig cfg = ExperimentConfig::from_map(kv);
    cfgs.push_back(cfg);
    ensure_dir(cfg.output);
    log("experiment " + std::to_string(id) + " row " + std::to_string(r + 1));

    const std::string key = forward_key(cfg);
    const auto hit = cache.find(key);
    PipelineResult res = run_pipeline(cfg, hit == cache.end() ? nullptr : &hit->second);
    if (hit == cache.end()) cache.emplace(key, res.forward);

    const auto profile = build_profile(cfg);
    const GridField truth = truth_grid(*profile, cfg.phys, cfg.disc.I);
    write_pseudocolor(path_in(cfg.output, "truth.ppm"), truth);
    write_inversion_files(cfg.output, cfg, res.inv);
    write_measurement_csv(path_in(cfg.output, "measurement.csv"), res.meas);

    const ModeArray g = truth_spectrum(*profile, nyquist_half(cfg.disc.I));
    CsvWriter dw(path_in(cfg.output, "decomposition.csv"), {"N", "E1", "E2", "E3", "beyond_window"});
    for (int N = 0; N <= cfg.N_window; ++N) {
      const auto d = error_decomposition(g, res.forward.top, res.meas, N, cfg.phys);
      dw.cell(N).cell(d.norm_E1).cell(d.norm_E2).cell(d.norm_E3).cell(d.beyond_window);
      dw.end_row();
    }

    json jr = inversion_json(cfg, res.inv);
    jr["row"] = r + 1;
    jr["config"] = config_json(cfg);
    jr["defaulted"] = cfg.defaulted;
    jr["snr"] = snr_json(res.meas.snr);
    jr["reference_snr"] = ref[r];
    jr["sigma_effective"] = res.meas.sigma;
    jr["forward_iterations"] = res.forward.iterations;
    jr["forward_residual"] = res.forward.residual;
    const GridField rec = reconstruct(res.inv.rc, res.inv.choice.N, cfg.disc.I, cfg.disc.I);
    jr["truth_range"] = {grid_min(truth), grid_max(truth)};
    jr["recon_range_at_chosen_N"] = {grid_min(rec), grid_max(rec)};
    write_text_file(path_in(cfg.output, "row.json"), jr.dump(2) + "\n");
    jrows.push_back(jr);
  }

  // SNR robustness sweep on the reference row, reusing its clean data.
  const std::size_t sweep_row = id == 2 ? 1 : 0;
  const ExperimentConfig& scfg = cfgs[sweep_row];
  const ForwardSolution& fsol = cache.at(forward_key(scfg));
  const auto profile = build_profile(scfg);
  const std::string sdir = path_in(root, "snr_sweep");
  ensure_dir(sdir);
  CsvWriter sw(path_in(sdir, "snr_sweep.csv"), {"target_snr", "realized_snr", "chosen_N", "satisfied", "relative_error"});
  json jsweep = json::array();
  const auto snrs = experiment_snr_sweep(id);
  for (std::size_t k = 0; k < snrs.size(); ++k) {
    const Measurement m = add_noise_at_snr(fsol.top_field, snrs[k], scfg.noise.seed);
    ExperimentConfig c = scfg;
    const Inversion inv = invert(c, m, &*profile, nullptr);
    const int N = inv.choice.N;
    write_pseudocolor(path_in(sdir, "recon_snr" + std::to_string(k) + "_N" + two_digits(N) + ".ppm"),
                      reconstruct(inv.rc, N, c.disc.I, c.disc.I));
    sw.cell(snrs[k]).cell(m.snr).cell(N).cell(inv.choice.satisfied ? 1 : 0).cell(inv.rel_error[N]);
    sw.end_row();
    jsweep.push_back({{"target_snr", snrs[k]}, {"chosen_N", N}, {"relative_error", inv.rel_error[N]}});
  }

  json j;
  j["command"] = "experiment";
  j["id"] = id;
  j["rows"] = jrows;
  j["snr_sweep"] = jsweep;
  if (id == 2) {
    ExperimentConfig c = cfgs[1];
    c.output = path_in(root, "sweep_sn");
    const cplx m1{-1.0, 0.0};
    j["sweep_sn"] = json::parse(cmd_sweep_sn(
        c, {{m1, m1}, {cplx{-1.0, 0.001}, cplx{-1.0, 0.001}}, {cplx{-1.0, 0.01}, cplx{-1.0, 0.01}}, {1.0, 1.0}}));
  }
  const std::string out = j.dump(2) + "\n";
  write_text_file(path_in(root, "summary.json"), out);
  return out;
}

std::string cmd_noise_stats(const NoiseSpec& spec, int I, int trials, const std::string& output) {
  ensure_dir(output);
  const auto stats = noise_dft_stats(spec, I, trials);
  const double expected = spec.sigma / I;
  CsvWriter w(path_in(output, "noise_stats.csv"), {"n1", "n2", "std_re", "std_im", "cov", "ratio_re", "ratio_im"});
  double worst = 0.0, sum_ratio = 0.0, worst_cov_z = 0.0;
  int outside = 0;
  for (const auto& s : stats) {
    const double rr = expected > 0 ? s.std_re / expected : 0.0, ri = expected > 0 ? s.std_im / expected : 0.0;
    w.cell(s.n.n1).cell(s.n.n2).cell(s.std_re).cell(s.std_im).cell(s.cov).cell(rr).cell(ri);
    w.end_row();
    if (expected > 0) {
      worst = std::max({worst, std::abs(rr - 1.0), std::abs(ri - 1.0)});
      outside += (std::abs(rr - 1.0) > 0.1) + (std::abs(ri - 1.0) > 0.1);
      sum_ratio += rr + ri;
      const double se = s.std_re * s.std_im / std::sqrt(static_cast<double>(trials));
      if (se > 0) worst_cov_z = std::max(worst_cov_z, std::abs(s.cov) / se);
    }
  }
  json j;
  j["command"] = "noise-stats";
  j["sigma"] = spec.sigma;
  j["seed"] = spec.seed;
  j["I"] = I;
  j["trials"] = trials;
  j["expected_std"] = expected;
  j["modes"] = stats.size();
  j["max_relative_deviation"] = worst;
  j["stds_outside_10_percent"] = outside;
  j["mean_std_ratio"] = stats.empty() ? 0.0 : sum_ratio / (2.0 * stats.size());
  j["max_cov_z"] = worst_cov_z;
  const std::string out = j.dump(2) + "\n";
  write_text_file(path_in(output, "noise_stats.json"), out);
  return out;
}

}  // namespace superlens
