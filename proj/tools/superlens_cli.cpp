// Command-line front end: forward, invert, sweep-sn, experiment, noise-stats.
//
// Exit codes: 0 success, 1 usage, 2 invariant violation, 3 numerical failure.

#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "superlens/errors.hpp"
#include "superlens/experiment.hpp"
#include "superlens/io.hpp"

using namespace superlens;

namespace {

std::string keys_help() {
  std::ostringstream os;
  os << "Config keys (key = value, '#' comments):\n";
  for (const auto& k : config_keys())
    os << "  " << k.name << " [" << (k.default_value.empty() ? "\"\"" : k.default_value) << "]  " << k.help << "\n";
  return os.str();
}

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  bool fast = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_file, "key = value config file");
  sub->add_option("-s,--set", c.sets, "override one key (key=value), repeatable");
  sub->add_flag("--fast", c.fast, "reduced resolution: I = 33, N_f = 8, M = 32");
}

std::map<std::string, std::string> gather(const Common& c) {
  std::map<std::string, std::string> kv;
  if (!c.config_file.empty()) kv = read_key_value_file(c.config_file);
  if (c.fast) {
    for (const auto& [k, v] : std::map<std::string, std::string>{{"I", "33"}, {"N_f", "8"}, {"M", "32"}})
      kv.try_emplace(k, v);
  }
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return kv;
}

std::vector<std::pair<cplx, cplx>> parse_media(const std::string& text) {
  // "rho_re,rho_im,kappa_re,kappa_im;..."
  std::vector<std::pair<cplx, cplx>> out;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.empty()) continue;
    std::replace(item.begin(), item.end(), ',', ' ');
    std::istringstream is(item);
    double a, b, c, d;
    if (!(is >> a >> b >> c >> d)) throw CLI::ValidationError("--media", "expected rho_re,rho_im,kappa_re,kappa_im");
    out.push_back({{a, b}, {c, d}});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field grating reconstruction through a negative-index slab"};
  app.footer(keys_help());
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress messages on stderr");

  Common fwd, inv, sweep, exp;
  auto* c_fwd = app.add_subcommand("forward", "solve the forward problem and write the (noisy) top-plane data");
  add_common(c_fwd, fwd);

  auto* c_inv = app.add_subcommand("invert", "reconstruct from a measurement CSV");
  add_common(c_inv, inv);
  std::string data_file;
  c_inv->add_option("-d,--data", data_file, "measurement CSV written by 'forward'")->required();

  auto* c_sweep = app.add_subcommand("sweep-sn", "tabulate |s_n| for several slab media");
  add_common(c_sweep, sweep);
  std::string media = "-1,0,-1,0;-1,0.001,-1,0.001;-1,0.01,-1,0.01;1,0,1,0";
  c_sweep->add_option("--media", media, "semicolon-separated rho_re,rho_im,kappa_re,kappa_im")->capture_default_str();

  auto* c_exp = app.add_subcommand("experiment", "run a full experiment (forward, noise, inversion, sweeps)");
  add_common(c_exp, exp);
  int exp_id = 1;
  c_exp->add_option("--id", exp_id, "experiment 1, 2 or 3")->check(CLI::Range(1, 3))->capture_default_str();

  auto* c_noise = app.add_subcommand("noise-stats", "empirical DFT statistics of white noise");
  double sigma = 0.01;
  int grid = 99, trials = 500;
  long long seed = 1;
  std::string noise_out = "out/noise_stats";
  c_noise->add_option("--sigma", sigma, "noise standard deviation")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_noise->add_option("--I", grid, "grid size")->check(CLI::PositiveNumber)->capture_default_str();
  c_noise->add_option("--trials", trials, "number of noise grids (>= 100)")->capture_default_str();
  c_noise->add_option("--seed", seed, "base seed; trial t uses seed + t")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_noise->add_option("-o,--output", noise_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  set_verbose(verbose);

  try {
    std::string summary;
    if (c_fwd->parsed()) {
      summary = cmd_forward(ExperimentConfig::from_map(gather(fwd)));
    } else if (c_inv->parsed()) {
      summary = cmd_invert(ExperimentConfig::from_map(gather(inv)), data_file);
    } else if (c_sweep->parsed()) {
      summary = cmd_sweep_sn(ExperimentConfig::from_map(gather(sweep)), parse_media(media));
    } else if (c_exp->parsed()) {
      summary = cmd_experiment(exp_id, gather(exp));
    } else if (c_noise->parsed()) {
      summary = cmd_noise_stats({sigma, static_cast<std::uint64_t>(seed)}, grid, trials, noise_out);
    }
    std::cout << summary;
    return 0;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
