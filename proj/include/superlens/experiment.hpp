#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "superlens/core.hpp"
#include "superlens/forward.hpp"
#include "superlens/inverse.hpp"
#include "superlens/measurement.hpp"
#include "superlens/profile.hpp"

namespace superlens {

/// Every tunable of a run. Built from flat key = value pairs; each key defaults to the
/// first row of the first experiment table (profile 1, sigma = 0.005).
struct ExperimentConfig {
  PhysicalConfig phys;
  std::string profile = "profile1";  // profile1 | profile2 | image | flat | none
  std::string image;                 // PGM path; empty selects the built-in glyph
  double threshold = 0.5;
  Discretization disc;
  NoiseSpec noise;
  double target_snr = 0.0;  // > 0: rescale the noise to this SNR instead of using sigma
  double noise_norm = 0.0;  // > 0: external noise-level estimate for the discrepancy principle
  double c = 1.0;
  int N_window = 12;
  std::string output = "out";

  /// Keys that were not supplied and took their default.
  std::vector<std::string> defaulted;

  /// Throws InvalidConfig on unknown keys or unparsable values.
  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
  /// Resolved configuration, every key present.
  [[nodiscard]] std::map<std::string, std::string> to_map() const;
  void validate() const;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};
[[nodiscard]] const std::vector<ConfigKey>& config_keys();

/// Profile selected by the config (profile = none yields nullopt).
[[nodiscard]] std::optional<SurfaceProfile> build_profile(const ExperimentConfig& cfg);

/// Coefficients of g over norm_inf(n) <= W from a quadrature grid fine enough for W.
[[nodiscard]] ModeArray truth_spectrum(const SurfaceProfile& p, int W);

/// Noisy data from a clean top field according to target_snr / sigma.
[[nodiscard]] Measurement measure(const ExperimentConfig& cfg, const GridField& clean);

struct Inversion {
  SpectrumField U;
  ReconCoefficients rc;
  ResidualCurve curve;
  double noise_norm = 0.0;
  CutoffChoice choice;
  std::vector<double> rel_error;  // N = 0..N_window, empty without a truth profile
  std::optional<ErrorDecomposition> decomposition;
};

/// Discrepancy-principle inversion of a measurement. `truth` enables the error curves;
/// `clean_top` (noiseless coefficients) additionally enables the decomposition at the chosen N.
[[nodiscard]] Inversion invert(const ExperimentConfig& cfg, const Measurement& meas, const SurfaceProfile* truth,
                               const ModeArray* clean_top);

/// ε g sampled on the I x I grid.
[[nodiscard]] GridField truth_grid(const SurfaceProfile& p, const PhysicalConfig& phys, int I);

struct PipelineResult {
  ForwardSolution forward;
  Measurement meas;
  Inversion inv;
};

/// forward -> noise -> inversion. A cached forward solution for the same geometry may be passed in.
[[nodiscard]] PipelineResult run_pipeline(const ExperimentConfig& cfg, const ForwardSolution* cached = nullptr);

/// Parameter overrides of each table row of experiment `id` (1, 2 or 3).
[[nodiscard]] std::vector<std::map<std::string, std::string>> experiment_rows(int id);
/// SNR values swept for the robustness figure of experiment `id`.
[[nodiscard]] std::vector<double> experiment_snr_sweep(int id);
/// SNR printed in the table for each row.
[[nodiscard]] std::vector<double> experiment_reference_snr(int id);

// Commands. Each writes into cfg.output and returns its JSON summary as text.
std::string cmd_forward(const ExperimentConfig& cfg);
std::string cmd_invert(const ExperimentConfig& cfg, const std::string& data_file);
std::string cmd_sweep_sn(const ExperimentConfig& cfg, const std::vector<std::pair<cplx, cplx>>& media);
std::string cmd_experiment(int id, const std::map<std::string, std::string>& overrides);
std::string cmd_noise_stats(const NoiseSpec& spec, int I, int trials, const std::string& output);

/// Quiet by default; set to print progress lines to stderr.
void set_verbose(bool on);

}  // namespace superlens
