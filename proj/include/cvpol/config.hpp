#pragma once

// Run configuration for the CLI: one JSON document describing the state, the
// truncated space, the analysis kind and the per-command knobs.  Parsing and
// validation throw config_error (CLI exit code 2).

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cvpol/states.hpp"
#include "cvpol/tomography.hpp"

namespace cvpol {

struct SpecSource {
  StateSpec<double> mode_h;
  StateSpec<double> mode_v;
};

struct XiSource {
  double phi = 0;
};

struct FockSource {
  std::vector<FockTerm<double>> terms;
};

using StateSource = std::variant<SpecSource, XiSource, FockSource>;

enum class AnalysisKind { analytic, homodyne, pnrd };

struct SweepConfig {
  std::string parameter;
  double start = 0;
  double stop = 0;
  int steps = 2;
};

struct Fig1Config {
  double max_mean_photons = 4.0;
  int steps = 41;
  int dim = 128;
};

struct Fig2Config {
  double r_max = 1.5;
  double alpha_max = 2.0;
  int steps = 41;
  int dim = 80;
};

struct Fig4Config {
  std::optional<StateSpec<double>> mode_h;  // default: 3.2 dB / 7.4 dB squeezed-thermal
  double alpha_start = 0.25;
  double alpha_stop = 4.0;
  int steps = 76;
  std::optional<double> inset_alpha;  // default: the photon-balance point sqrt(<n_H>)
  int bootstrap = 100;
  bool error_bars = true;
};

struct HomodyneConfig {
  long long samples = 100000;
  int bootstrap = 200;
  bool resample_data = false;
};

struct PnrdConfig {
  long long shots = 100000;
  int bootstrap = 200;
};

struct OutputNames {
  std::string report = "report.json";
  std::string manifolds = "manifolds.csv";
  std::string fig1 = "fig1.csv";
  std::string fig2_prefix = "fig2";
  std::string fig4 = "fig4.csv";
  std::string fig4_inset = "fig4_inset.csv";
  std::string dataset;  // homodyne samples; empty: do not persist
  std::string counts;   // PNRD counts; empty: do not persist
};

struct RunConfig {
  StateSource state;
  std::optional<int> dim;    // per-mode cutoff; command-specific default
  std::optional<int> n_max;  // manifold cap; default 50
  AnalysisKind analysis = AnalysisKind::analytic;
  CalibrationModel calibration;
  HomodyneConfig homodyne;
  PnrdConfig pnrd;
  std::optional<SweepConfig> sweep;
  Fig1Config fig1;
  Fig2Config fig2;
  Fig4Config fig4;
  OutputNames out;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
};

// Parse + validate a configuration document (JSON text / file on disk).
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Resolved H-mode spec of the Fig. 4 family.
StateSpec<double> fig4_mode_h(const RunConfig& cfg);

}  // namespace cvpol
