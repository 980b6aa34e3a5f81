#pragma once

// Command implementations behind the CLI: single-state analysis, the three
// figure-reproduction sweeps/grids, and the simulated-experiment pipelines.
// Each run_* writes its files under out_dir and also returns the data so the
// test suites can drive the same code paths directly.

#include <string>
#include <vector>

#include "cvpol/config.hpp"
#include "cvpol/report.hpp"

namespace cvpol {

struct AnalysisOutcome {
  PolarisationReport<double> report;
  int dim = 0;
  int n_max = 0;
};

// Analytic polarisation report of the configured state (used by the
// `polarisation` command and as the point estimate inside `tomo`).
AnalysisOutcome analyse_state(const RunConfig& cfg);

AnalysisOutcome run_polarisation(const RunConfig& cfg, const std::string& out_dir);

struct Fig1Row {
  double mean_photons = 0;
  double p1_coherent = 0;
  double p1_squeezed = 0;
  double p1sc = 0;
};
std::vector<Fig1Row> fig1_rows(const RunConfig& cfg);
void run_sweep_fig1(const RunConfig& cfg, const std::string& out_dir);

struct Fig2Row {
  double param1 = 0;
  double param2 = 0;
  double p1 = 0;
  double p1sc = 0;
};
// family: 0 = squeezed (x) squeezed, 1 = coherent (x) squeezed,
// 2 = displaced-squeezed (x) displaced-squeezed (r_H = 0.2, r_V = 0.6).
std::vector<Fig2Row> fig2_rows(const RunConfig& cfg, int family);
void run_grid_fig2(const RunConfig& cfg, const std::string& out_dir);

struct Fig4Row {
  double alpha = 0;
  double n_v = 0;
  double p1 = 0;
  double p1sc = 0;
  double p1_err = 0;
  double p1sc_err = 0;
};
struct Fig4Data {
  std::vector<Fig4Row> rows;
  PolarisationReport<double> inset;
  double inset_alpha = 0;
};
Fig4Data fig4_data(const RunConfig& cfg);
void run_sweep_fig4(const RunConfig& cfg, const std::string& out_dir);

struct TomoOutcome {
  PolarisationReport<double> report;  // point estimate with bootstrap errors
  int dim = 0;
  int n_max = 0;
};
TomoOutcome run_tomo(const RunConfig& cfg, const std::string& out_dir);

}  // namespace cvpol
