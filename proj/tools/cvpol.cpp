// Batch front-end: builds states from a JSON config, runs polarisation
// analyses, figure sweeps/grids and simulated-experiment pipelines, and
// writes CSV/JSON outputs.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-contract
// violation.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cvpol/config.hpp"
#include "cvpol/pipeline.hpp"
#include "cvpol/types.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;
  int threads = -1;
  int dim = 0;
  int n_max = 0;
};

void add_common(CLI::App* cmd, GlobalArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (default: current)");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "worker threads (0: hardware)");
  cmd->add_option("--dim", args.dim, "override the per-mode Fock cutoff");
  cmd->add_option("--nmax", args.n_max, "override the manifold cap");
}

cvpol::RunConfig load_with_overrides(const GlobalArgs& args) {
  cvpol::RunConfig cfg = cvpol::load_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.threads >= 0) cfg.threads = args.threads;
  if (args.dim > 0) {
    if (args.dim < 2) throw cvpol::config_error("--dim must be >= 2");
    cfg.dim = args.dim;
  }
  if (args.n_max > 0) cfg.n_max = args.n_max;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cvpol: polarisation degrees of two-mode bosonic states"};
  app.require_subcommand(1);

  GlobalArgs args;
  CLI::App* polarisation =
      app.add_subcommand("polarisation", "analyse a single state (report + manifold table)");
  CLI::App* fig1 = app.add_subcommand("sweep-fig1", "P1 vs mean photon number, coherent and "
                                                    "squeezed families");
  CLI::App* fig2 = app.add_subcommand("grid-fig2", "P1/P1sc surfaces for three two-mode families");
  CLI::App* fig4 = app.add_subcommand("sweep-fig4", "squeezed (x) displaced sweep with error bars "
                                                    "and manifold inset");
  CLI::App* tomo = app.add_subcommand("tomo", "simulated homodyne or PNRD pipeline");
  for (CLI::App* cmd : {polarisation, fig1, fig2, fig4, tomo}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    const cvpol::RunConfig cfg = load_with_overrides(args);
    if (polarisation->parsed()) {
      const auto outcome = cvpol::run_polarisation(cfg, args.out_dir);
      std::printf("p1 = %.12g  p1sc = %.12g  tail <= %.3g\n", outcome.report.p1,
                  outcome.report.p1sc, outcome.report.tail_bound);
    } else if (fig1->parsed()) {
      cvpol::run_sweep_fig1(cfg, args.out_dir);
    } else if (fig2->parsed()) {
      cvpol::run_grid_fig2(cfg, args.out_dir);
    } else if (fig4->parsed()) {
      cvpol::run_sweep_fig4(cfg, args.out_dir);
    } else if (tomo->parsed()) {
      const auto outcome = cvpol::run_tomo(cfg, args.out_dir);
      std::printf("p1 = %.12g +- %.3g  p1sc = %.12g +- %.3g\n", outcome.report.p1,
                  outcome.report.p1_err.value_or(0.0), outcome.report.p1sc,
                  outcome.report.p1sc_err.value_or(0.0));
    }
  } catch (const cvpol::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const cvpol::numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
