#include "cvpol/pipeline.hpp"

#include <cmath>
#include <filesystem>

#include "cvpol/gaussian.hpp"
#include "cvpol/io.hpp"
#include "cvpol/parallel.hpp"

namespace cvpol {

namespace {

int resolved_threads(const RunConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : default_thread_count();
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int max_occupation(const FockSource& src) {
  int top = 0;
  for (const auto& t : src.terms) top = std::max({top, t.m, t.n});
  return top;
}

// Default cutoff: 64 for Gaussian specs, smallest-plus-guard for explicit
// Fock states (passive transformations never leave their manifolds).
int resolve_dim(const RunConfig& cfg) {
  if (cfg.dim) return *cfg.dim;
  if (std::holds_alternative<SpecSource>(cfg.state)) return 64;
  if (std::holds_alternative<XiSource>(cfg.state)) return 9;
  return max_occupation(std::get<FockSource>(cfg.state)) + 1 + kTruncationGuardLevels;
}

DensityMatrix<double> build_full_state(const RunConfig& cfg, int dim) {
  const FockSpace space = FockSpace::two(dim);
  if (const auto* specs = std::get_if<SpecSource>(&cfg.state))
    return product_from_specs(specs->mode_h, specs->mode_v, dim).materialise();
  if (const auto* xi = std::get_if<XiSource>(&cfg.state)) return xi_state(xi->phi, space);
  return fock_superposition(std::get<FockSource>(cfg.state).terms, space);
}

struct PointDegrees {
  double p1 = 0;
  double p1sc = 0;
};

PointDegrees degrees_of_product(const StateSpec<double>& spec_h, const StateSpec<double>& spec_v,
                                int dim, int n_max) {
  const TwoModeProduct<double> prod = product_from_specs(spec_h, spec_v, dim);
  const ManifoldDecomposition<double> dec = decompose(prod, n_max);
  return PointDegrees{degree_p1(dec).value, degree_p1sc(dec)};
}

}  // namespace

AnalysisOutcome analyse_state(const RunConfig& cfg) {
  const int dim = resolve_dim(cfg);
  const int n_max = std::min(cfg.n_max.value_or(50), 2 * (dim - 1));
  ManifoldDecomposition<double> dec;
  if (const auto* specs = std::get_if<SpecSource>(&cfg.state)) {
    const TwoModeProduct<double> prod = product_from_specs(specs->mode_h, specs->mode_v, dim);
    dec = decompose(prod, n_max);
  } else {
    dec = decompose(build_full_state(cfg, dim), n_max);
  }
  return AnalysisOutcome{build_report(dec), dim, n_max};
}

AnalysisOutcome run_polarisation(const RunConfig& cfg, const std::string& out_dir) {
  const AnalysisOutcome outcome = analyse_state(cfg);
  io::ReportMeta meta{outcome.dim, outcome.n_max, cfg.seed, "analytic"};
  io::write_text_file(join(out_dir, cfg.out.report), io::report_json(outcome.report, meta));
  io::write_text_file(join(out_dir, cfg.out.manifolds), io::manifolds_csv(outcome.report));
  return outcome;
}

std::vector<Fig1Row> fig1_rows(const RunConfig& cfg) {
  const int dim = cfg.dim.value_or(cfg.fig1.dim);
  const int n_max = std::min(cfg.n_max.value_or(dim - 1), 2 * (dim - 1));
  const int steps = cfg.fig1.steps;
  std::vector<Fig1Row> rows(steps);
  parallel_for(steps, resolved_threads(cfg), [&](int i) {
    const double mean_photons =
        cfg.fig1.max_mean_photons * static_cast<double>(i) / static_cast<double>(steps - 1);
    Fig1Row row;
    row.mean_photons = mean_photons;

    StateSpec<double> coherent;
    coherent.alpha = cxd(std::sqrt(mean_photons), 0);
    StateSpec<double> vac;
    const TwoModeProduct<double> prod_c = product_from_specs(coherent, vac, dim);
    const ManifoldDecomposition<double> dec_c = decompose(prod_c, n_max);
    row.p1_coherent = degree_p1(dec_c).value;
    row.p1sc = degree_p1sc(dec_c);

    StateSpec<double> squeezed;
    squeezed.r = std::asinh(std::sqrt(mean_photons));
    row.p1_squeezed = degrees_of_product(squeezed, vac, dim, n_max).p1;
    rows[i] = row;
  });
  return rows;
}

void run_sweep_fig1(const RunConfig& cfg, const std::string& out_dir) {
  const std::vector<Fig1Row> rows = fig1_rows(cfg);
  std::vector<std::vector<double>> table;
  table.reserve(rows.size());
  for (const auto& r : rows)
    table.push_back({r.mean_photons, r.p1_coherent, r.p1_squeezed, r.p1sc});
  io::write_text_file(join(out_dir, cfg.out.fig1),
                      io::render_csv({"mean_photons", "p1_coherent", "p1_squeezed", "p1sc"}, table));
}

std::vector<Fig2Row> fig2_rows(const RunConfig& cfg, int family) {
  if (family < 0 || family > 2) throw std::invalid_argument("fig2_rows: family must be 0, 1 or 2");
  const int dim = cfg.dim.value_or(cfg.fig2.dim);
  const int n_max = std::min(cfg.n_max.value_or(dim - 2), 2 * (dim - 1));
  const int steps = cfg.fig2.steps;
  const double a_max = family == 0 ? cfg.fig2.r_max : cfg.fig2.alpha_max;
  const double b_max = family == 2 ? cfg.fig2.alpha_max : cfg.fig2.r_max;

  std::vector<Fig2Row> rows(static_cast<std::size_t>(steps) * steps);
  parallel_for(steps * steps, resolved_threads(cfg), [&](int k) {
    const int i = k / steps, j = k % steps;
    const double a = a_max * static_cast<double>(i) / static_cast<double>(steps - 1);
    const double b = b_max * static_cast<double>(j) / static_cast<double>(steps - 1);
    StateSpec<double> spec_h, spec_v;
    switch (family) {
      case 0:
        spec_h.r = a;
        spec_v.r = b;
        break;
      case 1:
        spec_h.alpha = cxd(a, 0);
        spec_v.r = b;
        break;
      default:
        spec_h.alpha = cxd(a, 0);
        spec_h.r = 0.2;
        spec_v.alpha = cxd(b, 0);
        spec_v.r = 0.6;
        break;
    }
    const PointDegrees deg = degrees_of_product(spec_h, spec_v, dim, n_max);
    rows[k] = Fig2Row{a, b, deg.p1, deg.p1sc};
  });
  return rows;
}

void run_grid_fig2(const RunConfig& cfg, const std::string& out_dir) {
  const char* suffix[3] = {"a", "b", "c"};
  for (int family = 0; family < 3; ++family) {
    const std::vector<Fig2Row> rows = fig2_rows(cfg, family);
    std::vector<std::vector<double>> table;
    table.reserve(rows.size());
    for (const auto& r : rows) table.push_back({r.param1, r.param2, r.p1, r.p1sc});
    io::write_text_file(join(out_dir, cfg.out.fig2_prefix + suffix[family] + ".csv"),
                        io::render_csv({"param1", "param2", "p1", "p1sc"}, table));
  }
}

Fig4Data fig4_data(const RunConfig& cfg) {
  const StateSpec<double> mode_h = fig4_mode_h(cfg);
  const int dim = cfg.dim.value_or(64);
  const int n_max = std::min(cfg.n_max.value_or(50), 2 * (dim - 1));
  const int steps = cfg.fig4.steps;

  Fig4Data data;
  data.rows.resize(steps);
  parallel_for(steps, resolved_threads(cfg), [&](int i) {
    const double alpha =
        cfg.fig4.alpha_start + (cfg.fig4.alpha_stop - cfg.fig4.alpha_start) *
                                   static_cast<double>(i) / static_cast<double>(steps - 1);
    StateSpec<double> mode_v;
    mode_v.alpha = cxd(alpha, 0);
    Fig4Row row;
    row.alpha = alpha;
    row.n_v = alpha * alpha;
    const PointDegrees deg = degrees_of_product(mode_h, mode_v, dim, n_max);
    row.p1 = deg.p1;
    row.p1sc = deg.p1sc;
    if (cfg.fig4.error_bars) {
      const GaussianState<double> g = spec_to_gaussian(mode_h, mode_v);
      BootstrapOptions opts;
      opts.dim = dim;
      opts.n_max = n_max;
      opts.threads = 1;  // points are already dispatched to the pool
      const BootstrapResult boot =
          bootstrap_polarisation(g, cfg.calibration, cfg.fig4.bootstrap, cfg.seed + 1000 + i, opts);
      row.p1_err = boot.p1_std;
      row.p1sc_err = boot.p1sc_std;
    }
    data.rows[i] = row;
  });

  // Inset: per-manifold contributions at the designated displacement; the
  // default is the photon-balance point where <S3> vanishes.
  data.inset_alpha =
      cfg.fig4.inset_alpha.value_or(std::sqrt(spec_photon_moments(mode_h).mean));
  StateSpec<double> mode_v;
  mode_v.alpha = cxd(data.inset_alpha, 0);
  const TwoModeProduct<double> prod = product_from_specs(mode_h, mode_v, dim);
  data.inset = build_report(decompose(prod, n_max));
  return data;
}

void run_sweep_fig4(const RunConfig& cfg, const std::string& out_dir) {
  const Fig4Data data = fig4_data(cfg);
  std::vector<std::vector<double>> table;
  table.reserve(data.rows.size());
  for (const auto& r : data.rows)
    table.push_back({r.alpha, r.n_v, r.p1, r.p1sc, r.p1_err, r.p1sc_err});
  io::write_text_file(
      join(out_dir, cfg.out.fig4),
      io::render_csv({"alpha", "n_v", "p1", "p1sc", "p1_err", "p1sc_err"}, table));
  io::write_text_file(join(out_dir, cfg.out.fig4_inset), io::manifolds_csv(data.inset));
}

namespace {

TomoOutcome run_tomo_homodyne(const RunConfig& cfg, const std::string& out_dir) {
  const auto& specs = std::get<SpecSource>(cfg.state);
  const GaussianState<double> g = spec_to_gaussian(specs.mode_h, specs.mode_v);
  const QuadratureDataset ds =
      sample_homodyne(g, cfg.homodyne.samples, cfg.seed ^ 0x746f6d6fULL);
  const GaussianState<double> g_est = estimate_covariance(ds, cfg.calibration);

  const int dim = cfg.dim.value_or(auto_dim(g_est) + 2);
  const int n_max = std::min(cfg.n_max.value_or(50), dim - 2);
  const RepairPolicy<double> policy{0.05};

  ManifoldDecomposition<double> dec;
  if (is_block_diagonal(g_est.cov, 1e-12)) {
    dec = decompose(gaussian_to_fock_product(g_est, dim, policy), n_max);
  } else {
    dec = decompose(gaussian_to_fock(g_est, FockSpace::two(dim), policy), n_max);
  }

  BootstrapOptions opts;
  opts.dim = dim;
  opts.n_max = n_max;
  opts.resample_data = cfg.homodyne.resample_data;
  opts.threads = resolved_threads(cfg);
  const BootstrapResult boot = bootstrap_polarisation(g_est, cfg.calibration,
                                                      cfg.homodyne.bootstrap, cfg.seed, opts, &ds);

  TomoOutcome outcome;
  outcome.report = build_report(dec);
  outcome.report.p1_err = boot.p1_std;
  outcome.report.p1sc_err = boot.p1sc_std;
  outcome.dim = dim;
  outcome.n_max = n_max;
  if (!cfg.out.dataset.empty())
    io::save_dataset(join(out_dir, cfg.out.dataset), ds, cfg.calibration);
  return outcome;
}

TomoOutcome run_tomo_pnrd(const RunConfig& cfg, const std::string& out_dir) {
  int dim;
  if (cfg.dim) {
    dim = *cfg.dim;
  } else if (const auto* specs = std::get_if<SpecSource>(&cfg.state)) {
    dim = auto_dim(spec_to_gaussian(specs->mode_h, specs->mode_v)) + 2;
  } else {
    dim = resolve_dim(cfg);
  }
  const DensityMatrix<double> rho = build_full_state(cfg, dim);

  std::array<CountRecord, 3> records = {
      sample_pnrd(rho, PnrdBasis::intensity, cfg.pnrd.shots, cfg.seed),
      sample_pnrd(rho, PnrdBasis::diagonal, cfg.pnrd.shots, cfg.seed),
      sample_pnrd(rho, PnrdBasis::circular, cfg.pnrd.shots, cfg.seed)};
  const CountsEstimate est = estimate_p1_from_counts(records);
  const BootstrapResult boot =
      bootstrap_counts(records, cfg.pnrd.bootstrap, cfg.seed, resolved_threads(cfg));

  TomoOutcome outcome;
  outcome.report = build_report(est.dec, est.skipped_mass);
  outcome.report.p1_err = boot.p1_std;
  outcome.report.p1sc_err = boot.p1sc_std;
  outcome.dim = dim;
  outcome.n_max = est.dec.n_max;
  if (!cfg.out.counts.empty()) io::save_counts(join(out_dir, cfg.out.counts), records);
  return outcome;
}

}  // namespace

TomoOutcome run_tomo(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.analysis == AnalysisKind::analytic)
    throw config_error("tomo requires analysis = homodyne or pnrd");
  const TomoOutcome outcome = cfg.analysis == AnalysisKind::homodyne
                                  ? run_tomo_homodyne(cfg, out_dir)
                                  : run_tomo_pnrd(cfg, out_dir);
  io::ReportMeta meta{outcome.dim, outcome.n_max, cfg.seed,
                      cfg.analysis == AnalysisKind::homodyne ? "homodyne" : "pnrd"};
  io::write_text_file(join(out_dir, cfg.out.report), io::report_json(outcome.report, meta));
  io::write_text_file(join(out_dir, cfg.out.manifolds), io::manifolds_csv(outcome.report));
  return outcome;
}

}  // namespace cvpol
