#include "cvpol/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "cvpol/gaussian.hpp"
#include "cvpol/io.hpp"

namespace cvpol {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw config_error("config: " + msg); }

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

double get_num(const json& j, const std::string& where, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

long long get_int(const json& j, const std::string& where, const std::string& key,
                  long long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(where + "." + key + " must be an integer");
  return j.at(key).get<long long>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(where + "." + key + " must be a boolean");
  return j.at(key).get<bool>();
}

StateSpec<double> parse_mode_spec(const json& j, const std::string& where) {
  require_keys(j, where,
               {"alpha_re", "alpha_im", "r", "theta", "n_th", "sqz_db", "antisqz_db"});
  const bool has_db = j.contains("sqz_db") || j.contains("antisqz_db");
  const bool has_rn = j.contains("r") || j.contains("n_th");
  if (has_db && has_rn) fail(where + ": give either r/n_th or sqz_db/antisqz_db, not both");
  StateSpec<double> spec;
  spec.alpha = cxd(get_num(j, where, "alpha_re", 0.0), get_num(j, where, "alpha_im", 0.0));
  spec.theta = get_num(j, where, "theta", 0.0);
  if (has_db) {
    if (!j.contains("sqz_db") || !j.contains("antisqz_db"))
      fail(where + ": sqz_db and antisqz_db must be given together");
    try {
      const StateSpec<double> db =
          db_to_spec(get_num(j, where, "sqz_db", 0.0), get_num(j, where, "antisqz_db", 0.0),
                     spec.theta);
      spec.r = db.r;
      spec.n_th = db.n_th;
    } catch (const physicality_error& e) {
      fail(where + ": " + e.what());
    }
  } else {
    spec.r = get_num(j, where, "r", 0.0);
    spec.n_th = get_num(j, where, "n_th", 0.0);
  }
  try {
    validate_spec(spec);
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
  return spec;
}

StateSource parse_state(const json& j) {
  if (!j.is_object()) fail("state must be an object");
  int sources = 0;
  for (const char* key : {"modes", "xi", "fock"}) sources += j.contains(key) ? 1 : 0;
  if (sources != 1) fail("state must have exactly one of: modes, xi, fock");
  require_keys(j, "state", {"modes", "xi", "fock"});

  if (j.contains("modes")) {
    const json& m = j.at("modes");
    require_keys(m, "state.modes", {"h", "v"});
    if (!m.contains("h") || !m.contains("v")) fail("state.modes needs both 'h' and 'v'");
    return SpecSource{parse_mode_spec(m.at("h"), "state.modes.h"),
                      parse_mode_spec(m.at("v"), "state.modes.v")};
  }
  if (j.contains("xi")) {
    require_keys(j.at("xi"), "state.xi", {"phi"});
    XiSource xi;
    xi.phi = get_num(j.at("xi"), "state.xi", "phi", 0.0);
    if (!std::isfinite(xi.phi)) fail("state.xi.phi must be finite");
    return xi;
  }
  const json& f = j.at("fock");
  if (!f.is_array() || f.empty()) fail("state.fock must be a non-empty array of terms");
  FockSource src;
  for (const auto& t : f) {
    require_keys(t, "state.fock[]", {"m", "n", "re", "im"});
    FockTerm<double> term;
    term.m = static_cast<int>(get_int(t, "state.fock[]", "m", -1));
    term.n = static_cast<int>(get_int(t, "state.fock[]", "n", -1));
    term.amplitude = cxd(get_num(t, "state.fock[]", "re", 0.0), get_num(t, "state.fock[]", "im", 0.0));
    if (term.m < 0 || term.n < 0) fail("state.fock[]: m and n must be non-negative integers");
    src.terms.push_back(term);
  }
  return src;
}

const std::set<std::string> kSweepParams = {"alpha_h", "alpha_v", "r_h",    "r_v",
                                            "theta_h", "theta_v", "n_th_h", "n_th_v"};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  require_keys(j, "top level",
               {"state", "space", "analysis", "calibration", "homodyne", "pnrd", "sweep", "fig1",
                "fig2", "fig4", "out", "seed", "threads"});
  if (!j.contains("state")) fail("missing 'state'");

  RunConfig cfg;
  cfg.state = parse_state(j.at("state"));

  if (j.contains("space")) {
    const json& s = j.at("space");
    require_keys(s, "space", {"dim", "n_max"});
    if (s.contains("dim")) {
      const int dim = static_cast<int>(get_int(s, "space", "dim", 0));
      if (dim < 2) fail("space.dim must be >= 2");
      cfg.dim = dim;
    }
    if (s.contains("n_max")) {
      const int n_max = static_cast<int>(get_int(s, "space", "n_max", 0));
      if (n_max < 1) fail("space.n_max must be >= 1");
      cfg.n_max = n_max;
    }
  }

  if (j.contains("analysis")) {
    const std::string a = j.at("analysis").is_string() ? j.at("analysis").get<std::string>() : "";
    if (a == "analytic")
      cfg.analysis = AnalysisKind::analytic;
    else if (a == "homodyne")
      cfg.analysis = AnalysisKind::homodyne;
    else if (a == "pnrd")
      cfg.analysis = AnalysisKind::pnrd;
    else
      fail("analysis must be one of: analytic, homodyne, pnrd");
  }
  if (cfg.analysis == AnalysisKind::homodyne && !std::holds_alternative<SpecSource>(cfg.state))
    fail("homodyne analysis needs a Gaussian state (state.modes)");

  if (j.contains("calibration")) {
    const json& c = j.at("calibration");
    require_keys(c, "calibration", {"shot_noise_rel_uncertainty"});
    cfg.calibration.shot_noise_rel_uncertainty =
        get_num(c, "calibration", "shot_noise_rel_uncertainty", 0.01);
    try {
      validate_calibration(cfg.calibration);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  if (j.contains("homodyne")) {
    const json& h = j.at("homodyne");
    require_keys(h, "homodyne", {"samples", "bootstrap", "resample_data"});
    cfg.homodyne.samples = get_int(h, "homodyne", "samples", cfg.homodyne.samples);
    cfg.homodyne.bootstrap =
        static_cast<int>(get_int(h, "homodyne", "bootstrap", cfg.homodyne.bootstrap));
    cfg.homodyne.resample_data = get_bool(h, "homodyne", "resample_data", false);
    if (cfg.homodyne.samples < 5) fail("homodyne.samples must be >= 5");
    if (cfg.homodyne.bootstrap < 50) fail("homodyne.bootstrap must be >= 50");
  }
  if (j.contains("pnrd")) {
    const json& p = j.at("pnrd");
    require_keys(p, "pnrd", {"shots", "bootstrap"});
    cfg.pnrd.shots = get_int(p, "pnrd", "shots", cfg.pnrd.shots);
    cfg.pnrd.bootstrap = static_cast<int>(get_int(p, "pnrd", "bootstrap", cfg.pnrd.bootstrap));
    if (cfg.pnrd.shots < 1) fail("pnrd.shots must be >= 1");
    if (cfg.pnrd.bootstrap < 50) fail("pnrd.bootstrap must be >= 50");
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    require_keys(s, "sweep", {"parameter", "start", "stop", "steps"});
    SweepConfig sweep;
    if (!s.contains("parameter") || !s.at("parameter").is_string())
      fail("sweep.parameter must be a string");
    sweep.parameter = s.at("parameter").get<std::string>();
    if (!kSweepParams.count(sweep.parameter))
      fail("sweep.parameter '" + sweep.parameter + "' is not a state-spec parameter");
    if (!std::holds_alternative<SpecSource>(cfg.state))
      fail("sweep requires a state given as per-mode specs");
    sweep.start = get_num(s, "sweep", "start", 0.0);
    sweep.stop = get_num(s, "sweep", "stop", 0.0);
    sweep.steps = static_cast<int>(get_int(s, "sweep", "steps", 2));
    if (!(std::isfinite(sweep.start) && std::isfinite(sweep.stop))) fail("sweep range not finite");
    if (sweep.steps < 2) fail("sweep.steps must be >= 2");
    cfg.sweep = sweep;
  }

  if (j.contains("fig1")) {
    const json& f = j.at("fig1");
    require_keys(f, "fig1", {"max_mean_photons", "steps", "dim"});
    cfg.fig1.max_mean_photons = get_num(f, "fig1", "max_mean_photons", cfg.fig1.max_mean_photons);
    cfg.fig1.steps = static_cast<int>(get_int(f, "fig1", "steps", cfg.fig1.steps));
    cfg.fig1.dim = static_cast<int>(get_int(f, "fig1", "dim", cfg.fig1.dim));
    if (cfg.fig1.max_mean_photons < 0) fail("fig1.max_mean_photons must be >= 0");
    if (cfg.fig1.steps < 2 || cfg.fig1.dim < 2) fail("fig1.steps/dim out of range");
  }
  if (j.contains("fig2")) {
    const json& f = j.at("fig2");
    require_keys(f, "fig2", {"r_max", "alpha_max", "steps", "dim"});
    cfg.fig2.r_max = get_num(f, "fig2", "r_max", cfg.fig2.r_max);
    cfg.fig2.alpha_max = get_num(f, "fig2", "alpha_max", cfg.fig2.alpha_max);
    cfg.fig2.steps = static_cast<int>(get_int(f, "fig2", "steps", cfg.fig2.steps));
    cfg.fig2.dim = static_cast<int>(get_int(f, "fig2", "dim", cfg.fig2.dim));
    if (cfg.fig2.r_max < 0 || cfg.fig2.alpha_max < 0) fail("fig2 ranges must be >= 0");
    if (cfg.fig2.steps < 2 || cfg.fig2.dim < 2) fail("fig2.steps/dim out of range");
  }
  if (j.contains("fig4")) {
    const json& f = j.at("fig4");
    require_keys(f, "fig4",
                 {"mode_h", "alpha_start", "alpha_stop", "steps", "inset_alpha", "bootstrap",
                  "error_bars"});
    if (f.contains("mode_h")) cfg.fig4.mode_h = parse_mode_spec(f.at("mode_h"), "fig4.mode_h");
    cfg.fig4.alpha_start = get_num(f, "fig4", "alpha_start", cfg.fig4.alpha_start);
    cfg.fig4.alpha_stop = get_num(f, "fig4", "alpha_stop", cfg.fig4.alpha_stop);
    cfg.fig4.steps = static_cast<int>(get_int(f, "fig4", "steps", cfg.fig4.steps));
    if (f.contains("inset_alpha") && !f.at("inset_alpha").is_null())
      cfg.fig4.inset_alpha = get_num(f, "fig4", "inset_alpha", 0.0);
    cfg.fig4.bootstrap = static_cast<int>(get_int(f, "fig4", "bootstrap", cfg.fig4.bootstrap));
    cfg.fig4.error_bars = get_bool(f, "fig4", "error_bars", cfg.fig4.error_bars);
    if (!(cfg.fig4.alpha_start >= 0) || !(cfg.fig4.alpha_stop > cfg.fig4.alpha_start))
      fail("fig4 alpha range invalid");
    if (cfg.fig4.steps < 2) fail("fig4.steps must be >= 2");
    if (cfg.fig4.error_bars && cfg.fig4.bootstrap < 50)
      fail("fig4.bootstrap must be >= 50 when error bars are on");
  }

  if (j.contains("out")) {
    const json& o = j.at("out");
    require_keys(o, "out",
                 {"report", "manifolds", "fig1", "fig2_prefix", "fig4", "fig4_inset", "dataset",
                  "counts"});
    const auto get_name = [&](const char* key, std::string fallback) {
      if (!o.contains(key)) return fallback;
      if (!o.at(key).is_string()) fail(std::string("out.") + key + " must be a string");
      return o.at(key).get<std::string>();
    };
    cfg.out.report = get_name("report", cfg.out.report);
    cfg.out.manifolds = get_name("manifolds", cfg.out.manifolds);
    cfg.out.fig1 = get_name("fig1", cfg.out.fig1);
    cfg.out.fig2_prefix = get_name("fig2_prefix", cfg.out.fig2_prefix);
    cfg.out.fig4 = get_name("fig4", cfg.out.fig4);
    cfg.out.fig4_inset = get_name("fig4_inset", cfg.out.fig4_inset);
    cfg.out.dataset = get_name("dataset", cfg.out.dataset);
    cfg.out.counts = get_name("counts", cfg.out.counts);
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0)
      fail("seed must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    cfg.threads = static_cast<int>(get_int(j, "top level", "threads", 0));
    if (cfg.threads < 0) fail("threads must be >= 0");
  }

  // Cross-field checks.
  if (std::holds_alternative<XiSource>(cfg.state) && cfg.dim && *cfg.dim < 3)
    fail("the xi state needs space.dim >= 3");
  if (const auto* fock = std::get_if<FockSource>(&cfg.state); fock && cfg.dim) {
    for (const auto& t : fock->terms)
      if (t.m >= *cfg.dim || t.n >= *cfg.dim)
        fail("state.fock occupation exceeds space.dim");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const std::runtime_error& e) {
    fail(e.what());
  }
  return parse_config_text(text);
}

StateSpec<double> fig4_mode_h(const RunConfig& cfg) {
  if (cfg.fig4.mode_h) return *cfg.fig4.mode_h;
  return db_to_spec(3.2, 7.4);
}

}  // namespace cvpol
