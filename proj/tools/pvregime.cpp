// Command line front end for the pvregime library. Wires the pipeline
// simulate -> fit-sunny -> learn-dictionary -> train-hmm -> forecast ->
// evaluate through JSON/CSV artifacts. Exit codes: 0 success, 2 missing
// artifact (the path is printed), 3 violated constraint (the constraint is
// printed). Logs go to stderr, data to files; --json prints a run summary on
// stdout.

#include <climits>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pvregime/model_io.hpp"
#include "pvregime/pipeline.hpp"

namespace pvr = pvregime;
using pvr::json;

namespace {

struct MissingArtifact : std::runtime_error {
  explicit MissingArtifact(const std::string& path) : std::runtime_error(path) {}
};

// Input artifacts exit 2 when absent; the flag name stands in for the path
// when the flag was never given.
void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw MissingArtifact(std::string(flag) + " (not given)");
  if (!std::filesystem::exists(path)) throw MissingArtifact(path);
}

void require_out(const std::string& path, const char* flag) {
  if (path.empty())
    throw std::invalid_argument(std::string("constraint violated: ") + flag +
                                " is required");
}

void log_line(const std::string& msg) { std::cerr << "pvregime: " << msg << "\n"; }

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  require_file(path, "--config");
  return pvr::detail::load_json(path);
}

// flags > config > defaults: a bound option keeps its parsed value, an unset
// (or absent) one picks up the config key when present.
template <class T>
void config_fill(const CLI::App& cmd, const std::string& flag, const json& cfg,
                 const char* key, T& var) {
  const CLI::Option* opt = cmd.get_option_no_throw(flag);
  if ((opt == nullptr || opt->count() == 0) && cfg.contains(key)) var = cfg.at(key).get<T>();
}

std::vector<int> parse_days(const std::string& text, int n_days) {
  std::vector<int> out;
  if (text.empty() || text == "all") {
    for (int d = 0; d < n_days; ++d) out.push_back(d);
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t dash = tok.find('-', 1);
    long a = 0, b = 0;
    try {
      if (dash == std::string::npos) {
        a = b = std::stol(tok);
      } else {
        a = std::stol(tok.substr(0, dash));
        b = std::stol(tok.substr(dash + 1));
      }
    } catch (...) {
      throw std::invalid_argument("bad --days token: " + tok);
    }
    if (a < 0 || a > b) throw std::invalid_argument("bad --days range: " + tok);
    for (long d = a; d <= b; ++d) {
      if (d >= n_days)
        throw std::invalid_argument("--days index " + std::to_string(d) +
                                    " outside input with " + std::to_string(n_days) +
                                    " days");
      out.push_back(static_cast<int>(d));
    }
  }
  if (out.empty()) throw std::invalid_argument("--days selects no day");
  return out;
}

// data.csv carries no plate rating. When neither --nameplate nor the config
// provides one, the peak observed power stands in (logged); it only scales
// floors and normalized report values.
pvr::PowerSeries load_series(const std::string& path, int period_min, double& nameplate) {
  require_file(path, "--input");
  if (nameplate > 0.0) return pvr::ingest_csv(path, period_min, nameplate);
  pvr::PowerSeries probe = pvr::ingest_csv(path, period_min, 1e30);
  double peak = 0.0;
  const int n = probe.half_samples();
  for (int d = 0; d < probe.days(); ++d)
    for (int k = -n; k < n; ++k)
      if (probe.has(d, k)) peak = std::max(peak, probe.value(d, k));
  if (peak <= 0.0)
    throw pvr::FitError(path + " has no positive samples; give --nameplate");
  nameplate = peak;
  log_line("no nameplate given; using peak observed power " + std::to_string(peak) + " W");
  return pvr::ingest_csv(path, period_min, peak);
}

std::string strip_csv_ext(const std::string& path) {
  static const std::string ext = ".csv";
  if (path.size() > ext.size() &&
      path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
    return path.substr(0, path.size() - ext.size());
  return path;
}

void emit_summary(bool enabled, const json& j) {
  if (enabled) std::cout << j.dump(2) << "\n";
}

// Options shared by the subcommands that read the canonical CSV.
struct CommonArgs {
  std::string input;
  std::string config;
  std::string days = "all";
  double nameplate = 0.0;
  int period_min = 15;
  bool json_summary = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_input = true) {
  if (with_input) cmd->add_option("--input", a.input, "canonical power CSV");
  cmd->add_option("--config", a.config, "JSON config; flags override its keys");
  cmd->add_option("--days", a.days, "day list like 0-4,7 (default all)");
  cmd->add_option("--nameplate", a.nameplate, "plate rating in watts");
  cmd->add_option("--period", a.period_min, "sample period in minutes");
  cmd->add_flag("--json", a.json_summary, "print a run summary to stdout");
}

void fill_common(const CLI::App& cmd, CommonArgs& a, const json& cfg) {
  config_fill(cmd, "--input", cfg, "input", a.input);
  config_fill(cmd, "--days", cfg, "days", a.days);
  config_fill(cmd, "--nameplate", cfg, "nameplate", a.nameplate);
  config_fill(cmd, "--period", cfg, "sample_period_min", a.period_min);
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool json_summary = false;
};

int run_simulate(const CLI::App& cmd, SimulateArgs& a) {
  require_out(a.out, "--out");
  require_file(a.config, "--config");
  pvr::ScenarioConfig cfg = pvr::scenario_from_json(pvr::detail::load_json(a.config));
  if (cmd.count("--seed")) {
    cfg.seed = a.seed;
  } else if (const char* env = std::getenv("PVREGIME_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (...) {
      throw std::invalid_argument("PVREGIME_SEED must be an unsigned integer");
    }
  }

  pvr::SynthResult r = pvr::generate(cfg);
  pvr::emit_csv(r.series, a.out);
  std::string labels = strip_csv_ext(a.out) + ".labels.json";
  pvr::detail::save_json(labels, pvr::labels_to_json(r.truth));
  log_line("simulated " + std::to_string(cfg.n_days) + " days (seed " +
           std::to_string(cfg.seed) + ") -> " + a.out);

  emit_summary(a.json_summary, json{{"command", "simulate"},
                                    {"out", a.out},
                                    {"labels", labels},
                                    {"days", cfg.n_days},
                                    {"seed", cfg.seed},
                                    {"nameplate_w", cfg.nameplate}});
  return 0;
}

// --- fit-sunny ---------------------------------------------------------------

struct FitSunnyArgs {
  CommonArgs common;
  std::string out;
  double daylight_threshold = -1.0;
  int k1 = INT_MIN, k2 = INT_MIN;
};

int run_fit_sunny(const CLI::App& cmd, FitSunnyArgs& a) {
  json cfg = load_config(a.common.config);
  fill_common(cmd, a.common, cfg);
  require_out(a.out, "--out");

  pvr::PowerSeries series = load_series(a.common.input, a.common.period_min,
                                        a.common.nameplate);
  std::vector<int> days = parse_days(a.common.days, series.days());
  double threshold = a.daylight_threshold >= 0.0 ? a.daylight_threshold
                                                 : 1e-3 * a.common.nameplate;
  auto mask = pvr::daylight_mask(series, threshold);
  int lo = INT_MAX, hi = INT_MIN;
  for (int d : days) {
    const auto& m = mask[static_cast<std::size_t>(d)];
    if (m.empty) continue;
    lo = std::min(lo, m.k_lo);
    hi = std::max(hi, m.k_hi);
  }
  if (lo > hi) throw pvr::FitError("no daylight samples in the selected days");

  pvr::ClearSkyModel model =
      (a.k1 != INT_MIN && a.k2 != INT_MIN)
          ? pvr::fit_sunny(series, days, a.k1, a.k2, lo, hi)
          : pvr::fit_sunny_auto(series, days, lo, hi);
  pvr::detail::save_json(a.out, pvr::clearsky_to_json(model));
  log_line("clear-sky fit over " + std::to_string(days.size()) + " days, daylight [" +
           std::to_string(lo) + ", " + std::to_string(hi) + "] -> " + a.out);

  emit_summary(a.common.json_summary,
               json{{"command", "fit-sunny"},
                    {"out", a.out},
                    {"days_used", static_cast<int>(days.size())},
                    {"k1", model.k1},
                    {"k2", model.k2},
                    {"daylight", {model.daylight_lo, model.daylight_hi}},
                    {"control_points_defaulted", model.control_points_defaulted}});
  return 0;
}

// --- learn-dictionary -------------------------------------------------------

struct LearnDictArgs {
  CommonArgs common;
  std::string clearsky;
  std::string out;
  int m_len = 5;
  double lambda1 = -1.0, lambda2 = -1.0, lambda3 = -1.0;
  int iters = 20;
  double g = -1.0;
  int jobs = 1;
};

int run_learn_dict(const CLI::App& cmd, LearnDictArgs& a) {
  json cfg = load_config(a.common.config);
  fill_common(cmd, a.common, cfg);
  config_fill(cmd, "--M", cfg, "M", a.m_len);
  config_fill(cmd, "--lambda1", cfg, "lambda1", a.lambda1);
  config_fill(cmd, "--lambda2", cfg, "lambda2", a.lambda2);
  config_fill(cmd, "--lambda3", cfg, "lambda3", a.lambda3);
  if (a.m_len < 2) throw std::invalid_argument("constraint violated: M must be >= 2");
  if (a.lambda1 >= 0.0 && a.lambda2 >= 0.0 && a.lambda3 >= 0.0) {
    pvr::SparseCodeParams probe;
    probe.lambda1 = a.lambda1;
    probe.lambda2 = a.lambda2;
    probe.lambda3 = a.lambda3;
    pvr::validate_lambdas(probe);
  }
  require_out(a.out, "--out");

  require_file(a.clearsky, "--clearsky");
  pvr::PowerSeries series = load_series(a.common.input, a.common.period_min,
                                        a.common.nameplate);
  pvr::ClearSkyModel cs = pvr::clearsky_from_json(pvr::detail::load_json(a.clearsky));
  std::vector<int> days = parse_days(a.common.days, series.days());

  double s_max = 0.0;
  for (int k = cs.daylight_lo; k <= cs.daylight_hi; ++k)
    s_max = std::max(s_max, cs.evaluate(k));
  pvr::SparseCodeParams params = pvr::default_lambdas(s_max);
  if (a.lambda1 >= 0.0) params.lambda1 = a.lambda1;
  if (a.lambda2 >= 0.0) params.lambda2 = a.lambda2;
  if (a.lambda3 >= 0.0) params.lambda3 = a.lambda3;
  pvr::validate_lambdas(params);

  pvr::LearnResult res =
      pvr::learn_dictionary(series, cs, days, a.m_len, params, a.iters, a.g, a.jobs);
  pvr::detail::save_json(a.out, pvr::dictionary_to_json(res, days));
  double worst = 0.0;
  for (const auto& d : res.days) worst = std::max(worst, d.nmse);
  log_line("dictionary learned on " + std::to_string(days.size()) + " days, max NMSE " +
           std::to_string(worst) + " -> " + a.out);
  if (res.no_z_warning) log_line("warning: no attenuation found; filter kept at init");

  emit_summary(a.common.json_summary, json{{"command", "learn-dictionary"},
                                           {"out", a.out},
                                           {"M", a.m_len},
                                           {"g", res.g},
                                           {"days_used", static_cast<int>(days.size())},
                                           {"max_nmse", worst},
                                           {"no_z_warning", res.no_z_warning}});
  return 0;
}

// --- train-hmm ---------------------------------------------------------------

struct TrainHmmArgs {
  CommonArgs common;
  std::string clearsky;
  std::string dict;
  std::string out;
  int m_len = 0;  // 0: take the dictionary's tap count
  int ell = 1;
  double lambda_z = 2.0, lambda_ab = 4.0, lambda_ae = 8.0;
  double epsilon_s = 0.0;  // 0: default to 2 sigma_s
  int window = 4;
  double mu = 3.0, mu_oc = 3.0, alpha_max = 0.9;
  int max_iters = 50;
};

int run_train_hmm(const CLI::App& cmd, TrainHmmArgs& a) {
  json cfg = load_config(a.common.config);
  fill_common(cmd, a.common, cfg);
  config_fill(cmd, "--M", cfg, "M", a.m_len);
  config_fill(cmd, "--ell", cfg, "ell", a.ell);
  config_fill(cmd, "--lambda-z", cfg, "lambda_z", a.lambda_z);
  config_fill(cmd, "--lambda-ab", cfg, "lambda_ab", a.lambda_ab);
  config_fill(cmd, "--lambda-ae", cfg, "lambda_ae", a.lambda_ae);
  config_fill(cmd, "--window", cfg, "chi_window", a.window);
  config_fill(cmd, "--mu", cfg, "mu", a.mu);
  config_fill(cmd, "--mu-oc", cfg, "mu_oc", a.mu_oc);
  config_fill(cmd, "--alpha-max", cfg, "alpha_max", a.alpha_max);

  // Parameter constraints fail before any artifact is touched.
  if (a.ell < 1) throw std::invalid_argument("constraint violated: ell must be >= 1");
  if (a.m_len > 0 && a.ell >= a.m_len)
    throw std::invalid_argument("constraint violated: ell < M (got ell=" +
                                std::to_string(a.ell) + ", M=" + std::to_string(a.m_len) +
                                ")");
  if (!(a.lambda_z <= a.lambda_ab && a.lambda_ab <= a.lambda_ae))
    throw std::invalid_argument(
        "constraint violated: lambda_z <= lambda_ab <= lambda_ae");
  require_out(a.out, "--out");

  require_file(a.clearsky, "--clearsky");
  require_file(a.dict, "--dict");
  pvr::PowerSeries series = load_series(a.common.input, a.common.period_min,
                                        a.common.nameplate);
  pvr::ClearSkyModel cs = pvr::clearsky_from_json(pvr::detail::load_json(a.clearsky));
  pvr::DiffuseFilter filter = pvr::filter_from_json(pvr::detail::load_json(a.dict));
  if (a.m_len == 0) a.m_len = filter.length();
  if (a.m_len != filter.length())
    throw std::invalid_argument("constraint violated: M=" + std::to_string(a.m_len) +
                                " does not match the dictionary's " +
                                std::to_string(filter.length()) + " taps");
  if (a.ell >= a.m_len)
    throw std::invalid_argument("constraint violated: ell < M (got ell=" +
                                std::to_string(a.ell) + ", M=" + std::to_string(a.m_len) +
                                ")");

  std::vector<int> days = parse_days(a.common.days, series.days());
  pvr::SigmaBootstrap sig =
      pvr::bootstrap_sigmas(series, cs, days, a.common.nameplate, a.alpha_max);
  if (sig.overcast_fallback)
    log_line("warning: no overcast-looking day; sigma_oc defaulted to 2*sigma_s");
  double eps = a.epsilon_s > 0.0 ? a.epsilon_s : 2.0 * sig.sigma_s;

  pvr::PartlyCloudyHmm init = pvr::make_hmm(a.m_len, a.ell, filter, a.lambda_z,
                                            a.lambda_ab, a.lambda_ae, eps);
  pvr::DetectThresholds th;
  th.sigma_s = sig.sigma_s;
  th.sigma_oc = sig.sigma_oc;
  th.mu = a.mu;
  th.mu_oc = a.mu_oc;
  th.alpha_max = a.alpha_max;
  pvr::TrainingWindows win =
      pvr::collect_pc_windows(series, cs, th, init, days, a.window);
  log_line("windows: " + std::to_string(win.total) + " classified (" +
           std::to_string(win.partly_cloudy.size()) + " partly cloudy, " +
           std::to_string(win.sunny) + " sunny, " + std::to_string(win.overcast) +
           " overcast, " + std::to_string(win.skipped) + " skipped)");

  pvr::TrainResult trained =
      pvr::train_segmental_kmeans(init, win.partly_cloudy, a.max_iters);
  if (win.partly_cloudy.empty())
    log_line("warning: no partly-cloudy window; transition kept at its prior");

  pvr::detail::save_json(a.out, pvr::hmm_to_json(trained.hmm));
  std::filesystem::path sig_path =
      std::filesystem::path(a.out).parent_path() / "sigmas.json";
  json sj = pvr::sigmas_to_json(sig.sigma_s, sig.sigma_oc);
  sj["nameplate"] = a.common.nameplate;
  pvr::detail::save_json(sig_path.string(), sj);
  log_line("hmm trained in " + std::to_string(trained.iterations) + " iterations -> " +
           a.out);

  emit_summary(a.common.json_summary,
               json{{"command", "train-hmm"},
                    {"out", a.out},
                    {"sigmas_out", sig_path.string()},
                    {"M", a.m_len},
                    {"ell", a.ell},
                    {"n_states", trained.hmm.n_states},
                    {"epsilon_s", eps},
                    {"sigma_s", sig.sigma_s},
                    {"sigma_oc", sig.sigma_oc},
                    {"sigma_oc_fallback", sig.overcast_fallback},
                    {"windows",
                     {{"total", win.total},
                      {"partly_cloudy", win.partly_cloudy.size()},
                      {"sunny", win.sunny},
                      {"overcast", win.overcast},
                      {"skipped", win.skipped}}},
                    {"iterations", trained.iterations},
                    {"converged", trained.converged}});
  return 0;
}

// --- forecast ----------------------------------------------------------------

struct ForecastArgs {
  CommonArgs common;
  std::string models;
  std::string out;
  int window = 4;
  int horizon = 12;
  int jobs = 1;
  int ar_order = 4;
  double mu = 3.0, mu_oc = 3.0, alpha_max = 0.9;
  bool no_baselines = false;
};

int run_forecast(const CLI::App& cmd, ForecastArgs& a) {
  if (a.models.empty()) throw MissingArtifact("models directory (--models)");
  json cfg = load_config(a.common.config);
  fill_common(cmd, a.common, cfg);
  config_fill(cmd, "--window", cfg, "chi_window", a.window);
  config_fill(cmd, "--horizon", cfg, "chi", a.horizon);
  config_fill(cmd, "--mu", cfg, "mu", a.mu);
  config_fill(cmd, "--mu-oc", cfg, "mu_oc", a.mu_oc);
  config_fill(cmd, "--alpha-max", cfg, "alpha_max", a.alpha_max);
  if (a.window < 2) throw std::invalid_argument("constraint violated: --window >= 2");
  if (a.horizon < 1) throw std::invalid_argument("constraint violated: --horizon >= 1");
  require_out(a.out, "--out");

  std::filesystem::path dir(a.models);
  std::string cs_path = (dir / "clearsky.json").string();
  std::string dict_path = (dir / "dict.json").string();
  std::string hmm_path = (dir / "hmm.json").string();
  std::string sig_path = (dir / "sigmas.json").string();
  require_file(cs_path, "--models");
  require_file(dict_path, "--models");
  require_file(hmm_path, "--models");
  require_file(sig_path, "--models");

  json sig = pvr::detail::load_json(sig_path);
  if (a.common.nameplate <= 0.0 && sig.contains("nameplate"))
    a.common.nameplate = sig.at("nameplate").get<double>();
  pvr::PowerSeries series = load_series(a.common.input, a.common.period_min,
                                        a.common.nameplate);

  pvr::ForecastModels m;
  m.clearsky = pvr::clearsky_from_json(pvr::detail::load_json(cs_path));
  m.hmm = pvr::hmm_from_json(pvr::detail::load_json(hmm_path),
                             pvr::filter_from_json(pvr::detail::load_json(dict_path)));
  m.sigma_s = sig.at("sigma_s").get<double>();
  m.sigma_oc = sig.at("sigma_oc").get<double>();
  m.nameplate = a.common.nameplate;
  m.mu = a.mu;
  m.mu_oc = a.mu_oc;
  m.alpha_max = a.alpha_max;

  std::vector<int> days = parse_days(a.common.days, series.days());
  pvr::RollingStats stats;
  std::vector<pvr::WindowDecision> decisions;
  std::vector<pvr::ForecastRecord> records = pvr::rolling_evaluate(
      series, m, days, a.window, a.horizon, a.jobs, &stats, &decisions);

  std::string stem = strip_csv_ext(a.out);
  std::string dist_path = stem + ".dist.jsonl";
  pvr::ForecastCsvStats fst = pvr::write_forecast_csv(a.out, records, false, &dist_path);
  std::string dec_path = stem + ".decisions.jsonl";
  {
    std::ofstream out(dec_path, std::ios::binary);
    if (!out) throw pvr::ParseError("cannot write " + dec_path);
    for (const auto& d : decisions)
      out << pvr::decision_to_json(d.day, d.k1, d.k2, d.decision).dump() << "\n";
  }
  log_line("forecasts: " + std::to_string(fst.written) + " rows over " +
           std::to_string(stats.windows) + " windows (" + std::to_string(fst.dark) +
           " dark, " + std::to_string(fst.unavailable) + " unavailable) -> " + a.out);

  // Reference methods ride the same rolling grid so evaluate can rank them.
  std::string base_path, base_dist;
  pvr::ForecastCsvStats bst;
  if (!a.no_baselines) {
    pvr::BaselineModels bm;
    pvr::FittedBaselines fitted;
    bool have_ar = false;
    try {
      fitted = pvr::fit_baselines(series, m.clearsky, m.thresholds(), &m.hmm, days,
                                  a.ar_order, a.window);
      bm.ar = &fitted.ar;
      bm.swar = &fitted.swar;
      have_ar = true;
    } catch (const pvr::FitError& e) {
      log_line(std::string("warning: AR baselines skipped: ") + e.what());
    }
    std::vector<pvr::ForecastRecord> brecords =
        pvr::rolling_baselines(series, m, bm, days, a.window, a.horizon, a.jobs);
    base_path = stem + ".baselines.csv";
    base_dist = stem + ".baselines.dist.jsonl";
    bst = pvr::write_forecast_csv(base_path, brecords, true, &base_dist);
    log_line("baselines: " + std::to_string(bst.written) + " rows (" +
             std::string(have_ar ? "with" : "without") + " AR) -> " + base_path);
  }

  json summary{{"command", "forecast"},
               {"out", a.out},
               {"dist", dist_path},
               {"decisions", dec_path},
               {"window", a.window},
               {"horizon", a.horizon},
               {"rows", fst.written},
               {"dark", fst.dark},
               {"unavailable", fst.unavailable},
               {"windows", stats.windows},
               {"skipped_windows", stats.skipped_windows},
               {"skipped_days", stats.skipped_days}};
  if (!base_path.empty()) {
    summary["baselines"] = base_path;
    summary["baseline_rows"] = bst.written;
  }
  emit_summary(a.common.json_summary, summary);
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  CommonArgs common;  // input unused; actual carries the series
  std::string forecasts;
  std::string actual;
  std::string out;
  std::string baselines;
  int jobs = 1;
  std::vector<double> btildes;
};

int run_evaluate(const CLI::App& cmd, EvaluateArgs& a) {
  json cfg = load_config(a.common.config);
  fill_common(cmd, a.common, cfg);
  require_out(a.out, "--out");
  require_file(a.forecasts, "--forecasts");
  require_file(a.actual, "--actual");

  pvr::PowerSeries actual = load_series(a.actual, a.common.period_min,
                                        a.common.nameplate);

  auto read_with_sidecar = [](const std::string& path) {
    std::string side = strip_csv_ext(path) + ".dist.jsonl";
    if (std::filesystem::exists(side)) return pvr::read_forecast_csv(path, &side);
    log_line("no distribution sidecar for " + path + "; intervals only");
    return pvr::read_forecast_csv(path);
  };
  std::vector<pvr::ForecastRecord> records = read_with_sidecar(a.forecasts);
  std::string base_path = a.baselines;
  if (base_path.empty()) {
    std::string guess = strip_csv_ext(a.forecasts) + ".baselines.csv";
    if (std::filesystem::exists(guess)) base_path = guess;
  } else {
    require_file(base_path, "--baselines");
  }
  if (!base_path.empty()) {
    std::vector<pvr::ForecastRecord> b = read_with_sidecar(base_path);
    records.insert(records.end(), b.begin(), b.end());
  }

  pvr::MetricsOptions opts;
  if (!a.btildes.empty()) opts.btildes = a.btildes;
  opts.jobs = a.jobs;
  std::map<pvr::Method, pvr::MetricsReport> reports =
      pvr::compute_metrics(records, actual, opts);

  std::filesystem::create_directories(a.out);
  pvr::write_metric_csvs(a.out, reports);
  std::string summary_path = (std::filesystem::path(a.out) / "summary.json").string();
  pvr::detail::save_json(summary_path, pvr::metrics_to_json(reports, actual.nameplate()));

  json methods = json::array();
  for (const auto& [method, rep] : reports) methods.push_back(pvr::method_name(method));
  log_line("metrics for " + std::to_string(reports.size()) + " methods over " +
           std::to_string(records.size()) + " records -> " + a.out);

  emit_summary(a.common.json_summary, json{{"command", "evaluate"},
                                           {"out", a.out},
                                           {"summary", summary_path},
                                           {"methods", methods},
                                           {"records", records.size()},
                                           {"baselines", base_path}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regime-switching probabilistic solar power forecasting"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a synthetic series");
  sim_cmd->add_option("--config", sim.config, "scenario JSON");
  sim_cmd->add_option("--out", sim.out, "output CSV");
  sim_cmd->add_option("--seed", sim.seed, "override the scenario seed");
  sim_cmd->add_flag("--json", sim.json_summary, "print a run summary to stdout");

  FitSunnyArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit-sunny", "fit the clear-sky pattern");
  add_common(fit_cmd, fit.common);
  fit_cmd->add_option("--out", fit.out, "clear-sky model JSON");
  fit_cmd->add_option("--daylight-threshold", fit.daylight_threshold,
                      "daylight cut in watts (default 1e-3 * nameplate)");
  fit_cmd->add_option("--k1", fit.k1, "pin the first control point");
  fit_cmd->add_option("--k2", fit.k2, "pin the second control point");

  LearnDictArgs dict;
  CLI::App* dict_cmd =
      app.add_subcommand("learn-dictionary", "learn the diffuse attenuation filter");
  add_common(dict_cmd, dict.common);
  dict_cmd->add_option("--clearsky", dict.clearsky, "clear-sky model JSON");
  dict_cmd->add_option("--out", dict.out, "dictionary JSON");
  dict_cmd->add_option("--M", dict.m_len, "filter length (default 5)");
  dict_cmd->add_option("--lambda1", dict.lambda1, "a_e penalty");
  dict_cmd->add_option("--lambda2", dict.lambda2, "a_b penalty");
  dict_cmd->add_option("--lambda3", dict.lambda3, "z penalty");
  dict_cmd->add_option("--iters", dict.iters, "outer iterations");
  dict_cmd->add_option("--g", dict.g, "filter peak scale (default from data)");
  dict_cmd->add_option("--jobs", dict.jobs, "day-level parallelism");

  TrainHmmArgs hmm;
  CLI::App* hmm_cmd = app.add_subcommand("train-hmm", "train the partly-cloudy chain");
  add_common(hmm_cmd, hmm.common);
  hmm_cmd->add_option("--clearsky", hmm.clearsky, "clear-sky model JSON");
  hmm_cmd->add_option("--dict", hmm.dict, "dictionary JSON");
  hmm_cmd->add_option("--out", hmm.out, "HMM JSON (sigmas.json lands beside it)");
  hmm_cmd->add_option("--M", hmm.m_len, "filter length (default from the dictionary)");
  hmm_cmd->add_option("--ell", hmm.ell, "max simultaneous lags (default 1)");
  hmm_cmd->add_option("--lambda-z", hmm.lambda_z, "event amplitude rate");
  hmm_cmd->add_option("--lambda-ab", hmm.lambda_ab, "direct attenuation rate");
  hmm_cmd->add_option("--lambda-ae", hmm.lambda_ae, "edge-of-cloud rate");
  hmm_cmd->add_option("--epsilon-s", hmm.epsilon_s,
                      "sunny band half-width in watts (default 2 sigma_s)");
  hmm_cmd->add_option("--window", hmm.window, "classification window length");
  hmm_cmd->add_option("--mu", hmm.mu, "sunny threshold multiplier");
  hmm_cmd->add_option("--mu-oc", hmm.mu_oc, "overcast threshold multiplier");
  hmm_cmd->add_option("--alpha-max", hmm.alpha_max, "overcast attenuation cap");
  hmm_cmd->add_option("--max-iters", hmm.max_iters, "training iteration cap");

  ForecastArgs fc;
  CLI::App* fc_cmd = app.add_subcommand("forecast", "rolling point + probabilistic forecasts");
  add_common(fc_cmd, fc.common);
  fc_cmd->add_option("--models", fc.models, "directory with the trained artifacts");
  fc_cmd->add_option("--out", fc.out, "forecast CSV");
  fc_cmd->add_option("--window", fc.window, "observation window length");
  fc_cmd->add_option("--horizon", fc.horizon, "forecast steps per window");
  fc_cmd->add_option("--jobs", fc.jobs, "day-level parallelism");
  fc_cmd->add_option("--ar-order", fc.ar_order, "baseline AR order");
  fc_cmd->add_option("--mu", fc.mu, "sunny threshold multiplier");
  fc_cmd->add_option("--mu-oc", fc.mu_oc, "overcast threshold multiplier");
  fc_cmd->add_option("--alpha-max", fc.alpha_max, "overcast attenuation cap");
  fc_cmd->add_flag("--no-baselines", fc.no_baselines, "skip the reference forecasters");

  EvaluateArgs ev;
  CLI::App* ev_cmd = app.add_subcommand("evaluate", "score forecasts against actuals");
  add_common(ev_cmd, ev.common, false);
  ev_cmd->add_option("--forecasts", ev.forecasts, "forecast CSV");
  ev_cmd->add_option("--actual", ev.actual, "actual power CSV");
  ev_cmd->add_option("--out", ev.out, "report directory");
  ev_cmd->add_option("--baselines", ev.baselines,
                     "baseline CSV (default: sibling of --forecasts)");
  ev_cmd->add_option("--jobs", ev.jobs, "day-level parallelism");
  ev_cmd->add_option("--btilde", ev.btildes, "tail masses to score (default 0.1 0.5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(*sim_cmd, sim);
    if (fit_cmd->parsed()) return run_fit_sunny(*fit_cmd, fit);
    if (dict_cmd->parsed()) return run_learn_dict(*dict_cmd, dict);
    if (hmm_cmd->parsed()) return run_train_hmm(*hmm_cmd, hmm);
    if (fc_cmd->parsed()) return run_forecast(*fc_cmd, fc);
    if (ev_cmd->parsed()) return run_evaluate(*ev_cmd, ev);
  } catch (const MissingArtifact& e) {
    std::cerr << "pvregime: missing artifact: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pvregime: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
