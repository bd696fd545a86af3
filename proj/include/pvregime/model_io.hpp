#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pvregime/baselines.hpp"
#include "pvregime/clearsky.hpp"
#include "pvregime/deconv.hpp"
#include "pvregime/detect.hpp"
#include "pvregime/forecast.hpp"
#include "pvregime/metrics.hpp"
#include "pvregime/regimes.hpp"
#include "pvregime/synth.hpp"

namespace pvregime {

using json = nlohmann::json;

namespace detail {

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline std::vector<double> as_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline json clearsky_to_json(const ClearSkyModel& m) {
  json j;
  j["coefficients"] = std::vector<double>(m.coefficients.begin(), m.coefficients.end());
  j["k1"] = m.k1;
  j["k2"] = m.k2;
  j["day_range"] = {m.day_begin, m.day_end};
  j["daylight"] = {m.daylight_lo, m.daylight_hi};
  return j;
}

inline ClearSkyModel clearsky_from_json(const json& j) {
  ClearSkyModel m;
  auto coeffs = j.at("coefficients").get<std::vector<double>>();
  if (coeffs.size() != m.coefficients.size())
    throw ParseError("clearsky: expected 10 coefficients");
  std::copy(coeffs.begin(), coeffs.end(), m.coefficients.begin());
  m.k1 = j.at("k1").get<int>();
  m.k2 = j.at("k2").get<int>();
  m.day_begin = j.at("day_range").at(0).get<int>();
  m.day_end = j.at("day_range").at(1).get<int>();
  m.daylight_lo = j.at("daylight").at(0).get<int>();
  m.daylight_hi = j.at("daylight").at(1).get<int>();
  return m;
}

inline json dictionary_to_json(const LearnResult& r, const std::vector<int>& day_indices) {
  json j;
  j["taps"] = detail::as_vector(r.filter.taps);
  j["g"] = r.g;
  json days = json::array();
  for (std::size_t i = 0; i < r.days.size(); ++i) {
    json d;
    d["day"] = i < day_indices.size() ? day_indices[i] : static_cast<int>(i);
    d["z"] = detail::as_vector(r.days[i].z);
    d["a_b"] = detail::as_vector(r.days[i].a_b);
    d["a_e"] = detail::as_vector(r.days[i].a_e);
    d["nmse"] = r.days[i].nmse;
    days.push_back(std::move(d));
  }
  j["days"] = std::move(days);
  return j;
}

inline DiffuseFilter filter_from_json(const json& j) {
  DiffuseFilter f;
  f.taps = detail::as_eigen(j.at("taps").get<std::vector<double>>());
  if (f.taps.size() < 1) throw ParseError("dictionary: empty taps");
  return f;
}

inline json hmm_to_json(const PartlyCloudyHmm& h) {
  json j;
  j["M"] = h.M;
  j["ell"] = h.ell;
  j["n_states"] = h.n_states;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < h.transition.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(h.transition.cols()));
    for (Eigen::Index c = 0; c < h.transition.cols(); ++c)
      row[static_cast<std::size_t>(c)] = h.transition(i, c);
    rows.push_back(std::move(row));
  }
  j["transition"] = rows;
  j["rates"] = {{"z", h.lambda_z}, {"a_b", h.lambda_ab}, {"a_e", h.lambda_ae}};
  j["epsilon_s"] = h.epsilon_s;
  return j;
}

inline PartlyCloudyHmm hmm_from_json(const json& j, const DiffuseFilter& filter) {
  int M = j.at("M").get<int>();
  int ell = j.at("ell").get<int>();
  auto rates = j.at("rates");
  PartlyCloudyHmm h = make_hmm(M, ell, filter, rates.at("z").get<double>(),
                               rates.at("a_b").get<double>(), rates.at("a_e").get<double>(),
                               j.at("epsilon_s").get<double>());
  if (j.at("n_states").get<int>() != h.n_states)
    throw ParseError("hmm: n_states does not match M and ell");
  auto rows = j.at("transition").get<std::vector<std::vector<double>>>();
  if (static_cast<int>(rows.size()) != h.n_states)
    throw ParseError("hmm: transition row count mismatch");
  for (int r = 0; r < h.n_states; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != h.n_states)
      throw ParseError("hmm: transition column count mismatch");
    for (int c = 0; c < h.n_states; ++c)
      h.transition(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return h;
}

inline json sigmas_to_json(double sigma_s, double sigma_oc) {
  return json{{"sigma_s", sigma_s}, {"sigma_oc", sigma_oc}};
}

inline json labels_to_json(const GroundTruth& truth) {
  json j;
  json blocks = json::array();
  for (const auto& b : truth.blocks) {
    blocks.push_back(json{{"day", b.day},
                          {"k_lo", b.k_lo},
                          {"k_hi", b.k_hi},
                          {"regime", regime_name(b.regime)},
                          {"alpha", b.alpha}});
  }
  j["blocks"] = std::move(blocks);
  j["states"] = truth.states;
  return j;
}

inline Regime regime_from_name(const std::string& s) {
  if (s == "sunny") return Regime::Sunny;
  if (s == "overcast") return Regime::Overcast;
  if (s == "partly_cloudy") return Regime::PartlyCloudy;
  throw ParseError("unknown regime name: " + s);
}

inline GroundTruth labels_from_json(const json& j) {
  GroundTruth t;
  for (const auto& b : j.at("blocks")) {
    TruthBlock tb;
    tb.day = b.at("day").get<int>();
    tb.k_lo = b.at("k_lo").get<int>();
    tb.k_hi = b.at("k_hi").get<int>();
    tb.regime = regime_from_name(b.at("regime").get<std::string>());
    tb.alpha = b.at("alpha").get<double>();
    t.blocks.push_back(tb);
  }
  t.states = j.at("states").get<std::vector<std::vector<int>>>();
  return t;
}

// --- forecast CSV + distribution sidecar ---------------------------------

namespace detail {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline const char* family_name(CdfFamily f) {
  switch (f) {
    case CdfFamily::Degenerate: return "degenerate";
    case CdfFamily::Gaussian: return "gaussian";
    case CdfFamily::TruncGaussian: return "trunc_gaussian";
    case CdfFamily::BandUniform: return "band_uniform";
    case CdfFamily::AttenExp: return "atten_exp";
    case CdfFamily::EdgeExp: return "edge_exp";
  }
  return "?";
}

inline CdfFamily family_from_name(const std::string& s) {
  if (s == "degenerate") return CdfFamily::Degenerate;
  if (s == "gaussian") return CdfFamily::Gaussian;
  if (s == "trunc_gaussian") return CdfFamily::TruncGaussian;
  if (s == "band_uniform") return CdfFamily::BandUniform;
  if (s == "atten_exp") return CdfFamily::AttenExp;
  if (s == "edge_exp") return CdfFamily::EdgeExp;
  throw ParseError("unknown cdf family: " + s);
}

inline json cdf_to_json(const PredictiveCdf& c) {
  json j;
  j["family"] = family_name(c.family);
  switch (c.family) {
    case CdfFamily::Degenerate:
      j["value"] = c.value;
      break;
    case CdfFamily::Gaussian:
      j["mu"] = c.mu;
      j["sigma"] = c.sigma;
      break;
    case CdfFamily::TruncGaussian:
      j["mu"] = c.mu;
      j["sigma"] = c.sigma;
      j["lo"] = c.lo;
      j["hi"] = c.hi;
      break;
    case CdfFamily::BandUniform:
      j["lo"] = c.lo;
      j["hi"] = c.hi;
      break;
    case CdfFamily::AttenExp:
    case CdfFamily::EdgeExp:
      j["s"] = c.s;
      j["rate"] = c.rate;
      break;
  }
  return j;
}

inline PredictiveCdf cdf_from_json(const json& j) {
  PredictiveCdf c;
  c.family = family_from_name(j.at("family").get<std::string>());
  switch (c.family) {
    case CdfFamily::Degenerate:
      c.value = j.at("value").get<double>();
      break;
    case CdfFamily::Gaussian:
      c.mu = j.at("mu").get<double>();
      c.sigma = j.at("sigma").get<double>();
      break;
    case CdfFamily::TruncGaussian:
      c.mu = j.at("mu").get<double>();
      c.sigma = j.at("sigma").get<double>();
      c.lo = j.at("lo").get<double>();
      c.hi = j.at("hi").get<double>();
      break;
    case CdfFamily::BandUniform:
      c.lo = j.at("lo").get<double>();
      c.hi = j.at("hi").get<double>();
      break;
    case CdfFamily::AttenExp:
    case CdfFamily::EdgeExp:
      c.s = j.at("s").get<double>();
      c.rate = j.at("rate").get<double>();
      break;
  }
  return c;
}

}  // namespace detail

// Rows the evaluator cannot use are not written: beyond-daylight steps carry
// no forecast content, and unavailable diurnal steps would be fabricated.
// The caller learns how many were withheld via the returned count.
struct ForecastCsvStats {
  long written = 0;
  long dark = 0;
  long unavailable = 0;
};

inline ForecastCsvStats write_forecast_csv(const std::string& path,
                                           const std::vector<ForecastRecord>& records,
                                           bool with_method_column,
                                           const std::string* dist_sidecar_path = nullptr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  std::ofstream side;
  if (dist_sidecar_path) {
    side.open(*dist_sidecar_path, std::ios::binary);
    if (!side) throw ParseError("cannot write " + *dist_sidecar_path);
  }
  ForecastCsvStats st;
  out << (with_method_column
              ? "method,day,k,k_tau,regime,point_w,lo90_w,hi90_w,lo50_w,hi50_w\n"
              : "day,k,k_tau,regime,point_w,lo90_w,hi90_w,lo50_w,hi50_w\n");
  for (const auto& r : records) {
    if (r.beyond_daylight) {
      st.dark++;
      continue;
    }
    if (!r.available) {
      st.unavailable++;
      continue;
    }
    if (with_method_column) out << method_name(r.method) << ',';
    out << r.day << ',' << r.k << ',' << r.k_tau << ',' << regime_name(r.regime) << ','
        << detail::format_value(r.point) << ',' << detail::format_value(r.i90.lo) << ','
        << detail::format_value(r.i90.hi) << ',' << detail::format_value(r.i50.lo) << ','
        << detail::format_value(r.i50.hi) << '\n';
    if (dist_sidecar_path) {
      json j = detail::cdf_to_json(r.cdf);
      j["day"] = r.day;
      j["k"] = r.k;
      j["k_tau"] = r.k_tau;
      if (with_method_column) j["method"] = method_name(r.method);
      side << j.dump() << '\n';
    }
    st.written++;
  }
  return st;
}

inline Method method_from_name(const std::string& s) {
  if (s == "proposed") return Method::Proposed;
  if (s == "diurnal") return Method::Diurnal;
  if (s == "smart_persistence") return Method::SmartPersistence;
  if (s == "ar") return Method::Ar;
  if (s == "switching_ar") return Method::SwitchingAr;
  throw ParseError("unknown method name: " + s);
}

inline std::vector<ForecastRecord> read_forecast_csv(const std::string& path,
                                                     const std::string* dist_sidecar_path =
                                                         nullptr) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  auto header = detail::split_csv_line(line);
  bool with_method = !header.empty() && header[0] == "method";
  std::size_t base = with_method ? 1 : 0;
  if (header.size() != base + 9)
    throw ParseError(path + ": unexpected column count", 1);

  std::ifstream side;
  if (dist_sidecar_path) {
    side.open(*dist_sidecar_path);
    if (!side) throw ParseError("cannot open " + *dist_sidecar_path);
  }

  std::vector<ForecastRecord> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    line_no++;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != base + 9) throw ParseError(path + ": bad column count", line_no);
    ForecastRecord r;
    if (with_method) r.method = method_from_name(f[0]);
    r.day = static_cast<int>(detail::parse_number(f[base + 0], line_no));
    r.k = static_cast<int>(detail::parse_number(f[base + 1], line_no));
    r.k_tau = static_cast<int>(detail::parse_number(f[base + 2], line_no));
    r.regime = regime_from_name(f[base + 3]);
    r.point = detail::parse_number(f[base + 4], line_no);
    r.i90.lo = detail::parse_number(f[base + 5], line_no);
    r.i90.hi = detail::parse_number(f[base + 6], line_no);
    r.i50.lo = detail::parse_number(f[base + 7], line_no);
    r.i50.hi = detail::parse_number(f[base + 8], line_no);
    if (dist_sidecar_path) {
      std::string jline;
      if (!std::getline(side, jline))
        throw ParseError(*dist_sidecar_path + ": fewer rows than the csv", line_no);
      json j = json::parse(jline, nullptr, false);
      if (j.is_discarded()) throw ParseError(*dist_sidecar_path + ": bad json line", line_no);
      if (j.at("day").get<int>() != r.day || j.at("k").get<int>() != r.k ||
          j.at("k_tau").get<int>() != r.k_tau)
        throw ParseError(*dist_sidecar_path + ": row misaligned with csv", line_no);
      r.cdf = detail::cdf_from_json(j);
    } else {
      r.cdf = PredictiveCdf::degenerate(r.point);
    }
    out.push_back(r);
  }
  return out;
}

// --- metric report --------------------------------------------------------

namespace detail {

inline json tail_map(const MetricsReport& rep, double nameplate, bool score) {
  json m = json::object();
  if (rep.horizon.empty()) return m;
  for (std::size_t bi = 0; bi < rep.horizon.front().tails.size(); ++bi) {
    std::vector<double> arr;
    for (const auto& hm : rep.horizon) {
      const TailStats& ts = hm.tails[bi];
      arr.push_back(score ? ts.score / nameplate : ts.reliability);
    }
    char key[16];
    std::snprintf(key, sizeof key, "%g", rep.horizon.front().tails[bi].btilde);
    m[key] = arr;
  }
  return m;
}

}  // namespace detail

// JSON summary per method: rmse, crps, and score entries are normalized by
// nameplate so reports from different plants are comparable.
inline json metrics_to_json(const std::map<Method, MetricsReport>& reports, double nameplate) {
  json j;
  j["nameplate_w"] = nameplate;
  json methods = json::object();
  for (const auto& [method, rep] : reports) {
    json m;
    std::vector<double> rmse_v, mape_v, crps_v, skill_v;
    for (const auto& hm : rep.horizon) {
      rmse_v.push_back(hm.rmse / nameplate);
      mape_v.push_back(hm.mape.value);
      crps_v.push_back(hm.crps / nameplate);
      skill_v.push_back(hm.skill);
    }
    m["rmse"] = rmse_v;
    m["mape"] = mape_v;
    m["crps"] = crps_v;
    m["skill"] = skill_v;
    m["reliability"] = detail::tail_map(rep, nameplate, false);
    m["score"] = detail::tail_map(rep, nameplate, true);
    m["dropped"] = {{"unavailable", rep.dropped_unavailable},
                    {"missing_actual", rep.dropped_missing_actual},
                    {"beyond_daylight", rep.dropped_dark}};
    methods[method_name(method)] = std::move(m);
  }
  j["methods"] = std::move(methods);
  return j;
}

// One CSV per horizon: report/k_tau_03.csv holds every method's metrics at
// three steps ahead.
inline void write_metric_csvs(const std::string& dir,
                              const std::map<Method, MetricsReport>& reports) {
  int max_tau = 0;
  for (const auto& [method, rep] : reports)
    max_tau = std::max(max_tau, static_cast<int>(rep.horizon.size()));
  for (int tau = 1; tau <= max_tau; ++tau) {
    char name[32];
    std::snprintf(name, sizeof name, "k_tau_%02d.csv", tau);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw ParseError("cannot write " + dir + "/" + name);
    out << "method,n,rmse_w,mape_pct,mape_excluded,crps_w,skill";
    bool header_tails = false;
    std::string tail_cols;
    for (const auto& [method, rep] : reports) {
      std::size_t idx = static_cast<std::size_t>(tau - 1);
      if (idx >= rep.horizon.size()) continue;
      const HorizonMetrics& hm = rep.horizon[idx];
      if (!header_tails) {
        for (const auto& ts : hm.tails) {
          char buf[64];
          std::snprintf(buf, sizeof buf, ",reliability_%g,score_%g", ts.btilde, ts.btilde);
          tail_cols += buf;
        }
        out << tail_cols << "\n";
        header_tails = true;
      }
      out << method_name(method) << ',' << hm.n << ',' << detail::format_value(hm.rmse) << ','
          << detail::format_value(hm.mape.value) << ',' << hm.mape.excluded << ','
          << detail::format_value(hm.crps) << ',' << detail::format_value(hm.skill);
      for (const auto& ts : hm.tails)
        out << ',' << detail::format_value(ts.reliability) << ','
            << detail::format_value(ts.score);
      out << '\n';
    }
    if (!header_tails) out << "\n";
  }
}

// --- decision log ---------------------------------------------------------

inline json decision_to_json(int day, int k1, int k2, const RegimeDecision& d) {
  return json{{"day", day},       {"k1", k1},
              {"k2", k2},         {"regime", regime_name(d.regime)},
              {"alpha", d.alpha_hat}, {"sse", d.sse}};
}

// --- scenario config ------------------------------------------------------

inline CivilDate date_from_string(const std::string& s) {
  return detail::parse_date(s, 0);
}

inline ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  cfg.n_days = j.at("n_days").get<int>();
  cfg.sample_period_min = j.value("sample_period_min", 15);
  cfg.nameplate = j.at("nameplate").get<double>();
  if (j.contains("start_date")) cfg.start_date = date_from_string(j["start_date"]);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.clearsky = clearsky_from_json(j.at("clearsky"));
  cfg.sigma_s = j.at("sigma_s").get<double>();
  cfg.sigma_oc = j.at("sigma_oc").get<double>();

  const json& h = j.at("hmm");
  DiffuseFilter filter;
  filter.taps = detail::as_eigen(h.at("taps").get<std::vector<double>>());
  cfg.hmm = make_hmm(h.at("M").get<int>(), h.value("ell", 1), filter,
                     h.value("lambda_z", 2.0), h.value("lambda_ab", 4.0),
                     h.value("lambda_ae", 8.0),
                     h.at("epsilon_s").get<double>());
  if (h.contains("transition")) {
    auto rows = h["transition"].get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != cfg.hmm.n_states)
      throw ParseError("scenario: transition row count mismatch");
    for (int r = 0; r < cfg.hmm.n_states; ++r) {
      if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != cfg.hmm.n_states)
        throw ParseError("scenario: transition column count mismatch");
      for (int c = 0; c < cfg.hmm.n_states; ++c)
        cfg.hmm.transition(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }

  for (const auto& day : j.at("pattern")) {
    DayPattern pat;
    for (const auto& b : day) {
      BlockSpec bs;
      bs.begin_frac = b.at("begin").get<double>();
      bs.end_frac = b.at("end").get<double>();
      bs.regime = regime_from_name(b.at("regime").get<std::string>());
      bs.alpha = b.value("alpha", 0.5);
      pat.push_back(bs);
    }
    cfg.pattern.push_back(std::move(pat));
  }
  return cfg;
}

}  // namespace pvregime
