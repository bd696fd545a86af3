#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "pvregime/clearsky.hpp"
#include "pvregime/detect.hpp"
#include "pvregime/distribution.hpp"
#include "pvregime/regimes.hpp"
#include "pvregime/timeseries.hpp"

namespace pvregime {

// Everything the rolling forecaster needs at inference time.
struct ForecastModels {
  ClearSkyModel clearsky;
  PartlyCloudyHmm hmm;
  double sigma_s = 0.0;
  double sigma_oc = 0.0;
  double nameplate = 0.0;
  double mu = 3.0;        // sunny threshold multiplier
  double mu_oc = 3.0;     // overcast threshold multiplier
  double alpha_max = 0.9;

  DetectThresholds thresholds() const {
    DetectThresholds th;
    th.sigma_s = sigma_s;
    th.sigma_oc = sigma_oc;
    th.mu = mu;
    th.mu_oc = mu_oc;
    th.alpha_max = alpha_max;
    return th;
  }
};

// Latent quantities read off the decoded window, reused across the horizon.
struct Reconstruction {
  double z_hat = 0.0;
  double ab_hat = 0.0;
  double ae_hat = 0.0;
  bool z_from_prior = false;   // no attenuation state visited in the window
  bool ab_from_prior = false;  // window showed no net attenuation
  bool ae_from_prior = false;  // window showed no net boost
};

struct ForecastStep {
  int k = 0;                    // absolute grid index of the target sample
  int k_tau = 0;                // steps ahead, 1-based
  double point = 0.0;
  PredictiveCdf cdf;
  int state = -1;               // predicted chain state, partly cloudy only
  bool beyond_daylight = false;
};

struct ForecastRun {
  RegimeDecision decision;
  Reconstruction recon;
  std::vector<ForecastStep> steps;
};

// Least-squares amplitude of the shared cloud event given the decoded
// single-lag states: each visited lag state k says s-w ~= taps[lag_k] * z.
inline Reconstruction reconstruct_latents(const PartlyCloudyHmm& hmm,
                                          const RegimeDecision& decision,
                                          const Eigen::VectorXd& w,
                                          const Eigen::VectorXd& s) {
  Reconstruction rec;
  double num = 0.0, den = 0.0;
  const auto& states = decision.state_path.states;
  for (std::size_t t = 0; t < states.size(); ++t) {
    int lag = hmm.single_lag(states[t]);
    if (lag < 0) continue;
    double tap = hmm.filter.taps[lag];
    num += tap * (s[static_cast<Eigen::Index>(t)] - w[static_cast<Eigen::Index>(t)]);
    den += tap * tap;
  }
  if (den > 0.0) {
    rec.z_hat = std::max(0.0, num / den);
  } else {
    rec.z_hat = 1.0 / hmm.lambda_z;  // prior mean of the event amplitude
    rec.z_from_prior = true;
  }
  if (decision.alpha_hat < 1.0) {
    rec.ab_hat = 1.0 - decision.alpha_hat;
  } else {
    rec.ab_hat = 1.0 / hmm.lambda_ab;
    rec.ab_from_prior = true;
  }
  if (decision.alpha_hat > 1.0) {
    rec.ae_hat = decision.alpha_hat - 1.0;
  } else {
    rec.ae_hat = 1.0 / hmm.lambda_ae;
    rec.ae_from_prior = true;
  }
  return rec;
}

namespace detail {

// Present in-window samples with positive clear-sky value, in grid order.
struct WindowData {
  Eigen::VectorXd w, s;
  bool usable = false;
};

inline WindowData collect_window(const PowerSeries& series, const ClearSkyModel& model,
                                 int day, int k1, int k2) {
  std::vector<double> wv, sv;
  for (int k = k1; k <= k2; ++k) {
    if (!series.has(day, k)) continue;
    double s = model.evaluate(k);
    if (s <= 0.0) continue;
    wv.push_back(series.value(day, k));
    sv.push_back(s);
  }
  WindowData wd;
  if (wv.size() < 2) return wd;
  wd.w = Eigen::Map<Eigen::VectorXd>(wv.data(), static_cast<Eigen::Index>(wv.size()));
  wd.s = Eigen::Map<Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
  wd.usable = true;
  return wd;
}

inline ForecastStep partly_cloudy_step(const ForecastModels& m, const Reconstruction& rec,
                                       int state, int k, int k_tau) {
  ForecastStep st;
  st.k = k;
  st.k_tau = k_tau;
  st.state = state;
  double s = m.clearsky.evaluate(k);
  if (k < m.clearsky.daylight_lo || k > m.clearsky.daylight_hi || s <= 0.0) {
    st.beyond_daylight = true;
    st.point = 0.0;
    st.cdf = PredictiveCdf::degenerate(0.0);
    return st;
  }
  const auto& hmm = m.hmm;
  auto clip = [&](double v) { return std::clamp(v, 0.0, m.nameplate); };
  if (state == 0) {
    st.point = s;
    st.cdf = PredictiveCdf::band_uniform(std::max(0.0, s - hmm.epsilon_s), s + hmm.epsilon_s);
  } else if (int lag = hmm.single_lag(state); lag >= 0) {
    double tap = std::max(hmm.filter.taps[lag],
                          1e-9 * std::max(1.0, hmm.filter.taps.maxCoeff()));
    st.point = clip(s - tap * rec.z_hat);
    st.cdf = PredictiveCdf::atten_exp(s, hmm.lambda_z / tap);
  } else if (state == hmm.ab_state()) {
    st.point = clip(s * (1.0 - rec.ab_hat));
    st.cdf = PredictiveCdf::atten_exp(s, hmm.lambda_ab / s);
  } else {  // edge boost
    st.point = clip(s * (1.0 + rec.ae_hat));
    st.cdf = PredictiveCdf::edge_exp(s, hmm.lambda_ae / s);
  }
  return st;
}

}  // namespace detail

// Classify the window [k_begin, k_end] (absolute indices, inclusive; w holds
// the present samples in order, s their clear-sky values) and forecast the
// next `horizon` samples k_end+1 .. k_end+horizon.
inline ForecastRun forecast_window(const ForecastModels& m, const Eigen::VectorXd& w,
                                   const Eigen::VectorXd& s, int k_end, int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast_window: horizon must be >= 1");
  ForecastRun run;
  run.decision = classify(w, s, m.thresholds(), &m.hmm);
  run.steps.reserve(static_cast<std::size_t>(horizon));

  if (run.decision.regime == Regime::PartlyCloudy) {
    run.recon = reconstruct_latents(m.hmm, run.decision, w, s);
    int last_state = run.decision.state_path.states.back();
    StatePath future = predict_states(m.hmm, last_state, horizon);
    for (int tau = 1; tau <= horizon; ++tau)
      run.steps.push_back(detail::partly_cloudy_step(
          m, run.recon, future.states[static_cast<std::size_t>(tau - 1)], k_end + tau, tau));
    return run;
  }

  for (int tau = 1; tau <= horizon; ++tau) {
    ForecastStep st;
    st.k = k_end + tau;
    st.k_tau = tau;
    double sk = m.clearsky.evaluate(st.k);
    if (st.k < m.clearsky.daylight_lo || st.k > m.clearsky.daylight_hi || sk <= 0.0) {
      st.beyond_daylight = true;
      st.point = 0.0;
      st.cdf = PredictiveCdf::degenerate(0.0);
    } else if (run.decision.regime == Regime::Sunny) {
      st.point = sk;
      st.cdf = PredictiveCdf::gaussian(sk, m.sigma_s);
    } else {
      st.point = run.decision.alpha_hat * sk;
      st.cdf = PredictiveCdf::trunc_gaussian(run.decision.alpha_hat * sk, m.sigma_oc, 0.0, sk);
    }
    run.steps.push_back(st);
  }
  return run;
}

enum class Method { Proposed, Diurnal, SmartPersistence, Ar, SwitchingAr };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::Diurnal: return "diurnal";
    case Method::SmartPersistence: return "smart_persistence";
    case Method::Ar: return "ar";
    case Method::SwitchingAr: return "switching_ar";
  }
  return "?";
}

// One emitted forecast, flat enough to serialize as a CSV row.
struct ForecastRecord {
  Method method = Method::Proposed;
  int day = 0;
  int k = 0;        // target grid index
  int k_tau = 0;
  Regime regime = Regime::Sunny;
  double point = 0.0;
  Interval i90;     // btilde = 0.1
  Interval i50;     // btilde = 0.5
  PredictiveCdf cdf;
  int state = -1;
  bool beyond_daylight = false;
  bool available = true;  // diurnal day-0 steps are emitted unavailable
};

struct RollingStats {
  int windows = 0;
  int skipped_days = 0;
  int skipped_windows = 0;
};

// One classified window of the rolling evaluation, for the decision log.
struct WindowDecision {
  int day = 0;
  int k1 = 0;
  int k2 = 0;
  RegimeDecision decision;
};

inline ForecastRecord make_record(Method method, int day, const ForecastStep& st,
                                  Regime regime) {
  ForecastRecord r;
  r.method = method;
  r.day = day;
  r.k = st.k;
  r.k_tau = st.k_tau;
  r.regime = regime;
  r.point = st.point;
  r.cdf = st.cdf;
  r.state = st.state;
  r.beyond_daylight = st.beyond_daylight;
  r.i90 = st.cdf.interval_containing(0.1, st.point);
  r.i50 = st.cdf.interval_containing(0.5, st.point);
  return r;
}

// Slide a window of chi_window samples across each day's daylight interval,
// forecasting chi steps after every position. Missing samples are dropped
// from the window; windows with fewer than two usable samples are skipped.
inline std::vector<ForecastRecord> rolling_evaluate(const PowerSeries& series,
                                                    const ForecastModels& m,
                                                    const std::vector<int>& days,
                                                    int chi_window = 4, int chi = 12,
                                                    int jobs = 1,
                                                    RollingStats* stats = nullptr,
                                                    std::vector<WindowDecision>* decisions =
                                                        nullptr) {
  if (chi_window < 2) throw std::invalid_argument("rolling_evaluate: chi_window must be >= 2");
  if (chi < 1) throw std::invalid_argument("rolling_evaluate: chi must be >= 1");
  int lo = m.clearsky.daylight_lo, hi = m.clearsky.daylight_hi;
  RollingStats local;
  std::vector<std::vector<ForecastRecord>> per_day(days.size());
  std::vector<std::vector<WindowDecision>> per_day_dec(days.size());
  std::vector<RollingStats> day_stats(days.size());

  parallel_for(days.size(), jobs, [&](std::size_t di) {
    int day = days[di];
    auto& out = per_day[di];
    auto& ds = day_stats[di];
    if (hi - lo + 1 < chi_window + chi) {
      ds.skipped_days++;
      return;
    }
    for (int k1 = lo; k1 + chi_window - 1 + chi <= hi; ++k1) {
      int k2 = k1 + chi_window - 1;
      detail::WindowData wd = detail::collect_window(series, m.clearsky, day, k1, k2);
      if (!wd.usable) {
        ds.skipped_windows++;
        continue;
      }
      ForecastRun run = forecast_window(m, wd.w, wd.s, k2, chi);
      ds.windows++;
      if (decisions) per_day_dec[di].push_back(WindowDecision{day, k1, k2, run.decision});
      for (const auto& st : run.steps)
        out.push_back(make_record(Method::Proposed, day, st, run.decision.regime));
    }
  });

  std::vector<ForecastRecord> all;
  for (std::size_t di = 0; di < days.size(); ++di) {
    all.insert(all.end(), per_day[di].begin(), per_day[di].end());
    if (decisions)
      decisions->insert(decisions->end(), per_day_dec[di].begin(), per_day_dec[di].end());
    local.windows += day_stats[di].windows;
    local.skipped_days += day_stats[di].skipped_days;
    local.skipped_windows += day_stats[di].skipped_windows;
  }
  if (stats) *stats = local;
  return all;
}

}  // namespace pvregime
