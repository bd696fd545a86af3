#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "pvregime/errors.hpp"
#include "pvregime/forecast.hpp"

namespace pvregime {

// Autoregression on the stochastic component x = w - s.
struct ArModel {
  int order = 0;
  Eigen::VectorXd coeffs;   // a_1 .. a_p, most recent lag first
  double noise_var = 0.0;
  bool ridge_applied = false;
};

struct ArStep {
  double mean = 0.0;
  double sd = 0.0;
};

namespace detail {

struct ArRow {
  double y;
  Eigen::VectorXd lags;
};

inline ArModel fit_ar_rows(const std::vector<ArRow>& rows, int order) {
  Eigen::Index p = order;
  Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
  for (const auto& r : rows) {
    g.noalias() += r.lags * r.lags.transpose();
    c.noalias() += r.lags * r.y;
  }
  ArModel m;
  m.order = order;
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() == Eigen::Success) {
    m.coeffs = llt.solve(c);
  }
  if (llt.info() != Eigen::Success || !m.coeffs.allFinite()) {
    double lambda = 1e-6 * std::max(g.trace() / static_cast<double>(p), 1e-30);
    m.coeffs = (g + lambda * Eigen::MatrixXd::Identity(p, p)).ldlt().solve(c);
    m.ridge_applied = true;
  }
  double sse = 0.0;
  for (const auto& r : rows) {
    double e = r.y - m.coeffs.dot(r.lags);
    sse += e * e;
  }
  m.noise_var = sse / static_cast<double>(n);
  return m;
}

}  // namespace detail

inline ArModel fit_ar(const std::vector<double>& x, int order) {
  if (order < 1) throw std::invalid_argument("fit_ar: order must be >= 1");
  Eigen::Index n = static_cast<Eigen::Index>(x.size());
  if (n < 10 * order)
    throw FitError("fit_ar: need at least 10*order samples");
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale <= 0.0) throw FitError("fit_ar: input has no variation");
  std::vector<detail::ArRow> rows;
  rows.reserve(static_cast<std::size_t>(n - order));
  for (Eigen::Index t = order; t < n; ++t) {
    detail::ArRow r;
    r.y = x[static_cast<std::size_t>(t)];
    r.lags.resize(order);
    for (int i = 1; i <= order; ++i)
      r.lags[i - 1] = x[static_cast<std::size_t>(t - i)];
    rows.push_back(std::move(r));
  }
  return detail::fit_ar_rows(rows, order);
}

// Iterated multi-step prediction. recent holds the latest observed x values,
// recent.back() being the newest; shorter histories are padded with the
// process mean (zero). Variance accumulates the MA expansion of the fitted
// recursion: psi_0 = 1, psi_j = sum_i a_i psi_{j-i}.
inline std::vector<ArStep> ar_forecast(const ArModel& m, const std::vector<double>& recent,
                                       int horizon) {
  if (horizon < 1) throw std::invalid_argument("ar_forecast: horizon must be >= 1");
  if (m.order < 1) throw std::invalid_argument("ar_forecast: model is empty");
  std::vector<double> hist(static_cast<std::size_t>(m.order), 0.0);
  std::size_t take = std::min(recent.size(), static_cast<std::size_t>(m.order));
  for (std::size_t i = 0; i < take; ++i)
    hist[hist.size() - 1 - i] = recent[recent.size() - 1 - i];

  std::vector<double> psi{1.0};
  psi.reserve(static_cast<std::size_t>(horizon));
  for (int j = 1; j < horizon; ++j) {
    double v = 0.0;
    for (int i = 1; i <= std::min(j, m.order); ++i)
      v += m.coeffs[i - 1] * psi[static_cast<std::size_t>(j - i)];
    psi.push_back(v);
  }

  std::vector<ArStep> out;
  out.reserve(static_cast<std::size_t>(horizon));
  double var = 0.0;
  for (int tau = 1; tau <= horizon; ++tau) {
    double mean = 0.0;
    for (int i = 1; i <= m.order; ++i)
      mean += m.coeffs[i - 1] * hist[hist.size() - static_cast<std::size_t>(i)];
    hist.push_back(mean);
    double w = psi[static_cast<std::size_t>(tau - 1)];
    var += m.noise_var * w * w;
    out.push_back(ArStep{mean, std::sqrt(std::max(var, 0.0))});
  }
  return out;
}

// Per-regime coefficient sets. Regimes too thin to fit fall back to the
// pooled model.
struct SwitchingArModel {
  ArModel pooled;
  ArModel per_regime[3];
  bool fell_back[3] = {false, false, false};

  const ArModel& for_regime(Regime r) const { return per_regime[static_cast<int>(r)]; }
};

// labels[t] tags x[t]; a regression row enters a regime's fit only when the
// target and all its lags share that label, so rows never straddle a switch.
inline SwitchingArModel fit_switching_ar(const std::vector<double>& x,
                                         const std::vector<Regime>& labels, int order) {
  if (x.size() != labels.size())
    throw ShapeError("fit_switching_ar: labels length mismatch");
  SwitchingArModel sw;
  sw.pooled = fit_ar(x, order);
  std::vector<detail::ArRow> rows[3];
  for (std::size_t t = static_cast<std::size_t>(order); t < x.size(); ++t) {
    Regime r = labels[t];
    bool uniform = true;
    for (int i = 1; i <= order && uniform; ++i)
      uniform = labels[t - static_cast<std::size_t>(i)] == r;
    if (!uniform) continue;
    detail::ArRow row;
    row.y = x[t];
    row.lags.resize(order);
    for (int i = 1; i <= order; ++i)
      row.lags[i - 1] = x[t - static_cast<std::size_t>(i)];
    rows[static_cast<int>(r)].push_back(std::move(row));
  }
  for (int r = 0; r < 3; ++r) {
    if (rows[r].size() >= static_cast<std::size_t>(10 * order)) {
      sw.per_regime[r] = detail::fit_ar_rows(rows[r], order);
    } else {
      sw.per_regime[r] = sw.pooled;
      sw.fell_back[r] = true;
    }
  }
  return sw;
}

struct BaselineModels {
  const ArModel* ar = nullptr;
  const SwitchingArModel* swar = nullptr;
};

namespace detail {

inline ForecastRecord degenerate_record(Method method, int day, int k, int k_tau,
                                        Regime regime, double point) {
  ForecastStep st;
  st.k = k;
  st.k_tau = k_tau;
  st.point = point;
  st.cdf = PredictiveCdf::degenerate(point);
  return make_record(method, day, st, regime);
}

inline ForecastRecord gaussian_record(Method method, int day, int k, int k_tau,
                                      Regime regime, double point, double mu, double sd,
                                      double nameplate) {
  ForecastStep st;
  st.k = k;
  st.k_tau = k_tau;
  st.point = std::clamp(point, 0.0, nameplate);
  st.cdf = PredictiveCdf::gaussian(mu, sd);
  return make_record(method, day, st, regime);
}

inline ForecastStep beyond_daylight_step(int k, int k_tau) {
  ForecastStep st;
  st.k = k;
  st.k_tau = k_tau;
  st.beyond_daylight = true;
  st.point = 0.0;
  st.cdf = PredictiveCdf::degenerate(0.0);
  return st;
}

}  // namespace detail

// Reference forecasters sharing the rolling windows of rolling_evaluate.
// Diurnal: yesterday's sample. Smart persistence: last clear-sky index
// carried forward, spread from the window's index variance. AR and switching
// AR: linear recursion on w - s; the switching variant picks coefficients by
// the window's detected regime.
inline std::vector<ForecastRecord> rolling_baselines(const PowerSeries& series,
                                                     const ForecastModels& m,
                                                     const BaselineModels& bm,
                                                     const std::vector<int>& days,
                                                     int chi_window = 4, int chi = 12,
                                                     int jobs = 1,
                                                     RollingStats* stats = nullptr) {
  if (chi_window < 2) throw std::invalid_argument("rolling_baselines: chi_window must be >= 2");
  if (chi < 1) throw std::invalid_argument("rolling_baselines: chi must be >= 1");
  int lo = m.clearsky.daylight_lo, hi = m.clearsky.daylight_hi;
  double var_floor = std::pow(1e-3 * m.nameplate, 2);
  std::vector<std::vector<ForecastRecord>> per_day(days.size());
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
      ds.windows++;
      Regime regime = classify(wd.w, wd.s, m.thresholds(), nullptr).regime;

      double ratio = wd.w[wd.w.size() - 1] / wd.s[wd.s.size() - 1];
      Eigen::VectorXd ratios = wd.w.array() / wd.s.array();
      double rmean = ratios.mean();
      double rvar = (ratios.array() - rmean).square().sum() /
                    static_cast<double>(ratios.size());

      std::vector<double> xw(static_cast<std::size_t>(wd.w.size()));
      for (Eigen::Index i = 0; i < wd.w.size(); ++i)
        xw[static_cast<std::size_t>(i)] = wd.w[i] - wd.s[i];
      std::vector<ArStep> ar_steps, swar_steps;
      if (bm.ar) ar_steps = ar_forecast(*bm.ar, xw, chi);
      if (bm.swar) swar_steps = ar_forecast(bm.swar->for_regime(regime), xw, chi);

      for (int tau = 1; tau <= chi; ++tau) {
        int k = k2 + tau;
        double sk = m.clearsky.evaluate(k);
        bool dark = k < lo || k > hi || sk <= 0.0;
        if (dark) {
          auto st = detail::beyond_daylight_step(k, tau);
          out.push_back(make_record(Method::Diurnal, day, st, regime));
          out.push_back(make_record(Method::SmartPersistence, day, st, regime));
          if (bm.ar) out.push_back(make_record(Method::Ar, day, st, regime));
          if (bm.swar) out.push_back(make_record(Method::SwitchingAr, day, st, regime));
          continue;
        }

        ForecastRecord diurnal = detail::degenerate_record(
            Method::Diurnal, day, k, tau, regime,
            day > 0 && series.has(day - 1, k) ? series.value(day - 1, k) : 0.0);
        if (day == 0 || !series.has(day - 1, k)) diurnal.available = false;
        out.push_back(diurnal);

        double sp_sd = std::sqrt(std::max(rvar * sk * sk, var_floor));
        out.push_back(detail::gaussian_record(Method::SmartPersistence, day, k, tau, regime,
                                              ratio * sk, ratio * sk, sp_sd, m.nameplate));

        if (bm.ar) {
          const ArStep& st = ar_steps[static_cast<std::size_t>(tau - 1)];
          out.push_back(detail::gaussian_record(Method::Ar, day, k, tau, regime, sk + st.mean,
                                                sk + st.mean,
                                                std::sqrt(std::max(st.sd * st.sd, var_floor)),
                                                m.nameplate));
        }
        if (bm.swar) {
          const ArStep& st = swar_steps[static_cast<std::size_t>(tau - 1)];
          out.push_back(detail::gaussian_record(Method::SwitchingAr, day, k, tau, regime,
                                                sk + st.mean, sk + st.mean,
                                                std::sqrt(std::max(st.sd * st.sd, var_floor)),
                                                m.nameplate));
        }
      }
    }
  });

  std::vector<ForecastRecord> all;
  RollingStats local;
  for (std::size_t di = 0; di < days.size(); ++di) {
    all.insert(all.end(), per_day[di].begin(), per_day[di].end());
    local.windows += day_stats[di].windows;
    local.skipped_days += day_stats[di].skipped_days;
    local.skipped_windows += day_stats[di].skipped_windows;
  }
  if (stats) *stats = local;
  return all;
}

}  // namespace pvregime
