#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pvregime/baselines.hpp"
#include "pvregime/detect.hpp"
#include "pvregime/forecast.hpp"
#include "pvregime/regimes.hpp"

namespace pvregime {

namespace detail {

// Present daylight samples of one day, kept on the grid so contiguity is
// still visible (needed by the AR row builder).
struct DaySamples {
  int day = 0;
  int lo = 0;                   // grid index of position 0
  std::vector<char> present;
  std::vector<double> w, s;     // defined where present

  int size() const { return static_cast<int>(present.size()); }
};

inline DaySamples collect_day(const PowerSeries& series, const ClearSkyModel& cs, int day) {
  DaySamples d;
  d.day = day;
  d.lo = cs.daylight_lo;
  int len = cs.daylight_hi - cs.daylight_lo + 1;
  d.present.assign(static_cast<std::size_t>(len), 0);
  d.w.assign(static_cast<std::size_t>(len), 0.0);
  d.s.assign(static_cast<std::size_t>(len), 0.0);
  for (int k = cs.daylight_lo; k <= cs.daylight_hi; ++k) {
    double sv = cs.evaluate(k);
    if (sv <= 0.0 || !series.has(day, k)) continue;
    std::size_t i = static_cast<std::size_t>(k - cs.daylight_lo);
    d.present[i] = 1;
    d.w[i] = series.value(day, k);
    d.s[i] = sv;
  }
  return d;
}

}  // namespace detail

// Noise scales estimated before any regime labels exist. Days are ranked by
// how well the clear-sky pattern alone explains them: the best decile is
// treated as sunny and pools w - s residuals. Days that a single attenuation
// index explains far better than the raw pattern pool w - alpha*s residuals
// for the overcast scale. When no day looks overcast the scale falls back to
// twice the sunny one, flagged.
struct SigmaBootstrap {
  double sigma_s = 0.0;
  double sigma_oc = 0.0;
  std::vector<int> sunny_days;
  std::vector<int> overcast_days;
  bool overcast_fallback = false;
};

inline SigmaBootstrap bootstrap_sigmas(const PowerSeries& series, const ClearSkyModel& cs,
                                       const std::vector<int>& days, double nameplate,
                                       double alpha_max = 0.9) {
  struct DayFit {
    int day;
    double r_plain;
    double r_alpha;
    double alpha;
    std::vector<double> res_plain, res_alpha;
  };
  std::vector<DayFit> fits;
  for (int day : days) {
    detail::DaySamples d = detail::collect_day(series, cs, day);
    DayFit f;
    f.day = day;
    double sws = 0.0, ss2 = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      if (!d.present[static_cast<std::size_t>(i)]) continue;
      double w = d.w[static_cast<std::size_t>(i)], s = d.s[static_cast<std::size_t>(i)];
      sws += w * s;
      ss2 += s * s;
    }
    if (ss2 <= 0.0) continue;
    f.alpha = std::max(0.0, sws / ss2);
    for (int i = 0; i < d.size(); ++i) {
      if (!d.present[static_cast<std::size_t>(i)]) continue;
      double w = d.w[static_cast<std::size_t>(i)], s = d.s[static_cast<std::size_t>(i)];
      f.res_plain.push_back(w - s);
      f.res_alpha.push_back(w - f.alpha * s);
    }
    if (f.res_plain.size() < 8) continue;
    auto rms = [](const std::vector<double>& v) {
      double ss = 0.0;
      for (double x : v) ss += x * x;
      return std::sqrt(ss / static_cast<double>(v.size()));
    };
    f.r_plain = rms(f.res_plain);
    f.r_alpha = rms(f.res_alpha);
    fits.push_back(std::move(f));
  }
  if (fits.empty())
    throw FitError("bootstrap_sigmas: no day has enough daylight samples");

  SigmaBootstrap out;
  std::vector<const DayFit*> by_plain;
  for (const auto& f : fits) by_plain.push_back(&f);
  std::sort(by_plain.begin(), by_plain.end(),
            [](const DayFit* a, const DayFit* b) { return a->r_plain < b->r_plain; });
  std::vector<double> sunny_pool;
  std::size_t want = std::max<std::size_t>(1, by_plain.size() / 10);
  for (std::size_t i = 0; i < by_plain.size() && (i < want || sunny_pool.size() < 10); ++i) {
    out.sunny_days.push_back(by_plain[i]->day);
    sunny_pool.insert(sunny_pool.end(), by_plain[i]->res_plain.begin(),
                      by_plain[i]->res_plain.end());
  }

  std::vector<const DayFit*> candidates;
  for (const auto& f : fits)
    if (f.alpha >= 0.05 && f.alpha <= alpha_max && f.r_alpha <= 0.5 * f.r_plain)
      candidates.push_back(&f);
  std::sort(candidates.begin(), candidates.end(),
            [](const DayFit* a, const DayFit* b) { return a->r_alpha < b->r_alpha; });
  std::vector<double> overcast_pool;
  std::size_t keep = (candidates.size() + 1) / 2;
  for (std::size_t i = 0; i < candidates.size() && (i < keep || overcast_pool.size() < 10);
       ++i) {
    out.overcast_days.push_back(candidates[i]->day);
    overcast_pool.insert(overcast_pool.end(), candidates[i]->res_alpha.begin(),
                         candidates[i]->res_alpha.end());
  }

  if (overcast_pool.size() >= 10) {
    auto [ss, soc] = estimate_sigmas(sunny_pool, overcast_pool, nameplate);
    out.sigma_s = ss;
    out.sigma_oc = soc;
  } else {
    out.sigma_s = estimate_sigmas(sunny_pool, sunny_pool, nameplate).first;
    out.sigma_oc = 2.0 * out.sigma_s;
    out.overcast_fallback = true;
    out.overcast_days.clear();
  }
  return out;
}

// Classified fixed-length windows for HMM training. stride defaults to the
// window length so transition counts are not double-counted by overlap.
struct TrainingWindows {
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> partly_cloudy;
  int total = 0;
  int skipped = 0;
  int sunny = 0;
  int overcast = 0;
};

inline TrainingWindows collect_pc_windows(const PowerSeries& series, const ClearSkyModel& cs,
                                          const DetectThresholds& th,
                                          const PartlyCloudyHmm& hmm,
                                          const std::vector<int>& days, int chi_window = 4,
                                          int stride = 0) {
  if (chi_window < 2)
    throw std::invalid_argument("collect_pc_windows: chi_window must be >= 2");
  if (stride <= 0) stride = chi_window;
  TrainingWindows out;
  for (int day : days) {
    for (int k1 = cs.daylight_lo; k1 + chi_window - 1 <= cs.daylight_hi; k1 += stride) {
      detail::WindowData wd =
          detail::collect_window(series, cs, day, k1, k1 + chi_window - 1);
      if (!wd.usable) {
        out.skipped++;
        continue;
      }
      out.total++;
      RegimeDecision dec = classify(wd.w, wd.s, th, &hmm);
      switch (dec.regime) {
        case Regime::Sunny: out.sunny++; break;
        case Regime::Overcast: out.overcast++; break;
        case Regime::PartlyCloudy:
          out.partly_cloudy.emplace_back(wd.w, wd.s);
          break;
      }
    }
  }
  return out;
}

// AR and switching-AR baselines fitted on the stochastic component of the
// given days. Regression rows use only grid-contiguous present samples within
// one day, so rows never straddle a gap or a midnight. Labels come from
// non-overlapping classified windows; rows touching unlabeled samples count
// for the pooled fit only, mirroring the uniform-label rule of
// fit_switching_ar.
struct FittedBaselines {
  ArModel ar;
  SwitchingArModel swar;
  int rows_total = 0;
  int rows_labeled[3] = {0, 0, 0};
};

inline FittedBaselines fit_baselines(const PowerSeries& series, const ClearSkyModel& cs,
                                     const DetectThresholds& th, const PartlyCloudyHmm* hmm,
                                     const std::vector<int>& days, int order = 4,
                                     int chi_window = 4) {
  if (order < 1) throw std::invalid_argument("fit_baselines: order must be >= 1");
  std::vector<detail::ArRow> pooled;
  std::vector<detail::ArRow> by_regime[3];

  for (int day : days) {
    detail::DaySamples d = detail::collect_day(series, cs, day);
    std::vector<int> label(static_cast<std::size_t>(d.size()), -1);
    for (int k1 = cs.daylight_lo; k1 + chi_window - 1 <= cs.daylight_hi; k1 += chi_window) {
      detail::WindowData wd =
          detail::collect_window(series, cs, day, k1, k1 + chi_window - 1);
      if (!wd.usable) continue;
      RegimeDecision dec = classify(wd.w, wd.s, th, hmm);
      for (int k = k1; k <= k1 + chi_window - 1; ++k)
        label[static_cast<std::size_t>(k - cs.daylight_lo)] = static_cast<int>(dec.regime);
    }

    for (int t = order; t < d.size(); ++t) {
      bool ok = true;
      for (int i = 0; i <= order && ok; ++i)
        ok = d.present[static_cast<std::size_t>(t - i)] != 0;
      if (!ok) continue;
      detail::ArRow row;
      row.y = d.w[static_cast<std::size_t>(t)] - d.s[static_cast<std::size_t>(t)];
      row.lags.resize(order);
      for (int i = 1; i <= order; ++i)
        row.lags[i - 1] = d.w[static_cast<std::size_t>(t - i)] -
                          d.s[static_cast<std::size_t>(t - i)];
      int lab = label[static_cast<std::size_t>(t)];
      bool uniform = lab >= 0;
      for (int i = 1; i <= order && uniform; ++i)
        uniform = label[static_cast<std::size_t>(t - i)] == lab;
      pooled.push_back(row);
      if (uniform) by_regime[lab].push_back(std::move(row));
    }
  }

  if (pooled.size() < static_cast<std::size_t>(10 * order))
    throw FitError("fit_baselines: need at least 10*order regression rows");
  double scale = 0.0;
  for (const auto& r : pooled) scale = std::max(scale, std::abs(r.y));
  if (scale <= 0.0) throw FitError("fit_baselines: stochastic component has no variation");

  FittedBaselines out;
  out.rows_total = static_cast<int>(pooled.size());
  out.ar = detail::fit_ar_rows(pooled, order);
  out.swar.pooled = out.ar;
  for (int r = 0; r < 3; ++r) {
    out.rows_labeled[r] = static_cast<int>(by_regime[r].size());
    if (by_regime[r].size() >= static_cast<std::size_t>(10 * order)) {
      out.swar.per_regime[r] = detail::fit_ar_rows(by_regime[r], order);
    } else {
      out.swar.per_regime[r] = out.ar;
      out.swar.fell_back[r] = true;
    }
  }
  return out;
}

}  // namespace pvregime
