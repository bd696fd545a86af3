#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "pvregime/distribution.hpp"
#include "pvregime/forecast.hpp"
#include "pvregime/timeseries.hpp"

namespace pvregime {

inline double rmse(const std::vector<double>& forecast, const std::vector<double>& actual) {
  if (forecast.size() != actual.size()) throw ShapeError("rmse: length mismatch");
  if (forecast.empty()) return kNaN;
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    double e = forecast[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(forecast.size()));
}

struct MapeResult {
  double value = kNaN;
  int used = 0;
  int excluded = 0;
};

// Relative error is meaningless against near-zero power, so samples with
// actual below the floor are dropped and counted.
inline MapeResult mape(const std::vector<double>& forecast, const std::vector<double>& actual,
                       double floor) {
  if (forecast.size() != actual.size()) throw ShapeError("mape: length mismatch");
  MapeResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    if (std::abs(actual[i]) <= floor) {
      r.excluded++;
      continue;
    }
    sum += std::abs(forecast[i] - actual[i]) / std::abs(actual[i]);
    r.used++;
  }
  if (r.used > 0) r.value = 100.0 * sum / static_cast<double>(r.used);
  return r;
}

// CRPS(F, w) = integral of (F(y) - 1{y >= w})^2 dy. Closed form for the
// degenerate and Gaussian families; numeric elsewhere, with the regions
// outside the support handled exactly (integrand is 0 or 1 there) and the
// exponential tail integrated analytically.
inline double crps(const PredictiveCdf& f, double w, double tol = 1e-3) {
  switch (f.family) {
    case CdfFamily::Degenerate:
      return std::abs(f.value - w);
    case CdfFamily::Gaussian: {
      double z = (w - f.mu) / f.sigma;
      return f.sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) -
                        1.0 / std::sqrt(M_PI));
    }
    default:
      break;
  }
  double a = f.support_lo();
  double b = f.support_hi();
  double total = 0.0;
  if (w < a) total += a - w;
  if (f.family == CdfFamily::EdgeExp) {
    b = std::max(w, f.s) + 40.0 / f.rate;
    total += std::exp(-2.0 * f.rate * (b - f.s)) / (2.0 * f.rate);
  } else if (w > b) {
    total += w - b;
  }
  auto g = [&](double y) {
    double d = f.cdf(y) - (y >= w ? 1.0 : 0.0);
    return d * d;
  };
  double split = std::clamp(w, a, b);
  if (split > a) total += integrate(g, a, split, tol / 2.0);
  if (split < b) total += integrate(g, split, b, tol / 2.0);
  return total;
}

// Negatively oriented interval score: the width penalty -2*btilde*(hi-lo)
// everywhere, minus 4x the distance by which the actual escapes the
// interval. Higher is better; the maximum attainable value is 0.
inline double interval_score(double w, const Interval& iv, double btilde) {
  double score = -2.0 * btilde * (iv.hi - iv.lo);
  if (w < iv.lo) score -= 4.0 * (iv.lo - w);
  if (w > iv.hi) score -= 4.0 * (w - iv.hi);
  return score;
}

inline double forecast_skill(double rmse_method, double rmse_reference) {
  if (!(rmse_reference > 0.0)) return kNaN;
  return 1.0 - rmse_method / rmse_reference;
}

struct TailStats {
  double btilde = 0.0;
  double reliability = kNaN;   // empirical coverage
  double deviation = kNaN;     // coverage - (1 - btilde)
  double score = kNaN;         // mean interval score
};

struct HorizonMetrics {
  int k_tau = 0;
  int n = 0;
  double rmse = kNaN;
  MapeResult mape;
  double crps = kNaN;
  double skill = kNaN;  // vs smart persistence at the same horizon
  std::vector<TailStats> tails;
};

struct MetricsReport {
  Method method = Method::Proposed;
  std::vector<HorizonMetrics> horizon;  // index h -> k_tau = h+1
  double rmse_avg = kNaN, mape_avg = kNaN, crps_avg = kNaN, skill_avg = kNaN;
  std::vector<TailStats> tails_avg;
  int dropped_unavailable = 0;
  int dropped_missing_actual = 0;
  int dropped_dark = 0;
};

struct MetricsOptions {
  std::vector<double> btildes{0.1, 0.5};
  double mape_floor_frac = 1e-2;  // of nameplate
  double crps_tol = 1e-3;
  bool with_crps = true;
  int jobs = 1;  // parallelizes the CRPS quadrature only; results are identical
};

// Join records with actuals by (day, k) and aggregate per method and
// horizon. Beyond-daylight steps, unavailable rows, and rows whose actual
// sample is missing are dropped and counted.
inline std::map<Method, MetricsReport> compute_metrics(
    const std::vector<ForecastRecord>& records, const PowerSeries& actual,
    const MetricsOptions& opts = {}) {
  struct Bucket {
    std::vector<double> pred, obs;
    double crps_sum = 0.0;
    std::vector<int> hits;
    std::vector<double> score_sum;
  };
  std::map<Method, std::map<int, Bucket>> buckets;
  std::map<Method, MetricsReport> reports;
  double mape_floor = opts.mape_floor_frac * actual.nameplate();

  // The quadrature dominates the cost; precompute it day-parallel. Sums are
  // still accumulated in record order, so the result is independent of jobs.
  std::vector<double> crps_val;
  if (opts.with_crps) {
    crps_val.assign(records.size(), 0.0);
    parallel_for(records.size(), opts.jobs, [&](std::size_t i) {
      const ForecastRecord& r = records[i];
      if (r.beyond_daylight || !r.available || !actual.has(r.day, r.k)) return;
      crps_val[i] = crps(r.cdf, actual.value(r.day, r.k), opts.crps_tol);
    });
  }

  for (std::size_t ri = 0; ri < records.size(); ++ri) {
    const ForecastRecord& r = records[ri];
    auto& rep = reports[r.method];
    rep.method = r.method;
    if (r.beyond_daylight) {
      rep.dropped_dark++;
      continue;
    }
    if (!r.available) {
      rep.dropped_unavailable++;
      continue;
    }
    if (!actual.has(r.day, r.k)) {
      rep.dropped_missing_actual++;
      continue;
    }
    double w = actual.value(r.day, r.k);
    auto& b = buckets[r.method][r.k_tau];
    if (b.hits.empty()) {
      b.hits.assign(opts.btildes.size(), 0);
      b.score_sum.assign(opts.btildes.size(), 0.0);
    }
    b.pred.push_back(r.point);
    b.obs.push_back(w);
    if (opts.with_crps) b.crps_sum += crps_val[ri];
    const Interval* ivs[2] = {&r.i90, &r.i50};
    for (std::size_t bi = 0; bi < opts.btildes.size(); ++bi) {
      Interval iv = (bi < 2 && (opts.btildes[bi] == 0.1 || opts.btildes[bi] == 0.5))
                        ? (opts.btildes[bi] == 0.1 ? *ivs[0] : *ivs[1])
                        : r.cdf.interval_containing(opts.btildes[bi], r.point);
      if (w >= iv.lo && w <= iv.hi) b.hits[bi]++;
      b.score_sum[bi] += interval_score(w, iv, opts.btildes[bi]);
    }
  }

  for (auto& [method, per_tau] : buckets) {
    auto& rep = reports[method];
    int max_tau = per_tau.empty() ? 0 : per_tau.rbegin()->first;
    rep.horizon.resize(static_cast<std::size_t>(max_tau));
    for (int tau = 1; tau <= max_tau; ++tau) {
      auto& hm = rep.horizon[static_cast<std::size_t>(tau - 1)];
      hm.k_tau = tau;
      auto it = per_tau.find(tau);
      if (it == per_tau.end()) continue;
      Bucket& b = it->second;
      hm.n = static_cast<int>(b.obs.size());
      hm.rmse = rmse(b.pred, b.obs);
      hm.mape = mape(b.pred, b.obs, mape_floor);
      if (opts.with_crps && hm.n > 0) hm.crps = b.crps_sum / hm.n;
      for (std::size_t bi = 0; bi < opts.btildes.size(); ++bi) {
        TailStats ts;
        ts.btilde = opts.btildes[bi];
        if (hm.n > 0) {
          ts.reliability = static_cast<double>(b.hits[bi]) / hm.n;
          ts.deviation = ts.reliability - (1.0 - ts.btilde);
          ts.score = b.score_sum[bi] / hm.n;
        }
        hm.tails.push_back(ts);
      }
    }
  }

  // Skill against smart persistence at matching horizons.
  auto sp = reports.find(Method::SmartPersistence);
  for (auto& [method, rep] : reports) {
    double rmse_sum = 0.0, mape_sum = 0.0, crps_sum = 0.0, skill_sum = 0.0;
    int rn = 0, mn = 0, cn = 0, sn = 0;
    std::vector<TailStats> tails_avg;
    std::vector<int> tails_n;
    for (auto& hm : rep.horizon) {
      if (sp != reports.end() && !rep.horizon.empty()) {
        std::size_t idx = static_cast<std::size_t>(hm.k_tau - 1);
        if (idx < sp->second.horizon.size()) {
          double ref = sp->second.horizon[idx].rmse;
          if (std::isfinite(hm.rmse) && std::isfinite(ref))
            hm.skill = forecast_skill(hm.rmse, ref);
        }
      }
      if (std::isfinite(hm.rmse)) { rmse_sum += hm.rmse; rn++; }
      if (std::isfinite(hm.mape.value)) { mape_sum += hm.mape.value; mn++; }
      if (std::isfinite(hm.crps)) { crps_sum += hm.crps; cn++; }
      if (std::isfinite(hm.skill)) { skill_sum += hm.skill; sn++; }
      for (std::size_t bi = 0; bi < hm.tails.size(); ++bi) {
        if (tails_avg.size() <= bi) {
          TailStats t;
          t.btilde = hm.tails[bi].btilde;
          t.reliability = 0.0;
          t.deviation = 0.0;
          t.score = 0.0;
          tails_avg.push_back(t);
          tails_n.push_back(0);
        }
        if (std::isfinite(hm.tails[bi].reliability)) {
          tails_avg[bi].reliability += hm.tails[bi].reliability;
          tails_avg[bi].deviation += hm.tails[bi].deviation;
          tails_avg[bi].score += hm.tails[bi].score;
          tails_n[bi]++;
        }
      }
    }
    if (rn) rep.rmse_avg = rmse_sum / rn;
    if (mn) rep.mape_avg = mape_sum / mn;
    if (cn) rep.crps_avg = crps_sum / cn;
    if (sn) rep.skill_avg = skill_sum / sn;
    for (std::size_t bi = 0; bi < tails_avg.size(); ++bi) {
      if (tails_n[bi]) {
        tails_avg[bi].reliability /= tails_n[bi];
        tails_avg[bi].deviation /= tails_n[bi];
        tails_avg[bi].score /= tails_n[bi];
      } else {
        tails_avg[bi].reliability = kNaN;
        tails_avg[bi].deviation = kNaN;
        tails_avg[bi].score = kNaN;
      }
    }
    rep.tails_avg = tails_avg;
  }
  return reports;
}

struct ProfileBin {
  int k = 0;
  int n = 0;
  double rmse = kNaN;
};

// Per-sample-of-day RMSE for one method, across all horizons.
inline std::vector<ProfileBin> diurnal_profile(const std::vector<ForecastRecord>& records,
                                               const PowerSeries& actual, Method method) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (r.method != method || r.beyond_daylight || !r.available) continue;
    if (!actual.has(r.day, r.k)) continue;
    double e = r.point - actual.value(r.day, r.k);
    auto& a = acc[r.k];
    a.first += e * e;
    a.second++;
  }
  std::vector<ProfileBin> out;
  for (const auto& [k, se] : acc) {
    ProfileBin b;
    b.k = k;
    b.n = se.second;
    b.rmse = std::sqrt(se.first / se.second);
    out.push_back(b);
  }
  return out;
}

}  // namespace pvregime
