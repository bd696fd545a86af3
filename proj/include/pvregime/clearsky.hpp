#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "pvregime/errors.hpp"
#include "pvregime/nnls.hpp"
#include "pvregime/timeseries.hpp"

namespace pvregime {

// Deterministic sunny-day pattern: three C0-joined cubic Bernstein segments
// over the daylight interval, joined at two control points. Ten weights total
// because adjacent segments share their endpoint weight (q = 3, 6).
struct ClearSkyModel {
  std::array<double, 10> coefficients{};
  int k1 = 0;
  int k2 = 0;
  int day_begin = 0;
  int day_end = 0;  // half-open [day_begin, day_end)
  int daylight_lo = 0;
  int daylight_hi = 0;  // inclusive
  bool control_points_defaulted = false;

  double evaluate(int k) const;
};

// Cubic Bernstein polynomial B_{j,3}(t).
inline double bernstein3(int j, double t) {
  double u = 1.0 - t;
  switch (j) {
    case 0: return u * u * u;
    case 1: return 3.0 * t * u * u;
    case 2: return 3.0 * t * t * u;
    case 3: return t * t * t;
    default: throw std::domain_error("bernstein3: j must be 0..3");
  }
}

namespace detail {

// Segment of sample k among the three spline pieces, or -1 outside daylight.
inline int spline_segment(int k, int k1, int k2, int lo, int hi) {
  if (k < lo || k > hi) return -1;
  if (k < k1) return 0;
  if (k < k2) return 1;
  return 2;
}

// Affine map of k into the segment's unit interval; the last piece divides by
// (hi+1-k2) so t stays in [0,1) at the final daylight sample.
inline double spline_t(int seg, int k, int k1, int k2, int lo, int hi) {
  switch (seg) {
    case 0: return static_cast<double>(k - lo) / (k1 - lo);
    case 1: return static_cast<double>(k - k1) / (k2 - k1);
    default: return static_cast<double>(k - k2) / (hi + 1 - k2);
  }
}

}  // namespace detail

// b_q(k): the q-th basis function (q = 3i + j) evaluated at sample k. Zero
// outside the segment that owns q and outside daylight.
inline double bernstein_basis(int q, int k, int k1, int k2, int lo, int hi) {
  if (q < 0 || q > 9) throw std::domain_error("bernstein_basis: q must be 0..9");
  int seg = detail::spline_segment(k, k1, k2, lo, hi);
  if (seg < 0) return 0.0;
  int j = q - 3 * seg;
  if (j < 0 || j > 3) return 0.0;
  return bernstein3(j, detail::spline_t(seg, k, k1, k2, lo, hi));
}

inline double ClearSkyModel::evaluate(int k) const {
  int seg = detail::spline_segment(k, k1, k2, daylight_lo, daylight_hi);
  if (seg < 0) return 0.0;
  double t = detail::spline_t(seg, k, k1, k2, daylight_lo, daylight_hi);
  double acc = 0.0;
  for (int j = 0; j <= 3; ++j) acc += coefficients[static_cast<size_t>(3 * seg + j)] * bernstein3(j, t);
  return acc;
}

struct ControlPointResult {
  int k1 = 0;
  int k2 = 0;
  bool defaulted = false;
};

namespace detail {

inline ControlPointResult tercile_control_points(int lo, int hi, int min_seg) {
  int len = hi - lo + 1;
  int k1 = lo + len / 3, k2 = lo + (2 * len) / 3;
  k1 = std::max(k1, lo + min_seg);
  k2 = std::max(k2, k1 + min_seg);
  k2 = std::min(k2, hi - min_seg + 1);
  if (k2 - k1 < min_seg || k1 - lo < min_seg)
    throw FitError("daylight interval too short for three spline segments");
  return ControlPointResult{k1, k2, true};
}

}  // namespace detail

// Locates the two first/second-derivative kinks as the strongest outliers of
// the second difference against its local linear trend. Cubic pieces make
// that statistic exactly zero away from the joins, so the two spikes are the
// control points; when nothing clears the noise floor we fall back to the
// daylight terciles and flag it.
inline ControlPointResult detect_control_points(const PowerSeries& series, int day,
                                                int lo, int hi, int min_seg = 4) {
  int len = hi - lo + 1;
  if (len < 3 * min_seg)
    throw FitError("daylight interval too short for three spline segments");

  // Missing samples are bridged linearly for the detector only.
  std::vector<double> v(static_cast<size_t>(len), kNaN);
  for (int k = lo; k <= hi; ++k)
    if (series.has(day, k)) v[static_cast<size_t>(k - lo)] = series.value(day, k);
  int prev = -1;
  for (int i = 0; i < len; ++i) {
    if (std::isnan(v[static_cast<size_t>(i)])) continue;
    if (prev >= 0 && i - prev > 1) {
      for (int j = prev + 1; j < i; ++j) {
        double f = static_cast<double>(j - prev) / (i - prev);
        v[static_cast<size_t>(j)] =
            (1 - f) * v[static_cast<size_t>(prev)] + f * v[static_cast<size_t>(i)];
      }
    }
    prev = i;
  }
  for (auto& x : v)
    if (std::isnan(x)) x = 0.0;

  std::vector<double> d2(static_cast<size_t>(len), 0.0);
  for (int i = 1; i + 1 < len; ++i)
    d2[static_cast<size_t>(i)] = v[static_cast<size_t>(i + 1)] - 2 * v[static_cast<size_t>(i)] +
                                 v[static_cast<size_t>(i - 1)];
  std::vector<double> score(static_cast<size_t>(len), 0.0);
  double peak = 0.0;
  for (auto x : v) peak = std::max(peak, std::abs(x));
  for (int i = 2; i + 2 < len; ++i)
    score[static_cast<size_t>(i)] =
        std::abs(d2[static_cast<size_t>(i)] -
                 0.5 * (d2[static_cast<size_t>(i - 1)] + d2[static_cast<size_t>(i + 1)]));

  std::vector<double> sorted(score.begin() + 2, score.end() - 2);
  if (sorted.empty()) return detail::tercile_control_points(lo, hi, min_seg);
  std::sort(sorted.begin(), sorted.end());
  double med = sorted[sorted.size() / 2];
  std::vector<double> dev;
  dev.reserve(sorted.size());
  for (auto x : sorted) dev.push_back(std::abs(x - med));
  std::sort(dev.begin(), dev.end());
  double mad = dev[dev.size() / 2];
  double floor = std::max(med + 6.0 * mad, 1e-9 * peak);

  auto pick = [&](int exclude_center) -> int {
    int best = -1;
    double best_s = floor;
    for (int i = min_seg; i <= len - 1 - min_seg; ++i) {
      if (exclude_center >= 0 && std::abs(i - exclude_center) <= min_seg) continue;
      if (score[static_cast<size_t>(i)] > best_s) {
        best_s = score[static_cast<size_t>(i)];
        best = i;
      }
    }
    return best;
  };

  int first = pick(-1);
  if (first < 0) return detail::tercile_control_points(lo, hi, min_seg);
  int second = pick(first);
  if (second < 0) return detail::tercile_control_points(lo, hi, min_seg);
  int k1 = lo + std::min(first, second);
  int k2 = lo + std::max(first, second);
  if (k1 - lo < min_seg || k2 - k1 < min_seg || hi - k2 + 1 < min_seg)
    return detail::tercile_control_points(lo, hi, min_seg);
  return ControlPointResult{k1, k2, false};
}

// Joint least-squares fit of the ten spline weights to every present sample
// of the given days. If the fitted pattern dips negative anywhere on the
// grid it is refit under a nonnegativity constraint on the weights.
inline ClearSkyModel fit_sunny(const PowerSeries& series, const std::vector<int>& days,
                               int k1, int k2, int lo, int hi,
                               bool defaulted_flag = false) {
  if (days.empty()) throw FitError("fit_sunny: no days given");
  if (!(lo < k1 && k1 < k2 && k2 <= hi))
    throw FitError("fit_sunny: control points must satisfy lo < k1 < k2 <= hi");

  std::array<std::vector<char>, 3> seen;
  for (auto& s : seen) s.assign(static_cast<size_t>(hi - lo + 1), 0);
  int rows = 0;
  for (int d : days)
    for (int k = lo; k <= hi; ++k)
      if (series.has(d, k)) {
        ++rows;
        int seg = detail::spline_segment(k, k1, k2, lo, hi);
        seen[static_cast<size_t>(seg)][static_cast<size_t>(k - lo)] = 1;
      }
  for (int seg = 0; seg < 3; ++seg) {
    int distinct = 0;
    for (char c : seen[static_cast<size_t>(seg)]) distinct += c;
    if (distinct < 4)
      throw FitError("fit_sunny: segment " + std::to_string(seg) +
                     " has fewer than 4 distinct samples");
  }

  Eigen::MatrixXd X(rows, 10);
  Eigen::VectorXd y(rows);
  int r = 0;
  for (int d : days)
    for (int k = lo; k <= hi; ++k) {
      if (!series.has(d, k)) continue;
      for (int q = 0; q < 10; ++q) X(r, q) = bernstein_basis(q, k, k1, k2, lo, hi);
      y[r] = series.value(d, k);
      ++r;
    }

  Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);

  ClearSkyModel m;
  m.k1 = k1;
  m.k2 = k2;
  m.daylight_lo = lo;
  m.daylight_hi = hi;
  m.control_points_defaulted = defaulted_flag;
  auto [mn, mx] = std::minmax_element(days.begin(), days.end());
  m.day_begin = *mn;
  m.day_end = *mx + 1;
  for (int q = 0; q < 10; ++q) m.coefficients[static_cast<size_t>(q)] = c[q];

  bool negative = false;
  for (int k = lo; k <= hi && !negative; ++k)
    if (m.evaluate(k) < -1e-9 * std::max(1.0, y.cwiseAbs().maxCoeff())) negative = true;
  if (negative) {
    Eigen::VectorXd cn = nnls(X, y);  // basis >= 0, so weights >= 0 suffice
    for (int q = 0; q < 10; ++q) m.coefficients[static_cast<size_t>(q)] = cn[q];
  }
  return m;
}

inline ClearSkyModel fit_sunny_auto(const PowerSeries& series,
                                    const std::vector<int>& days, int lo, int hi) {
  if (days.empty()) throw FitError("fit_sunny: no days given");
  ControlPointResult cp = detect_control_points(series, days.front(), lo, hi);
  return fit_sunny(series, days, cp.k1, cp.k2, lo, hi, cp.defaulted);
}

struct SeasonalUpdate {
  ClearSkyModel model;
  bool warned = false;      // fresh fit failed; model returned unchanged
  bool redetected = false;  // control points re-estimated from the new day
};

namespace detail {

inline double rms_residual(const ClearSkyModel& m, const PowerSeries& series, int day) {
  double ss = 0.0;
  int n = 0;
  for (int k = m.daylight_lo; k <= m.daylight_hi; ++k)
    if (series.has(day, k)) {
      double r = series.value(day, k) - m.evaluate(k);
      ss += r * r;
      ++n;
    }
  return n > 0 ? std::sqrt(ss / n) : 0.0;
}

// Least squares of the ten weights against known values on the full daylight
// grid, with the same nonnegativity fallback as fit_sunny.
inline std::array<double, 10> fit_values(const std::vector<double>& v, int k1, int k2,
                                         int lo, int hi) {
  int len = hi - lo + 1;
  Eigen::MatrixXd X(len, 10);
  Eigen::VectorXd y(len);
  for (int k = lo; k <= hi; ++k) {
    for (int q = 0; q < 10; ++q)
      X(k - lo, q) = bernstein_basis(q, k, k1, k2, lo, hi);
    y[k - lo] = v[static_cast<size_t>(k - lo)];
  }
  Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  std::array<double, 10> out{};
  for (int q = 0; q < 10; ++q) out[static_cast<size_t>(q)] = c[q];
  bool negative = false;
  double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  for (int k = lo; k <= hi && !negative; ++k) {
    double s = 0.0;
    for (int q = 0; q < 10; ++q) s += out[static_cast<size_t>(q)] * bernstein_basis(q, k, k1, k2, lo, hi);
    if (s < -1e-9 * scale) negative = true;
  }
  if (negative) {
    Eigen::VectorXd cn = nnls(X, y);
    for (int q = 0; q < 10; ++q) out[static_cast<size_t>(q)] = cn[q];
  }
  return out;
}

}  // namespace detail

// Slow seasonal tracking. The update blends patterns in value space,
// v = (1-gamma)*stale + gamma*fresh, which reduces to a plain coefficient
// blend while control points stay put. When the stale pattern explains the
// new day less than half as well as a same-basis refit, the kinks likely
// moved: control points are re-detected and the blend is refit on the new
// basis.
inline SeasonalUpdate update_seasonal(const ClearSkyModel& stale,
                                      const PowerSeries& series, int day,
                                      double gamma = 0.1) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("update_seasonal: gamma must be in [0,1]");
  SeasonalUpdate out{stale, false, false};
  if (gamma == 0.0) return out;

  ClearSkyModel fresh;
  try {
    fresh = fit_sunny(series, {day}, stale.k1, stale.k2, stale.daylight_lo,
                      stale.daylight_hi, stale.control_points_defaulted);
  } catch (const FitError&) {
    out.warned = true;
    return out;
  }

  double stale_res = detail::rms_residual(stale, series, day);
  double fresh_res = detail::rms_residual(fresh, series, day);
  if (stale_res > 2.0 * fresh_res && stale_res > 0.0) {
    try {
      ControlPointResult cp =
          detect_control_points(series, day, stale.daylight_lo, stale.daylight_hi);
      ClearSkyModel fresh2 = fit_sunny(series, {day}, cp.k1, cp.k2, stale.daylight_lo,
                                       stale.daylight_hi, cp.defaulted);
      std::vector<double> blend(static_cast<size_t>(stale.daylight_hi - stale.daylight_lo + 1));
      for (int k = stale.daylight_lo; k <= stale.daylight_hi; ++k)
        blend[static_cast<size_t>(k - stale.daylight_lo)] =
            (1.0 - gamma) * stale.evaluate(k) + gamma * fresh2.evaluate(k);
      ClearSkyModel updated = fresh2;
      updated.coefficients = detail::fit_values(blend, cp.k1, cp.k2, stale.daylight_lo,
                                                stale.daylight_hi);
      updated.day_begin = stale.day_begin;
      updated.day_end = std::max(stale.day_end, day + 1);
      out.model = updated;
      out.redetected = true;
      return out;
    } catch (const FitError&) {
      // fall through to the plain blend
    }
  }

  for (int q = 0; q < 10; ++q)
    out.model.coefficients[static_cast<size_t>(q)] =
        (1.0 - gamma) * stale.coefficients[static_cast<size_t>(q)] +
        gamma * fresh.coefficients[static_cast<size_t>(q)];
  out.model.day_end = std::max(stale.day_end, day + 1);
  return out;
}

}  // namespace pvregime
