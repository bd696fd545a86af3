#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "pvregime/clearsky.hpp"
#include "pvregime/common.hpp"
#include "pvregime/errors.hpp"
#include "pvregime/nnls.hpp"
#include "pvregime/timeseries.hpp"

namespace pvregime {

// Shared diffuse-attenuation filter h̃.
struct DiffuseFilter {
  Eigen::VectorXd taps;  // length M, nonnegative, not all zero
  int length() const { return static_cast<int>(taps.size()); }
};

// Per-day sparse cloud parameters. z has M-1 extra leading entries so clouds
// arriving before the first sample still influence the morning (extended end
// conditions).
struct CloudDecomposition {
  Eigen::VectorXd z;         // length 2N+M-1
  Eigen::VectorXd a_b;       // length 2N, direct-beam attenuation
  Eigen::VectorXd a_e;       // length 2N, edge-of-cloud gain
  Eigen::VectorXd residual;  // length 2N, w - ŵ (0 where w missing)
  double nmse = 0.0;
};

// T(h̃)·z without materializing the Toeplitz matrix:
// out[k] = Σ_m taps[m] · z[k + M-1 - m].
inline Eigen::VectorXd toeplitz_apply(const DiffuseFilter& filter,
                                      const Eigen::VectorXd& z) {
  const int m_len = filter.length();
  const int out_len = static_cast<int>(z.size()) - m_len + 1;
  if (m_len < 1 || out_len < 1)
    throw ShapeError("toeplitz_apply: z shorter than filter");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_len);
  for (int k = 0; k < out_len; ++k) {
    double acc = 0.0;
    for (int m = 0; m < m_len; ++m) acc += filter.taps[m] * z[k + m_len - 1 - m];
    out[k] = acc;
  }
  return out;
}

namespace detail {

// Adjoint of toeplitz_apply: g[j] = Σ_k taps[k+M-1-j] · e[k].
inline Eigen::VectorXd toeplitz_adjoint(const Eigen::VectorXd& taps,
                                        const Eigen::VectorXd& e) {
  const int m_len = static_cast<int>(taps.size());
  const int n_out = static_cast<int>(e.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_out + m_len - 1);
  for (int k = 0; k < n_out; ++k) {
    if (e[k] == 0.0) continue;
    for (int m = 0; m < m_len; ++m) g[k + m_len - 1 - m] += taps[m] * e[k];
  }
  return g;
}

}  // namespace detail

// Scaled Hamming window, the deterministic filter initialization.
inline DiffuseFilter hamming_init(int m_len, double g) {
  if (m_len < 2) throw std::domain_error("hamming_init: M must be >= 2");
  if (g <= 0) throw std::domain_error("hamming_init: scale must be positive");
  DiffuseFilter f;
  f.taps.resize(m_len);
  for (int q = 0; q < m_len; ++q)
    f.taps[q] = g * (0.54 - 0.46 * std::cos(2.0 * M_PI * q / (m_len - 1)));
  return f;
}

// One day of aligned observations and clear-sky evaluations.
struct DayData {
  Eigen::VectorXd w;          // observed power, undefined where absent
  Eigen::VectorXd s;          // clear-sky evaluations
  std::vector<char> present;  // observation mask
};

inline DayData make_day_data(const PowerSeries& series, int day,
                             const ClearSkyModel& model) {
  const int n2 = series.samples_per_day();
  const int n = series.half_samples();
  DayData d;
  d.w = Eigen::VectorXd::Zero(n2);
  d.s = Eigen::VectorXd::Zero(n2);
  d.present.assign(static_cast<size_t>(n2), 0);
  for (int k = -n; k < n; ++k) {
    int i = k + n;
    d.s[i] = model.evaluate(k);
    if (series.has(day, k)) {
      d.w[i] = series.value(day, k);
      d.present[static_cast<size_t>(i)] = 1;
    }
  }
  return d;
}

struct SparseCodeParams {
  double lambda1 = 0.0;  // a_e penalty
  double lambda2 = 0.0;  // a_b penalty
  double lambda3 = 0.0;  // z penalty
  int max_iters = 5000;
  double rel_tol = 1e-8;
};

inline void validate_lambdas(const SparseCodeParams& p) {
  if (p.lambda1 < 0 || p.lambda2 < 0 || p.lambda3 < 0)
    throw std::invalid_argument("penalty weights must be nonnegative");
  if (!(p.lambda1 >= p.lambda2 && p.lambda2 >= 10.0 * p.lambda3))
    throw std::invalid_argument(
        "penalty ordering violated: need lambda1 >= lambda2 >= 10*lambda3");
}

inline SparseCodeParams default_lambdas(double s_max) {
  SparseCodeParams p;
  p.lambda3 = 0.01 * s_max;
  p.lambda2 = 100.0 * p.lambda3;
  p.lambda1 = p.lambda2;
  return p;
}

namespace detail {

struct CodingMasks {
  std::vector<char> att;     // observed and w <= s
  std::vector<char> boost;   // observed and w > s
  std::vector<char> free_ab;
  std::vector<char> free_ae;
  std::vector<char> free_z;
};

inline CodingMasks build_masks(const DayData& day, const Eigen::VectorXd& taps) {
  const int n2 = static_cast<int>(day.w.size());
  const int m_len = static_cast<int>(taps.size());
  CodingMasks mk;
  mk.att.assign(static_cast<size_t>(n2), 0);
  mk.boost.assign(static_cast<size_t>(n2), 0);
  mk.free_ab.assign(static_cast<size_t>(n2), 0);
  mk.free_ae.assign(static_cast<size_t>(n2), 0);
  mk.free_z.assign(static_cast<size_t>(n2 + m_len - 1), 1);
  for (int k = 0; k < n2; ++k) {
    if (!day.present[static_cast<size_t>(k)]) continue;
    if (day.s[k] < 0) throw std::invalid_argument("sparse_code_day: negative clear-sky value");
    bool is_att = day.w[k] <= day.s[k];
    mk.att[static_cast<size_t>(k)] = is_att;
    mk.boost[static_cast<size_t>(k)] = !is_att;
    if (is_att && day.s[k] > 0) mk.free_ab[static_cast<size_t>(k)] = 1;
    if (!is_att && day.s[k] > 0) mk.free_ae[static_cast<size_t>(k)] = 1;
    if (!is_att) {
      // the convolution output must vanish on boost rows, so any z entry this
      // row touches with a positive tap is pinned at zero
      for (int m = 0; m < m_len; ++m)
        if (taps[m] > 0) mk.free_z[static_cast<size_t>(k + m_len - 1 - m)] = 0;
    }
  }
  return mk;
}

}  // namespace detail

// Masked nonnegative lasso for one day by projected proximal gradient.
// Minimizes Σ_att (s-w - s·a_b - (T z))² + Σ_boost (s-w + s·a_e)²
//         + λ1·Σ a_e + λ2·Σ a_b + λ3·Σ z
// subject to elementwise nonnegativity and the complementarity pins above.
inline CloudDecomposition sparse_code_day(const DayData& day, const DiffuseFilter& filter,
                                          const SparseCodeParams& params,
                                          const CloudDecomposition* warm = nullptr) {
  validate_lambdas(params);
  const int n2 = static_cast<int>(day.w.size());
  const int m_len = filter.length();
  if (static_cast<int>(day.s.size()) != n2 ||
      static_cast<int>(day.present.size()) != n2)
    throw ShapeError("sparse_code_day: inconsistent day data lengths");
  const int zn = n2 + m_len - 1;
  const auto mk = detail::build_masks(day, filter.taps);

  Eigen::VectorXd ab = Eigen::VectorXd::Zero(n2);
  Eigen::VectorXd ae = Eigen::VectorXd::Zero(n2);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(zn);
  if (warm) {
    if (warm->a_b.size() == n2) ab = warm->a_b;
    if (warm->a_e.size() == n2) ae = warm->a_e;
    if (warm->z.size() == zn) z = warm->z;
    for (int k = 0; k < n2; ++k) {
      if (!mk.free_ab[static_cast<size_t>(k)]) ab[k] = 0;
      if (!mk.free_ae[static_cast<size_t>(k)]) ae[k] = 0;
    }
    for (int j = 0; j < zn; ++j)
      if (!mk.free_z[static_cast<size_t>(j)]) z[j] = 0;
    ab = ab.cwiseMax(0.0);
    ae = ae.cwiseMax(0.0);
    z = z.cwiseMax(0.0);
  }

  // residuals of the two masked blocks; zero rows elsewhere
  auto att_error = [&](const Eigen::VectorXd& ab_, const Eigen::VectorXd& z_) {
    Eigen::VectorXd conv = toeplitz_apply(filter, z_);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n2);
    for (int k = 0; k < n2; ++k)
      if (mk.att[static_cast<size_t>(k)])
        e[k] = day.s[k] * ab_[k] + conv[k] - (day.s[k] - day.w[k]);
    return e;
  };
  auto boost_error = [&](const Eigen::VectorXd& ae_) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n2);
    for (int k = 0; k < n2; ++k)
      if (mk.boost[static_cast<size_t>(k)])
        e[k] = day.s[k] * (1.0 + ae_[k]) - day.w[k];
    return e;
  };
  auto objective = [&](const Eigen::VectorXd& ab_, const Eigen::VectorXd& ae_,
                       const Eigen::VectorXd& z_) {
    return att_error(ab_, z_).squaredNorm() + boost_error(ae_).squaredNorm() +
           params.lambda1 * ae_.sum() + params.lambda2 * ab_.sum() +
           params.lambda3 * z_.sum();
  };

  // Lipschitz bound of the quadratic gradient: 2·||A||² by power iteration on
  // the masked forward/adjoint pair.
  double lip;
  {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd vb(n2), ve(n2), vz(zn);
    for (int k = 0; k < n2; ++k) {
      vb[k] = mk.free_ab[static_cast<size_t>(k)] ? unif(rng) : 0.0;
      ve[k] = mk.free_ae[static_cast<size_t>(k)] ? unif(rng) : 0.0;
    }
    for (int j = 0; j < zn; ++j) vz[j] = mk.free_z[static_cast<size_t>(j)] ? unif(rng) : 0.0;
    double norm2 = 0.0;
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd conv = toeplitz_apply(filter, vz);
      Eigen::VectorXd u = Eigen::VectorXd::Zero(n2);
      for (int k = 0; k < n2; ++k) {
        if (mk.att[static_cast<size_t>(k)]) u[k] = day.s[k] * vb[k] + conv[k];
        if (mk.boost[static_cast<size_t>(k)]) u[k] = day.s[k] * ve[k];
      }
      Eigen::VectorXd gz = detail::toeplitz_adjoint(filter.taps, [&] {
        Eigen::VectorXd ua = Eigen::VectorXd::Zero(n2);
        for (int k = 0; k < n2; ++k)
          if (mk.att[static_cast<size_t>(k)]) ua[k] = u[k];
        return ua;
      }());
      for (int k = 0; k < n2; ++k) {
        vb[k] = mk.free_ab[static_cast<size_t>(k)] ? day.s[k] * u[k] : 0.0;
        ve[k] = mk.free_ae[static_cast<size_t>(k)] ? day.s[k] * u[k] : 0.0;
      }
      for (int j = 0; j < zn; ++j) vz[j] = mk.free_z[static_cast<size_t>(j)] ? gz[j] : 0.0;
      norm2 = std::sqrt(vb.squaredNorm() + ve.squaredNorm() + vz.squaredNorm());
      if (norm2 <= 0) break;
      vb /= norm2;
      ve /= norm2;
      vz /= norm2;
    }
    if (norm2 <= 0) {
      // degenerate start: bound the spectral norm by the Frobenius norm
      double fro = 0.0;
      for (int k = 0; k < n2; ++k) {
        if (mk.free_ab[static_cast<size_t>(k)]) fro += day.s[k] * day.s[k];
        if (mk.free_ae[static_cast<size_t>(k)]) fro += day.s[k] * day.s[k];
      }
      double taps2 = filter.taps.squaredNorm();
      for (int j = 0; j < zn; ++j)
        if (mk.free_z[static_cast<size_t>(j)]) fro += taps2;
      norm2 = fro;  // ||A||_F^2 >= sigma_max^2
    }
    lip = 2.0 * norm2 * 1.05;
  }

  CloudDecomposition out;
  if (lip > 0) {
    const double step = 1.0 / lip;
    double prev = objective(ab, ae, z);
    if (!std::isfinite(prev)) throw DivergenceError("sparse_code_day: non-finite objective");
    for (int it = 0; it < params.max_iters; ++it) {
      Eigen::VectorXd ea = att_error(ab, z);
      Eigen::VectorXd eb = boost_error(ae);
      Eigen::VectorXd gz = detail::toeplitz_adjoint(filter.taps, ea);
      for (int k = 0; k < n2; ++k) {
        if (mk.free_ab[static_cast<size_t>(k)])
          ab[k] = std::max(0.0, ab[k] - step * (2.0 * day.s[k] * ea[k] + params.lambda2));
        if (mk.free_ae[static_cast<size_t>(k)])
          ae[k] = std::max(0.0, ae[k] - step * (2.0 * day.s[k] * eb[k] + params.lambda1));
      }
      for (int j = 0; j < zn; ++j)
        if (mk.free_z[static_cast<size_t>(j)])
          z[j] = std::max(0.0, z[j] - step * (2.0 * gz[j] + params.lambda3));
      double cur = objective(ab, ae, z);
      if (!std::isfinite(cur)) throw DivergenceError("sparse_code_day: non-finite objective");
      if (prev - cur <= params.rel_tol * std::max(1.0, std::abs(prev)) && it > 2) break;
      prev = cur;
    }
  }

  out.a_b = ab;
  out.a_e = ae;
  out.z = z;
  out.residual = Eigen::VectorXd::Zero(n2);
  Eigen::VectorXd conv = toeplitz_apply(filter, z);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n2; ++k) {
    if (!day.present[static_cast<size_t>(k)]) continue;
    double w_hat = day.s[k] * (1.0 - ab[k] + ae[k]) - conv[k];
    out.residual[k] = day.w[k] - w_hat;
    num += out.residual[k] * out.residual[k];
    den += day.w[k] * day.w[k];
  }
  out.nmse = den > 0 ? num / den : (num > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  return out;
}

struct FilterUpdate {
  DiffuseFilter filter;
  bool warned = false;  // no usable z mass; filter left unchanged
};

// Refit taps by NNLS against the diffuse part of the attenuation residual,
// pooling every day: rows are observed attenuation samples, columns the
// delayed z values each tap sees.
inline FilterUpdate update_filter(const std::vector<DayData>& days,
                                  const std::vector<CloudDecomposition>& decomps,
                                  const DiffuseFilter& current) {
  if (days.size() != decomps.size())
    throw ShapeError("update_filter: days/decompositions size mismatch");
  const int m_len = current.length();
  double z_mass = 0.0;
  int rows = 0;
  for (size_t d = 0; d < days.size(); ++d) {
    z_mass += decomps[d].z.sum();
    const int n2 = static_cast<int>(days[d].w.size());
    for (int k = 0; k < n2; ++k)
      if (days[d].present[static_cast<size_t>(k)] && days[d].w[k] <= days[d].s[k]) ++rows;
  }
  if (z_mass <= 0.0 || rows == 0) return FilterUpdate{current, true};

  Eigen::MatrixXd D(rows, m_len);
  Eigen::VectorXd y(rows);
  int r = 0;
  for (size_t d = 0; d < days.size(); ++d) {
    const int n2 = static_cast<int>(days[d].w.size());
    for (int k = 0; k < n2; ++k) {
      if (!days[d].present[static_cast<size_t>(k)] || days[d].w[k] > days[d].s[k]) continue;
      for (int m = 0; m < m_len; ++m) D(r, m) = decomps[d].z[k + m_len - 1 - m];
      y[r] = days[d].s[k] - days[d].w[k] - days[d].s[k] * decomps[d].a_b[k];
      ++r;
    }
  }
  Eigen::VectorXd taps = nnls(D, y);
  if (taps.maxCoeff() <= 0.0) return FilterUpdate{current, true};
  return FilterUpdate{DiffuseFilter{taps}, false};
}

struct LearnResult {
  DiffuseFilter filter;
  std::vector<CloudDecomposition> days;
  std::vector<double> objective_history;  // non-increasing checkpoints
  double g = 0.0;                         // fixed initialization scale
  bool no_z_warning = false;              // all-sunny input: filter untouched
};

// Starting points for the alternation: the Hamming window plus attenuation
// windows observed in the data. The alternation is only locally convergent,
// and a symmetric start can settle on a blurred filter whose coding error
// gets absorbed by a_b, so seed it with drop shapes the data actually shows.
// Isolated footprints (near-zero drop just outside the window) are preferred:
// for a lone diffuse event such a window is the filter shape itself.
inline std::vector<DiffuseFilter> filter_init_candidates(const std::vector<DayData>& days,
                                                         int m_len, double g) {
  std::vector<DiffuseFilter> inits{hamming_init(m_len, g)};
  struct Win {
    double score;
    bool isolated;
    size_t day;
    int start;
  };
  std::vector<Win> wins;
  for (size_t d = 0; d < days.size(); ++d) {
    const auto& day = days[d];
    const int n2 = static_cast<int>(day.w.size());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n2);
    for (int k = 0; k < n2; ++k)
      if (day.present[static_cast<size_t>(k)] && day.w[k] <= day.s[k])
        u[k] = day.s[k] - day.w[k];
    Win best{0.0, false, d, -1};
    for (int k = 0; k + m_len <= n2; ++k) {
      double sc = u.segment(k, m_len).sum();
      if (sc <= 0.0) continue;
      double peak = u.segment(k, m_len).maxCoeff();
      double edge = std::max(k > 0 ? u[k - 1] : 0.0, k + m_len < n2 ? u[k + m_len] : 0.0);
      bool isolated = edge <= 0.05 * peak;
      if (std::make_pair(isolated, sc) > std::make_pair(best.isolated, best.score))
        best = Win{sc, isolated, d, k};
    }
    if (best.start >= 0) wins.push_back(best);
  }
  std::sort(wins.begin(), wins.end(), [](const Win& a, const Win& b) {
    if (a.isolated != b.isolated) return a.isolated;
    if (a.score != b.score) return a.score > b.score;
    if (a.day != b.day) return a.day < b.day;
    return a.start < b.start;
  });
  for (size_t i = 0; i < wins.size() && inits.size() < 3; ++i) {
    const auto& day = days[wins[i].day];
    Eigen::VectorXd taps = Eigen::VectorXd::Zero(m_len);
    for (int q = 0; q < m_len; ++q) {
      int t = wins[i].start + q;
      if (day.present[static_cast<size_t>(t)] && day.w[t] <= day.s[t])
        taps[q] = day.s[t] - day.w[t];
    }
    double top = taps.maxCoeff();
    if (top <= 0.0) continue;
    inits.push_back(DiffuseFilter{taps * (g / top)});
  }
  return inits;
}

namespace detail {

inline LearnResult learn_from_start(const std::vector<DayData>& days,
                                    const SparseCodeParams& params, int outer_iters,
                                    double g, int jobs, const DiffuseFilter& start) {
  LearnResult res;
  res.g = g;
  res.filter = start;
  res.days.resize(days.size());

  auto total_objective = [&](const DiffuseFilter& f) {
    double acc = 0.0;
    for (size_t d = 0; d < days.size(); ++d) {
      const auto& dc = res.days[d];
      Eigen::VectorXd conv = toeplitz_apply(f, dc.z);
      const auto& day = days[d];
      const int n2 = static_cast<int>(day.w.size());
      for (int k = 0; k < n2; ++k) {
        if (!day.present[static_cast<size_t>(k)]) continue;
        if (day.w[k] <= day.s[k]) {
          double e = day.s[k] * dc.a_b[k] + conv[k] - (day.s[k] - day.w[k]);
          acc += e * e;
        } else {
          double e = day.s[k] * (1.0 + dc.a_e[k]) - day.w[k];
          acc += e * e;
        }
      }
      acc += params.lambda1 * dc.a_e.sum() + params.lambda2 * dc.a_b.sum() +
             params.lambda3 * dc.z.sum();
    }
    return acc;
  };

  auto check_monotone = [&](double prev, double cur) {
    if (cur > prev + 1e-10 * std::max(1.0, std::abs(prev)))
      throw std::logic_error("learn_dictionary: objective increased");
  };

  bool any_z = false;
  for (int outer = 0; outer < outer_iters; ++outer) {
    parallel_for(static_cast<int>(days.size()), jobs, [&](int d) {
      const CloudDecomposition* warm = outer > 0 ? &res.days[static_cast<size_t>(d)] : nullptr;
      res.days[static_cast<size_t>(d)] =
          sparse_code_day(days[static_cast<size_t>(d)], res.filter, params, warm);
    });
    double after_code = total_objective(res.filter);
    if (!res.objective_history.empty())
      check_monotone(res.objective_history.back(), after_code);
    res.objective_history.push_back(after_code);

    FilterUpdate fu = update_filter(days, res.days, res.filter);
    if (fu.warned) {
      res.no_z_warning = true;
      break;  // nothing for the filter to learn from
    }
    any_z = true;
    double after_filter = total_objective(fu.filter);
    check_monotone(after_code, after_filter);

    // rescale so max(h̃) = g again, compensating z; skip if the λ3 penalty
    // change would undo the descent
    double c = fu.filter.taps.maxCoeff() / g;
    if (c > 0) {
      double z_sum = 0.0;
      for (const auto& dc : res.days) z_sum += dc.z.sum();
      double rescaled = after_filter + params.lambda3 * (c - 1.0) * z_sum;
      if (rescaled <= after_code + 1e-12 * std::max(1.0, std::abs(after_code))) {
        fu.filter.taps /= c;
        for (auto& dc : res.days) dc.z *= c;
        after_filter = rescaled;
      }
    }
    res.filter = fu.filter;
    res.objective_history.push_back(after_filter);
  }

  // final coding pass so the returned decompositions match the final filter
  if (any_z) {
    parallel_for(static_cast<int>(days.size()), jobs, [&](int d) {
      res.days[static_cast<size_t>(d)] =
          sparse_code_day(days[static_cast<size_t>(d)], res.filter, params,
                          &res.days[static_cast<size_t>(d)]);
    });
    double final_obj = total_objective(res.filter);
    check_monotone(res.objective_history.back(), final_obj);
    res.objective_history.push_back(final_obj);
  }
  return res;
}

}  // namespace detail

// Alternating sparse coding / filter refit. The objective checkpoints after
// every half-step must never increase: coding is warm-started monotone
// descent, the NNLS refit only lowers the quadratic, and the rescaling that
// pins max(h̃) back to g is applied only when the λ3 bookkeeping keeps the
// total objective from rising. Runs once per starting point and keeps the
// lowest final objective.
inline LearnResult learn_dictionary(const std::vector<DayData>& days, int m_len,
                                    SparseCodeParams params, int outer_iters = 20,
                                    double g = -1.0, int jobs = 1) {
  if (outer_iters < 1) throw std::invalid_argument("learn_dictionary: outer_iters >= 1");
  if (days.empty()) throw std::invalid_argument("learn_dictionary: no days");
  validate_lambdas(params);

  double s_max = 0.0;
  for (const auto& d : days) s_max = std::max(s_max, d.s.size() ? d.s.maxCoeff() : 0.0);
  if (g <= 0.0) g = std::max(s_max / m_len, 1e-9);

  std::vector<DiffuseFilter> inits = filter_init_candidates(days, m_len, g);
  LearnResult best = detail::learn_from_start(days, params, outer_iters, g, jobs, inits[0]);
  for (size_t i = 1; i < inits.size() && !best.no_z_warning; ++i) {
    LearnResult alt = detail::learn_from_start(days, params, outer_iters, g, jobs, inits[i]);
    if (!alt.no_z_warning && !alt.objective_history.empty() &&
        (best.objective_history.empty() ||
         alt.objective_history.back() < best.objective_history.back()))
      best = std::move(alt);
  }
  return best;
}

inline LearnResult learn_dictionary(const PowerSeries& series, const ClearSkyModel& model,
                                    const std::vector<int>& day_indices, int m_len,
                                    SparseCodeParams params, int outer_iters = 20,
                                    double g = -1.0, int jobs = 1) {
  std::vector<DayData> days;
  days.reserve(day_indices.size());
  for (int d : day_indices) days.push_back(make_day_data(series, d, model));
  return learn_dictionary(days, m_len, params, outer_iters, g, jobs);
}

}  // namespace pvregime
