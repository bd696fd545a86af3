#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "pvregime/common.hpp"
#include "pvregime/deconv.hpp"
#include "pvregime/errors.hpp"

namespace pvregime {

struct SunnyRegime {
  double sigma_s = 0.0;  // clear-sky modeling error std, watts
};

struct OvercastRegime {
  double alpha = 1.0;     // attenuation in (0, 1]
  double sigma_oc = 0.0;  // watts
};

struct StatePath {
  std::vector<int> states;  // 0-based state indices
  double loglik = kNegInf;
};

// State space of the partly-cloudy chain. State 0 carries no active
// parameter (w = s), the next block activates z coefficients by lag subset,
// then one direct-beam attenuation state and one edge-of-cloud state.
struct PartlyCloudyHmm {
  int M = 0;
  int ell = 1;
  int n_states = 0;
  std::vector<std::vector<int>> state_lags;  // active z lags per state
  Eigen::MatrixXi support;                   // (M+2) x N_s
  Eigen::MatrixXi mask;                      // structural transition pattern
  Eigen::MatrixXd transition;                // row-stochastic on the mask
  double lambda_z = 2.0;
  double lambda_ab = 4.0;
  double lambda_ae = 8.0;
  DiffuseFilter filter;
  double epsilon_s = 0.0;  // sunny band half-width, watts

  int ab_state() const { return n_states - 2; }
  int ae_state() const { return n_states - 1; }
  bool is_z_state(int i) const { return i >= 1 && i < n_states - 2; }
  // active lag for single-lag states, -1 otherwise
  int single_lag(int i) const {
    return is_z_state(i) && state_lags[static_cast<size_t>(i)].size() == 1
               ? state_lags[static_cast<size_t>(i)][0]
               : -1;
  }
  double initial_logprob() const { return -std::log(static_cast<double>(n_states)); }
};

struct StateEnumeration {
  int n_states = 0;
  std::vector<std::vector<int>> state_lags;  // empty set first, sizes ascending
  Eigen::MatrixXi support;                   // (M+2) x N_s; rows M, M+1 = a_b, a_e
};

inline StateEnumeration enumerate_states(int m_len, int ell) {
  if (ell < 1 || ell >= m_len)
    throw std::domain_error("enumerate_states: need 1 <= ell < M");
  StateEnumeration e;
  e.state_lags.push_back({});
  std::vector<int> combo;
  // lexicographic subsets of {0..M-1}, grouped by size
  std::function<void(int, int)> rec = [&](int start, int remaining) {
    if (remaining == 0) {
      e.state_lags.push_back(combo);
      return;
    }
    for (int j = start; j < m_len; ++j) {
      combo.push_back(j);
      rec(j + 1, remaining - 1);
      combo.pop_back();
    }
  };
  for (int size = 1; size <= ell; ++size) rec(0, size);
  int nz = static_cast<int>(e.state_lags.size());
  e.n_states = nz + 2;
  e.support = Eigen::MatrixXi::Zero(m_len + 2, e.n_states);
  for (int i = 0; i < nz; ++i)
    for (int lag : e.state_lags[static_cast<size_t>(i)]) e.support(lag, i) = 1;
  e.support(m_len, nz) = 1;      // a_b
  e.support(m_len + 1, nz + 1) = 1;  // a_e
  return e;
}

namespace detail {

// Structural transition mask. z supports age deterministically (lag j moves
// to j+1 and drops off the end); a fresh coefficient may enter at lag 0 when
// capacity allows. The attenuation and edge states may persist, clear, or
// hand over to each other; the edge state is not reachable straight out of a
// z tail. For ell = 1 this yields the (M-1) forced shift entries plus 12
// free ones.
inline Eigen::MatrixXi build_mask(const StateEnumeration& e, int m_len, int ell) {
  const int n = e.n_states;
  const int ab = n - 2, ae = n - 1;
  Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(n, n);
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < n - 2; ++i) index[e.state_lags[static_cast<size_t>(i)]] = i;

  auto allow = [&](int i, const std::vector<int>& lags) {
    auto it = index.find(lags);
    if (it != index.end()) mask(i, it->second) = 1;
  };

  for (int i = 0; i < n - 2; ++i) {
    const auto& lags = e.state_lags[static_cast<size_t>(i)];
    if (lags.empty()) {
      mask(0, 0) = 1;
      allow(0, {0});
      mask(0, ab) = 1;
      mask(0, ae) = 1;
      continue;
    }
    std::vector<int> aged;
    for (int j : lags)
      if (j + 1 <= m_len - 1) aged.push_back(j + 1);
    if (aged.empty()) {
      mask(i, 0) = 1;
      allow(i, {0});
    } else {
      allow(i, aged);
      if (static_cast<int>(aged.size()) < ell) {
        std::vector<int> with_new = aged;
        with_new.insert(with_new.begin(), 0);
        allow(i, with_new);
      }
    }
  }
  mask(ab, ab) = 1;
  mask(ab, 0) = 1;
  mask(ab, ae) = 1;
  mask(ae, ae) = 1;
  mask(ae, 0) = 1;
  mask(ae, ab) = 1;
  return mask;
}

}  // namespace detail

inline PartlyCloudyHmm make_hmm(int m_len, int ell, const DiffuseFilter& filter,
                                double lambda_z, double lambda_ab, double lambda_ae,
                                double epsilon_s) {
  if (filter.length() != m_len)
    throw ShapeError("make_hmm: filter length does not match M");
  if (!(lambda_z <= lambda_ab && lambda_ab <= lambda_ae))
    throw std::invalid_argument("make_hmm: need lambda_z <= lambda_ab <= lambda_ae");
  if (epsilon_s <= 0) throw std::invalid_argument("make_hmm: epsilon_s must be positive");
  StateEnumeration e = enumerate_states(m_len, ell);
  PartlyCloudyHmm h;
  h.M = m_len;
  h.ell = ell;
  h.n_states = e.n_states;
  h.state_lags = e.state_lags;
  h.state_lags.push_back({});  // a_b placeholder
  h.state_lags.push_back({});  // a_e placeholder
  h.support = e.support;
  h.mask = detail::build_mask(e, m_len, ell);
  h.lambda_z = lambda_z;
  h.lambda_ab = lambda_ab;
  h.lambda_ae = lambda_ae;
  h.filter = filter;
  h.epsilon_s = epsilon_s;
  h.transition = Eigen::MatrixXd::Zero(h.n_states, h.n_states);
  for (int i = 0; i < h.n_states; ++i) {
    int row_count = h.mask.row(i).sum();
    for (int j = 0; j < h.n_states; ++j)
      if (h.mask(i, j)) h.transition(i, j) = 1.0 / row_count;
  }
  return h;
}

// Log emission density of state i at observation w given clear sky s.
// State 0 is the sunny band; single-lag states are truncated exponentials in
// (s-w); the a_b state a truncated exponential with rate λ_ab/s; a_e an
// exponential above s. Values outside a state's support give -inf.
inline double emission_logpdf(const PartlyCloudyHmm& h, int state, double w, double s) {
  if (state < 0 || state >= h.n_states)
    throw std::domain_error("emission_logpdf: bad state index");
  if (s <= 0) throw std::invalid_argument("emission_logpdf: s must be positive");

  if (state == 0) {
    return std::abs(w - s) <= h.epsilon_s ? -std::log(2.0 * h.epsilon_s) : kNegInf;
  }
  if (state == h.ae_state()) {
    if (w < s) return kNegInf;
    double rate = h.lambda_ae / s;
    return std::log(rate) - rate * (w - s);
  }
  if (w < 0 || w > s) return kNegInf;
  if (state == h.ab_state()) {
    double rate = h.lambda_ab / s;
    double log_norm = std::log1p(-std::exp(-h.lambda_ab));
    return std::log(rate) - rate * (s - w) - log_norm;
  }
  int lag = h.single_lag(state);
  if (lag < 0)
    throw std::domain_error("emission_logpdf: multi-lag emissions are not defined");
  double tap = h.filter.taps[lag];
  double tap_floor = 1e-9 * std::max(1.0, h.filter.taps.maxCoeff());
  if (tap < tap_floor) tap = tap_floor;  // degenerate tap: concentrate near w = s
  double rate = h.lambda_z / tap;
  double log_norm = std::log1p(-std::exp(-rate * s));
  return std::log(rate) - rate * (s - w) - log_norm;
}

// Truncated Gaussian on [0, s] centered at alpha*s.
inline double overcast_logpdf(const OvercastRegime& regime, double w, double s) {
  if (s <= 0) throw std::invalid_argument("overcast_logpdf: s must be positive");
  if (regime.sigma_oc <= 0)
    throw std::invalid_argument("overcast_logpdf: sigma_oc must be positive");
  if (w < 0 || w > s) return kNegInf;
  double mu = regime.alpha * s, sig = regime.sigma_oc;
  double z = (w - mu) / sig;
  double denom = normal_cdf((s - mu) / sig) - normal_cdf(-mu / sig);
  return -0.5 * z * z - std::log(sig) - 0.5 * std::log(2.0 * M_PI) - std::log(denom);
}

// Zero-mean maximum-likelihood scale of fit residuals, floored so downstream
// bands and likelihoods stay well-posed.
inline std::pair<double, double> estimate_sigmas(const std::vector<double>& sunny_residuals,
                                                 const std::vector<double>& overcast_residuals,
                                                 double nameplate) {
  auto ml_sigma = [&](const std::vector<double>& r, const char* which) {
    if (r.size() < 10)
      throw FitError(std::string("estimate_sigmas: fewer than 10 ") + which +
                     " residual samples");
    double ss = 0.0;
    for (double x : r) ss += x * x;
    return std::max(std::sqrt(ss / static_cast<double>(r.size())), 1e-3 * nameplate);
  };
  return {ml_sigma(sunny_residuals, "sunny"), ml_sigma(overcast_residuals, "overcast")};
}

// Max-product dynamic program over explicit log matrices. Ties break toward
// the lower state index at every stage.
inline StatePath viterbi_max_product(const Eigen::VectorXd& log_init,
                                     const Eigen::MatrixXd& log_trans,
                                     const Eigen::MatrixXd& log_emit) {
  const int n = static_cast<int>(log_init.size());
  const int t_len = static_cast<int>(log_emit.rows());
  if (log_trans.rows() != n || log_trans.cols() != n || log_emit.cols() != n)
    throw ShapeError("viterbi_max_product: dimension mismatch");
  if (t_len == 0) throw std::invalid_argument("viterbi_max_product: empty window");

  Eigen::MatrixXd delta(t_len, n);
  Eigen::MatrixXi psi(t_len, n);
  for (int j = 0; j < n; ++j) {
    delta(0, j) = log_init[j] + log_emit(0, j);
    psi(0, j) = -1;
  }
  for (int t = 1; t < t_len; ++t)
    for (int j = 0; j < n; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < n; ++i) {
        double v = delta(t - 1, i) + log_trans(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta(t, j) = best + log_emit(t, j);
      psi(t, j) = arg;
    }

  StatePath path;
  path.states.assign(static_cast<size_t>(t_len), 0);
  double best = kNegInf;
  int arg = 0;
  for (int j = 0; j < n; ++j)
    if (delta(t_len - 1, j) > best) {
      best = delta(t_len - 1, j);
      arg = j;
    }
  if (best == kNegInf) {
    // walk forward to the first sample where every state died
    int bad = 0;
    for (int t = 0; t < t_len; ++t) {
      bool alive = false;
      for (int j = 0; j < n; ++j)
        if (delta(t, j) > kNegInf) alive = true;
      if (!alive) {
        bad = t;
        break;
      }
    }
    throw DecodeError("viterbi: every path has zero probability at sample " +
                          std::to_string(bad),
                      bad);
  }
  path.loglik = best;
  path.states[static_cast<size_t>(t_len - 1)] = arg;
  for (int t = t_len - 1; t > 0; --t)
    path.states[static_cast<size_t>(t - 1)] = psi(t, path.states[static_cast<size_t>(t)]);
  return path;
}

inline Eigen::MatrixXd log_matrix(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out(i, j) = a(i, j) > 0 ? std::log(a(i, j)) : kNegInf;
  return out;
}

inline StatePath viterbi_decode(const PartlyCloudyHmm& h, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& s) {
  if (w.size() != s.size()) throw ShapeError("viterbi_decode: w/s length mismatch");
  if (w.size() == 0) throw std::invalid_argument("viterbi_decode: empty window");
  const int t_len = static_cast<int>(w.size());
  Eigen::MatrixXd log_emit(t_len, h.n_states);
  for (int t = 0; t < t_len; ++t)
    for (int j = 0; j < h.n_states; ++j)
      log_emit(t, j) = emission_logpdf(h, j, w[t], s[t]);
  Eigen::VectorXd log_init =
      Eigen::VectorXd::Constant(h.n_states, h.initial_logprob());
  return viterbi_max_product(log_init, log_matrix(h.transition), log_emit);
}

// Most likely future state sequence given only the chain, started from the
// decoded state at the window's end.
inline StatePath predict_states(const Eigen::MatrixXd& transition, int last_state,
                                int horizon) {
  const int n = static_cast<int>(transition.rows());
  if (last_state < 0 || last_state >= n)
    throw std::domain_error("predict_states: bad starting state");
  if (horizon < 1) throw std::invalid_argument("predict_states: horizon >= 1");
  Eigen::MatrixXd log_trans = log_matrix(transition);
  Eigen::VectorXd log_init = log_trans.row(last_state);
  Eigen::MatrixXd log_emit = Eigen::MatrixXd::Zero(horizon, n);
  return viterbi_max_product(log_init, log_trans, log_emit);
}

inline StatePath predict_states(const PartlyCloudyHmm& h, int last_state, int horizon) {
  return predict_states(h.transition, last_state, horizon);
}

struct TrainResult {
  PartlyCloudyHmm hmm;
  std::vector<double> loglik_history;  // joint path likelihood per iteration
  int iterations = 0;
  int skipped_windows = 0;
  bool converged = false;  // paths stabilized before the iteration cap
};

// Segmental k-means (Viterbi training): alternate decoding with transition
// re-estimation from path counts until the path set stops changing. Rates
// and emission parameters stay fixed. Rows never visited keep their prior
// probabilities; allowed entries get epsilon smoothing before normalization.
inline TrainResult train_segmental_kmeans(
    const PartlyCloudyHmm& init,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& windows,
    int max_iters = 50, double smoothing = 1e-3) {
  TrainResult res;
  res.hmm = init;

  std::vector<const std::pair<Eigen::VectorXd, Eigen::VectorXd>*> usable;
  for (const auto& win : windows) {
    if (win.first.size() < 2) {
      ++res.skipped_windows;
      continue;
    }
    usable.push_back(&win);
  }
  if (usable.empty()) return res;

  std::vector<std::vector<int>> prev_paths;
  for (int iter = 0; iter < max_iters; ++iter) {
    double joint = 0.0;
    std::vector<std::vector<int>> paths;
    paths.reserve(usable.size());
    for (const auto* win : usable) {
      StatePath p = viterbi_decode(res.hmm, win->first, win->second);
      joint += p.loglik;
      paths.push_back(std::move(p.states));
    }
    if (!res.loglik_history.empty() &&
        joint + 1e-6 * std::max(1.0, std::abs(joint)) < res.loglik_history.back())
      throw std::logic_error("train_segmental_kmeans: joint likelihood decreased");
    res.loglik_history.push_back(joint);
    res.iterations = iter + 1;
    if (paths == prev_paths) {
      res.converged = true;
      break;
    }

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(init.n_states, init.n_states);
    for (const auto& p : paths)
      for (size_t t = 1; t < p.size(); ++t)
        counts(p[t - 1], p[t]) += 1.0;

    Eigen::MatrixXd next = res.hmm.transition;
    for (int i = 0; i < init.n_states; ++i) {
      double row_total = counts.row(i).sum();
      if (row_total <= 0) continue;  // unvisited row keeps prior values
      double denom = 0.0;
      for (int j = 0; j < init.n_states; ++j)
        if (init.mask(i, j)) denom += counts(i, j) + smoothing;
      for (int j = 0; j < init.n_states; ++j)
        next(i, j) = init.mask(i, j) ? (counts(i, j) + smoothing) / denom : 0.0;
    }
    res.hmm.transition = next;
    prev_paths = std::move(paths);
  }
  return res;
}

}  // namespace pvregime
