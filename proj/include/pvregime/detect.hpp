#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "pvregime/errors.hpp"
#include "pvregime/regimes.hpp"

namespace pvregime {

enum class Regime { Sunny, Overcast, PartlyCloudy };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Sunny: return "sunny";
    case Regime::Overcast: return "overcast";
    default: return "partly_cloudy";
  }
}

struct RegimeDecision {
  Regime regime = Regime::Sunny;
  double alpha_hat = 1.0;    // meaningful for Overcast; context otherwise
  StatePath state_path;      // filled for PartlyCloudy
  double sse = 0.0;          // statistic of the winning hypothesis
  int used_samples = 0;      // samples with usable clear-sky signal
};

struct DetectThresholds {
  double sigma_s = 0.0;
  double sigma_oc = 0.0;
  double mu = 3.0;
  double mu_oc = 3.0;
  double alpha_max = 0.9;
};

// Least-squares / ML attenuation of w against s, clipped at zero.
inline double estimate_alpha(const Eigen::VectorXd& w, const Eigen::VectorXd& s) {
  if (w.size() != s.size()) throw ShapeError("estimate_alpha: w/s length mismatch");
  double num = 0.0, den = 0.0;
  for (int k = 0; k < s.size(); ++k) {
    num += w[k] * s[k];
    den += s[k] * s[k];
  }
  if (den <= 0) throw FitError("estimate_alpha: no clear-sky signal in window");
  return std::max(0.0, num / den);
}

// Sunny / overcast / partly-cloudy hypothesis test on one window. Thresholds
// are per-sample so the decision is window-length invariant. Samples with
// negligible clear-sky value are excluded from the statistics.
inline RegimeDecision classify(const Eigen::VectorXd& w, const Eigen::VectorXd& s,
                               const DetectThresholds& th, const PartlyCloudyHmm* hmm) {
  if (w.size() != s.size()) throw ShapeError("classify: w/s length mismatch");
  if (w.size() < 2) throw std::invalid_argument("classify: window length >= 2");
  if (th.sigma_s <= 0 || th.sigma_oc <= 0)
    throw std::invalid_argument("classify: sigma thresholds must be positive");

  double s_peak = s.size() ? s.maxCoeff() : 0.0;
  double s_floor = 1e-6 * s_peak;
  Eigen::VectorXd wi(w.size()), si(s.size());
  int n = 0;
  for (int k = 0; k < s.size(); ++k) {
    if (s[k] > s_floor && s[k] > 0) {
      wi[n] = w[k];
      si[n] = s[k];
      ++n;
    }
  }
  if (n == 0) throw FitError("classify: every sample lacks clear-sky signal");
  wi.conservativeResize(n);
  si.conservativeResize(n);

  RegimeDecision d;
  d.used_samples = n;

  double sse_s = (wi - si).squaredNorm();
  if (sse_s <= n * th.mu * th.sigma_s * th.mu * th.sigma_s) {
    d.regime = Regime::Sunny;
    d.alpha_hat = 1.0;
    d.sse = sse_s;
    return d;
  }

  double alpha = estimate_alpha(wi, si);
  double sse_a = (wi - alpha * si).squaredNorm();
  d.alpha_hat = alpha;
  if (alpha > 0 && alpha <= th.alpha_max &&
      sse_a <= n * th.mu_oc * th.sigma_oc * th.mu_oc * th.sigma_oc) {
    d.regime = Regime::Overcast;
    d.sse = sse_a;
    return d;
  }

  d.regime = Regime::PartlyCloudy;
  d.sse = sse_s;
  if (hmm) d.state_path = viterbi_decode(*hmm, wi, si);
  return d;
}

}  // namespace pvregime
