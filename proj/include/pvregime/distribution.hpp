#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pvregime/common.hpp"

namespace pvregime {

// Predictive CDF families attached to forecast steps. One regime-tagged
// closed-form family per step keeps quantiles, intervals, and scores exact.
enum class CdfFamily {
  Degenerate,     // point mass at `value`
  Gaussian,       // N(mu, sigma²)
  TruncGaussian,  // N(mu, sigma²) restricted to [lo, hi]
  BandUniform,    // uniform on [lo, hi]
  AttenExp,       // w = s - u, u ~ Exp(rate) truncated to [0, s]
  EdgeExp,        // w = s + v, v ~ Exp(rate)
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PredictiveCdf {
  CdfFamily family = CdfFamily::Degenerate;
  double value = 0.0;             // Degenerate
  double mu = 0.0, sigma = 1.0;   // Gaussian, TruncGaussian
  double lo = 0.0, hi = 0.0;      // TruncGaussian / BandUniform bounds
  double s = 0.0, rate = 1.0;     // AttenExp, EdgeExp

  static PredictiveCdf degenerate(double v) {
    PredictiveCdf c;
    c.family = CdfFamily::Degenerate;
    c.value = v;
    return c;
  }
  static PredictiveCdf gaussian(double mu, double sigma) {
    PredictiveCdf c;
    c.family = CdfFamily::Gaussian;
    c.mu = mu;
    c.sigma = sigma;
    return c;
  }
  static PredictiveCdf trunc_gaussian(double mu, double sigma, double lo, double hi) {
    PredictiveCdf c;
    c.family = CdfFamily::TruncGaussian;
    c.mu = mu;
    c.sigma = sigma;
    c.lo = lo;
    c.hi = hi;
    return c;
  }
  static PredictiveCdf band_uniform(double lo, double hi) {
    PredictiveCdf c;
    c.family = CdfFamily::BandUniform;
    c.lo = lo;
    c.hi = hi;
    return c;
  }
  static PredictiveCdf atten_exp(double s, double rate) {
    PredictiveCdf c;
    c.family = CdfFamily::AttenExp;
    c.s = s;
    c.rate = rate;
    return c;
  }
  static PredictiveCdf edge_exp(double s, double rate) {
    PredictiveCdf c;
    c.family = CdfFamily::EdgeExp;
    c.s = s;
    c.rate = rate;
    return c;
  }

  double support_lo() const {
    switch (family) {
      case CdfFamily::Degenerate: return value;
      case CdfFamily::Gaussian: return -std::numeric_limits<double>::infinity();
      case CdfFamily::TruncGaussian: return lo;
      case CdfFamily::BandUniform: return lo;
      case CdfFamily::AttenExp: return 0.0;
      case CdfFamily::EdgeExp: return s;
    }
    return 0.0;
  }
  double support_hi() const {
    switch (family) {
      case CdfFamily::Degenerate: return value;
      case CdfFamily::Gaussian: return std::numeric_limits<double>::infinity();
      case CdfFamily::TruncGaussian: return hi;
      case CdfFamily::BandUniform: return hi;
      case CdfFamily::AttenExp: return s;
      case CdfFamily::EdgeExp: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  double cdf(double x) const {
    switch (family) {
      case CdfFamily::Degenerate:
        return x >= value ? 1.0 : 0.0;
      case CdfFamily::Gaussian:
        return normal_cdf((x - mu) / sigma);
      case CdfFamily::TruncGaussian: {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        double a = normal_cdf((lo - mu) / sigma), b = normal_cdf((hi - mu) / sigma);
        return (normal_cdf((x - mu) / sigma) - a) / (b - a);
      }
      case CdfFamily::BandUniform:
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        return (x - lo) / (hi - lo);
      case CdfFamily::AttenExp: {
        if (x <= 0) return 0.0;
        if (x >= s) return 1.0;
        double e0 = std::exp(-rate * s);
        return (std::exp(-rate * (s - x)) - e0) / (1.0 - e0);
      }
      case CdfFamily::EdgeExp:
        if (x <= s) return 0.0;
        return 1.0 - std::exp(-rate * (x - s));
    }
    return 0.0;
  }

  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::domain_error("quantile: p must be in [0,1]");
    switch (family) {
      case CdfFamily::Degenerate:
        return value;
      case CdfFamily::Gaussian:
        if (p <= 0.0 || p >= 1.0)
          throw std::domain_error("quantile: open interval required for Gaussian");
        return mu + sigma * normal_quantile(p);
      case CdfFamily::TruncGaussian: {
        double a = normal_cdf((lo - mu) / sigma), b = normal_cdf((hi - mu) / sigma);
        double q = a + p * (b - a);
        if (q <= 0.0) return lo;
        if (q >= 1.0) return hi;
        return std::clamp(mu + sigma * normal_quantile(q), lo, hi);
      }
      case CdfFamily::BandUniform:
        return lo + p * (hi - lo);
      case CdfFamily::AttenExp: {
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return s;
        double e0 = std::exp(-rate * s);
        return s + std::log(e0 + p * (1.0 - e0)) / rate;
      }
      case CdfFamily::EdgeExp:
        if (p <= 0.0) return s;
        if (p >= 1.0)
          throw std::domain_error("quantile: p = 1 unbounded for exponential tail");
        return s - std::log1p(-p) / rate;
    }
    return 0.0;
  }

  // Inverse-CDF sampling; u uniform on (0,1).
  double sample(double u) const {
    if (family == CdfFamily::EdgeExp && u >= 1.0) u = std::nextafter(1.0, 0.0);
    return quantile(u);
  }

  // Central (equal-tail) interval of coverage 1-btilde.
  Interval central_interval(double btilde) const {
    if (!(btilde > 0.0 && btilde < 1.0))
      throw std::domain_error("interval: btilde must be in (0,1)");
    if (family == CdfFamily::Degenerate) return Interval{value, value};
    return Interval{quantile(btilde / 2.0), quantile(1.0 - btilde / 2.0)};
  }

  // Equal-mass interval shifted minimally off-center so it contains `point`;
  // cdf(hi) - cdf(lo) stays exactly 1-btilde. The point forecast is not
  // always the median of the predictive family (the partly-cloudy point is
  // reconstructed, not a distribution functional), so a plain central
  // interval could miss it.
  Interval interval_containing(double btilde, double point) const {
    Interval c = central_interval(btilde);
    if (family == CdfFamily::Degenerate) return c;
    if (point >= c.lo && point <= c.hi) return c;
    double mass = 1.0 - btilde;
    if (point < c.lo) {
      double tau = std::clamp(cdf(point), 0.0, btilde);
      double lo2 = tau > 1e-15 ? std::min(quantile(tau), point) : point;
      return Interval{lo2, quantile(tau + mass)};
    }
    double tau = std::clamp(cdf(point), mass, 1.0);
    double hi2 = tau < 1.0 - 1e-15 ? std::max(quantile(tau), point) : point;
    return Interval{quantile(tau - mass), hi2};
  }
};

}  // namespace pvregime
