#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "pvregime/clearsky.hpp"
#include "pvregime/detect.hpp"
#include "pvregime/distribution.hpp"
#include "pvregime/regimes.hpp"
#include "pvregime/timeseries.hpp"

namespace pvregime {

// A contiguous slice of a day's daylight, as a fraction of its span.
struct BlockSpec {
  double begin_frac = 0.0;
  double end_frac = 1.0;
  Regime regime = Regime::Sunny;
  double alpha = 0.5;  // overcast attenuation level
};

using DayPattern = std::vector<BlockSpec>;

struct ScenarioConfig {
  int n_days = 1;
  int sample_period_min = 15;
  double nameplate = 0.0;
  CivilDate start_date{2024, 1, 1};
  ClearSkyModel clearsky;
  double sigma_s = 0.0;
  double sigma_oc = 0.0;
  PartlyCloudyHmm hmm;
  std::vector<DayPattern> pattern;  // cycled across days
  std::uint64_t seed = 0;
};

struct TruthBlock {
  int day = 0;
  int k_lo = 0, k_hi = 0;  // inclusive grid span
  Regime regime = Regime::Sunny;
  double alpha = 1.0;
};

struct GroundTruth {
  std::vector<TruthBlock> blocks;
  // Chain state per (day, grid index); -1 outside partly-cloudy blocks.
  std::vector<std::vector<int>> states;
};

struct SynthResult {
  PowerSeries series;
  GroundTruth truth;
};

namespace detail {

inline void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.n_days < 1) throw std::invalid_argument("scenario: n_days must be >= 1");
  if (cfg.nameplate <= 0.0) throw std::invalid_argument("scenario: nameplate must be positive");
  if (cfg.pattern.empty()) throw std::invalid_argument("scenario: pattern must not be empty");
  if (cfg.sigma_s <= 0.0 || cfg.sigma_oc <= 0.0)
    throw std::invalid_argument("scenario: sigmas must be positive");
  for (const auto& day : cfg.pattern) {
    if (day.empty()) throw std::invalid_argument("scenario: empty day pattern");
    double cursor = 0.0;
    for (const auto& b : day) {
      if (std::abs(b.begin_frac - cursor) > 1e-9)
        throw std::invalid_argument("scenario: blocks must tile [0,1] without gaps");
      if (!(b.end_frac > b.begin_frac))
        throw std::invalid_argument("scenario: block must have positive width");
      if (b.regime == Regime::Overcast && !(b.alpha > 0.0 && b.alpha <= 1.0))
        throw std::invalid_argument("scenario: overcast alpha must lie in (0,1]");
      cursor = b.end_frac;
    }
    if (std::abs(cursor - 1.0) > 1e-9)
      throw std::invalid_argument("scenario: blocks must cover the full daylight span");
  }
}

// Truncated Gaussian on [0, s] by inverse CDF; no rejection loop, so a block
// with extreme parameters still costs one draw per sample.
inline double sample_trunc_gaussian(std::mt19937_64& rng, double mu, double sigma, double s) {
  double a = normal_cdf((0.0 - mu) / sigma), b = normal_cdf((s - mu) / sigma);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double q = a + uni(rng) * (b - a);
  q = std::clamp(q, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
  return std::clamp(mu + sigma * normal_quantile(q), 0.0, s);
}

inline int step_chain(std::mt19937_64& rng, const Eigen::MatrixXd& transition, int state) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(rng);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < transition.cols(); ++j) {
    acc += transition(state, j);
    if (u <= acc) return static_cast<int>(j);
  }
  return static_cast<int>(transition.cols()) - 1;
}

inline double emit_state(std::mt19937_64& rng, const PartlyCloudyHmm& hmm, int state,
                         double s) {
  std::uniform_real_distribution<double> uni(std::nextafter(0.0, 1.0),
                                             std::nextafter(1.0, 0.0));
  if (state == 0) {
    // Band sample kept at or below clear sky so attenuation-side support
    // holds exactly in the generated data.
    double lo = std::max(0.0, s - hmm.epsilon_s);
    return lo + uni(rng) * (s - lo);
  }
  // atten_exp is already the law of w itself (drop s-w truncated exponential)
  if (int lag = hmm.single_lag(state); lag >= 0) {
    double tap = std::max(hmm.filter.taps[lag],
                          1e-9 * std::max(1.0, hmm.filter.taps.maxCoeff()));
    return PredictiveCdf::atten_exp(s, hmm.lambda_z / tap).sample(uni(rng));
  }
  if (state == hmm.ab_state())
    return PredictiveCdf::atten_exp(s, hmm.lambda_ab / s).sample(uni(rng));
  return PredictiveCdf::edge_exp(s, hmm.lambda_ae / s).sample(uni(rng));
}

}  // namespace detail

// Draw a power series from the generative model, one scheduled regime block
// at a time, with the block layout and chain states recorded as ground truth.
inline SynthResult generate(const ScenarioConfig& cfg) {
  detail::validate_scenario(cfg);
  int n_per_day = 1440 / cfg.sample_period_min;
  int half = n_per_day / 2;
  SynthResult out{PowerSeries(cfg.start_date, cfg.n_days, cfg.sample_period_min, cfg.nameplate),
                  GroundTruth{}};
  out.truth.states.assign(static_cast<std::size_t>(cfg.n_days),
                          std::vector<int>(static_cast<std::size_t>(n_per_day), -1));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  int lo = cfg.clearsky.daylight_lo, hi = cfg.clearsky.daylight_hi;
  if (hi < lo) throw std::invalid_argument("scenario: clear-sky model has no daylight");
  int span = hi - lo + 1;

  for (int day = 0; day < cfg.n_days; ++day) {
    const DayPattern& pat = cfg.pattern[static_cast<std::size_t>(day) % cfg.pattern.size()];
    // Night samples are genuine zeros, not gaps.
    for (int k = -half; k < lo; ++k) out.series.set(day, k, 0.0);
    for (int k = hi + 1; k < half; ++k) out.series.set(day, k, 0.0);

    for (const auto& block : pat) {
      int k_lo = lo + static_cast<int>(std::floor(block.begin_frac * span));
      int k_hi = lo + static_cast<int>(std::floor(block.end_frac * span)) - 1;
      k_hi = std::min(k_hi, hi);
      if (k_hi < k_lo) continue;
      out.truth.blocks.push_back(TruthBlock{day, k_lo, k_hi, block.regime, block.alpha});

      int state = 0;
      for (int k = k_lo; k <= k_hi; ++k) {
        double s = cfg.clearsky.evaluate(k);
        double w = 0.0;
        switch (block.regime) {
          case Regime::Sunny:
            w = s + cfg.sigma_s * gauss(rng);
            break;
          case Regime::Overcast:
            w = detail::sample_trunc_gaussian(rng, block.alpha * s, cfg.sigma_oc, s);
            break;
          case Regime::PartlyCloudy:
            w = detail::emit_state(rng, cfg.hmm, state, s);
            out.truth.states[static_cast<std::size_t>(day)]
                            [static_cast<std::size_t>(k + half)] = state;
            state = detail::step_chain(rng, cfg.hmm.transition, state);
            break;
        }
        out.series.set(day, k, w);
      }
    }
  }
  return out;
}

struct ConfusionMatrix {
  int counts[3][3] = {{0}};  // [truth][decided]
  int total = 0;

  double accuracy() const {
    if (total == 0) return kNaN;
    int hit = counts[0][0] + counts[1][1] + counts[2][2];
    return static_cast<double>(hit) / total;
  }
  double class_accuracy(Regime r) const {
    int i = static_cast<int>(r);
    int row = counts[i][0] + counts[i][1] + counts[i][2];
    if (row == 0) return kNaN;
    return static_cast<double>(counts[i][i]) / row;
  }
};

inline ConfusionMatrix label_accuracy(const std::vector<Regime>& truth,
                                      const std::vector<Regime>& decided) {
  if (truth.size() != decided.size()) throw ShapeError("label_accuracy: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    cm.counts[static_cast<int>(truth[i])][static_cast<int>(decided[i])]++;
    cm.total++;
  }
  return cm;
}

// Truth regime for a window [k1, k2] on a day, or nullopt when the window
// straddles a block boundary.
inline std::optional<Regime> window_truth(const GroundTruth& truth, int day, int k1, int k2) {
  for (const auto& b : truth.blocks) {
    if (b.day != day) continue;
    if (k1 >= b.k_lo && k2 <= b.k_hi) return b.regime;
  }
  return std::nullopt;
}

}  // namespace pvregime
