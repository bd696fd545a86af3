#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "pvregime/distribution.hpp"

using namespace pvregime;

namespace {

std::vector<PredictiveCdf> continuous_families() {
  return {
      PredictiveCdf::gaussian(350.0, 40.0),
      PredictiveCdf::trunc_gaussian(60.0, 25.0, 0.0, 100.0),
      PredictiveCdf::band_uniform(95.0, 105.0),
      PredictiveCdf::atten_exp(10.0, 0.3),
      PredictiveCdf::atten_exp(500.0, 0.02),
      PredictiveCdf::edge_exp(200.0, 0.05),
  };
}

}  // namespace

TEST(Cdf, FrozenPointValues) {
  PredictiveCdf ae = PredictiveCdf::atten_exp(10.0, 0.3);
  EXPECT_NEAR(ae.cdf(4.0), 0.12156414210793089, 1e-12);
  EXPECT_NEAR(ae.quantile(0.7), 8.881459725923627, 1e-9);
  EXPECT_EQ(ae.cdf(-1.0), 0.0);
  EXPECT_EQ(ae.cdf(10.0), 1.0);

  PredictiveCdf tg = PredictiveCdf::trunc_gaussian(60.0, 25.0, 0.0, 100.0);
  EXPECT_NEAR(tg.cdf(50.0), 0.3589963538887063, 1e-12);
  EXPECT_EQ(tg.cdf(0.0), 0.0);
  EXPECT_EQ(tg.cdf(100.0), 1.0);

  PredictiveCdf ee = PredictiveCdf::edge_exp(200.0, 0.05);
  EXPECT_NEAR(ee.quantile(0.5), 213.86294361119892, 1e-9);
  EXPECT_EQ(ee.cdf(199.0), 0.0);

  PredictiveCdf g = PredictiveCdf::gaussian(100.0, 10.0);
  EXPECT_NEAR(g.quantile(0.975), 100.0 + 10.0 * 1.959963984540054, 1e-7);
}

TEST(Cdf, QuantileInvertsRoundTrip) {
  std::mt19937_64 rng(201);
  std::uniform_real_distribution<double> uni(1e-6, 1.0 - 1e-6);
  for (const auto& f : continuous_families()) {
    for (int i = 0; i < 200; ++i) {
      double p = uni(rng);
      double x = f.quantile(p);
      EXPECT_NEAR(f.cdf(x), p, 1e-9) << "family " << static_cast<int>(f.family);
      EXPECT_NEAR(f.sample(p), x, 0.0);
    }
  }
}

TEST(Cdf, MonotoneNondecreasing) {
  for (const auto& f : continuous_families()) {
    double prev = -1.0;
    for (double x = -50.0; x < 600.0; x += 3.7) {
      double c = f.cdf(x);
      EXPECT_GE(c, prev - 1e-15);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
      prev = c;
    }
  }
}

TEST(Interval, CentralMassIsExact) {
  for (const auto& f : continuous_families()) {
    for (double b : {0.1, 0.5, 0.8}) {
      Interval iv = f.central_interval(b);
      EXPECT_LE(iv.lo, iv.hi);
      EXPECT_NEAR(f.cdf(iv.hi) - f.cdf(iv.lo), 1.0 - b, 1e-9)
          << "family " << static_cast<int>(f.family) << " b " << b;
    }
  }
}

TEST(Interval, ShiftedIntervalKeepsMassAndContainsPoint) {
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (const auto& f : continuous_families()) {
    double lo = f.support_lo(), hi = f.support_hi();
    if (!std::isfinite(lo)) lo = f.mu - 5.0 * f.sigma;
    if (!std::isfinite(hi)) hi = f.quantile(1.0 - 1e-9);
    for (int i = 0; i < 100; ++i) {
      double point = lo + (hi - lo) * uni(rng);
      for (double b : {0.1, 0.5, 0.9}) {
        Interval iv = f.interval_containing(b, point);
        EXPECT_LE(iv.lo, point + 1e-12);
        EXPECT_GE(iv.hi, point - 1e-12);
        EXPECT_NEAR(f.cdf(iv.hi) - f.cdf(iv.lo), 1.0 - b, 1e-9)
            << "family " << static_cast<int>(f.family) << " b " << b << " pt " << point;
      }
    }
  }
}

TEST(Interval, SupportEdgePointsStillWork) {
  PredictiveCdf ae = PredictiveCdf::atten_exp(10.0, 2.0);
  Interval lo_edge = ae.interval_containing(0.2, 0.0);
  EXPECT_LE(lo_edge.lo, 0.0 + 1e-12);
  EXPECT_NEAR(ae.cdf(lo_edge.hi) - ae.cdf(lo_edge.lo), 0.8, 1e-9);
  Interval hi_edge = ae.interval_containing(0.2, 10.0);
  EXPECT_GE(hi_edge.hi, 10.0 - 1e-12);
  EXPECT_NEAR(ae.cdf(hi_edge.hi) - ae.cdf(hi_edge.lo), 0.8, 1e-9);

  PredictiveCdf ee = PredictiveCdf::edge_exp(100.0, 0.1);
  Interval at_s = ee.interval_containing(0.1, 100.0);
  EXPECT_LE(at_s.lo, 100.0);
  EXPECT_NEAR(ee.cdf(at_s.hi) - ee.cdf(at_s.lo), 0.9, 1e-9);
}

TEST(Interval, DegenerateCollapses) {
  PredictiveCdf d = PredictiveCdf::degenerate(42.0);
  Interval iv = d.central_interval(0.1);
  EXPECT_EQ(iv.lo, 42.0);
  EXPECT_EQ(iv.hi, 42.0);
  EXPECT_EQ(d.cdf(41.9), 0.0);
  EXPECT_EQ(d.cdf(42.0), 1.0);
  EXPECT_EQ(d.quantile(0.3), 42.0);
}

TEST(Interval, RejectsBadCoverage) {
  PredictiveCdf g = PredictiveCdf::gaussian(0.0, 1.0);
  EXPECT_THROW(g.central_interval(0.0), std::domain_error);
  EXPECT_THROW(g.central_interval(1.0), std::domain_error);
  EXPECT_THROW(g.quantile(-0.1), std::domain_error);
  EXPECT_THROW(g.quantile(1.1), std::domain_error);
}
