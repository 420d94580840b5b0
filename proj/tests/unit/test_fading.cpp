#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "crmac/fading.hpp"
#include "crmac/runner.hpp"

using namespace crmac;

namespace {

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Closed-form lower Cholesky factor of the AR(1) correlation matrix.
double ar1_factor(std::size_t i, std::size_t j, double rho) {
  if (j > i) return 0.0;
  const double lag = std::pow(rho, static_cast<double>(i - j));
  return j == 0 ? lag : lag * std::sqrt(1.0 - rho * rho);
}

}  // namespace

// =============================================================================
// Rayleigh
// =============================================================================

TEST(RayleighBlock, MeanAndMedian) {
  Rng rng(1);
  const auto block = sample_rayleigh_block(1000, 1000, RayleighParams{10.0}, rng);
  std::vector<double> v(block.values().begin(), block.values().end());
  EXPECT_NEAR(mean(v), 10.0, 0.05);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  EXPECT_NEAR(v[v.size() / 2], 10.0 * std::log(2.0), 0.05);
}

TEST(RayleighBlock, EntriesIndependent) {
  Rng rng(2);
  std::vector<double> a, b;
  for (int i = 0; i < 100000; ++i) {
    const auto block = sample_rayleigh_block(2, 2, RayleighParams{10.0}, rng);
    a.push_back(block.at(0, 0));
    b.push_back(block.at(1, 1));
  }
  EXPECT_NEAR(pearson(a, b), 0.0, 0.02);
}

TEST(RayleighBlock, PositiveAndRowMajorDrawOrder) {
  Rng a(3), b(3);
  const auto block = sample_rayleigh_block(3, 4, RayleighParams{2.0}, a);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_GT(block.at(m, n), 0.0);
      EXPECT_DOUBLE_EQ(block.at(m, n), b.exponential(2.0));
    }
  }
}

TEST(RayleighBlock, RejectsBadInput) {
  Rng rng(1);
  EXPECT_THROW(sample_rayleigh_block(0, 3, {}, rng), std::invalid_argument);
  EXPECT_THROW(sample_rayleigh_block(2, 3, RayleighParams{0.0}, rng), std::invalid_argument);
}

// =============================================================================
// Lognormal shadowing
// =============================================================================

TEST(ShadowMeanDb, CorrectedMean) {
  EXPECT_NEAR(shadow_mean_db({10.0, 5.0, 0.2}), 7.121768633757442, 1e-12);
  EXPECT_NEAR(shadow_mean_db({1.0, 5.0, 0.2}), -2.8782313662425576, 1e-12);
  EXPECT_DOUBLE_EQ(shadow_mean_db({10.0, 0.0, 0.2}), 10.0);
}

TEST(ShadowMeanDb, LognormalMomentIdentityGivesLinearMean) {
  for (double mu : {0.5, 1.0, 10.0, 100.0}) {
    for (double sigma : {0.0, 2.0, 5.0, 8.0}) {
      const double mdb = shadow_mean_db({mu, sigma, 0.0});
      const double linear_mean = std::exp(mdb / kDbScale + sigma * sigma / (2.0 * kDbScale * kDbScale));
      EXPECT_NEAR(linear_mean, mu, 1e-9 * mu);
    }
  }
}

TEST(CorrelationMatrix, Structure) {
  const auto c0 = correlation_matrix(5, 0.0);
  EXPECT_TRUE(c0.isApprox(Eigen::MatrixXd::Identity(5, 5)));
  const auto c = correlation_matrix(4, 0.2);
  EXPECT_NEAR(c(0, 2), 0.04, 1e-15);
  EXPECT_NEAR(c(3, 1), 0.04, 1e-15);
  for (double rho : {0.0, 0.3, 0.99}) {
    const auto m = correlation_matrix(6, rho);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(m(i, i), 1.0);
    EXPECT_TRUE(m.isApprox(m.transpose()));
  }
}

TEST(CorrelationMatrix, DegenerateRhoThrows) {
  EXPECT_THROW(correlation_matrix(3, 1.0), std::domain_error);
  EXPECT_THROW(correlation_matrix(3, 1.5), std::domain_error);
}

TEST(CorrelationFactor, ReconstructsAndMatchesClosedForm) {
  for (std::size_t m : {1u, 2u, 7u, 20u, 64u}) {
    for (double rho : {0.0, 0.2, 0.5, 0.9, 0.99}) {
      const auto l = correlation_factor(m, rho);
      const auto c = correlation_matrix(m, rho);
      EXPECT_LE((l * l.transpose() - c).cwiseAbs().maxCoeff(), 1e-10) << "M=" << m << " rho=" << rho;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          ASSERT_NEAR(l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), ar1_factor(i, j, rho), 1e-10);
        }
      }
    }
  }
}

TEST(ShadowBlock, MomentsAndCorrelation) {
  const ShadowParams params{10.0, 5.0, 0.2, ShadowProfile::flat};
  const ShadowSampler sampler(3, 4, params);
  Rng rng(8);
  std::vector<double> lin0, db0, db1, db2;
  for (int i = 0; i < 100000; ++i) {
    const auto block = sampler.sample(rng);
    lin0.push_back(block.at(0, 0));
    db0.push_back(linear_to_db(block.at(0, 0)));
    db1.push_back(linear_to_db(block.at(1, 0)));
    db2.push_back(linear_to_db(block.at(2, 0)));
  }
  EXPECT_NEAR(mean(lin0), 10.0, 0.2);
  EXPECT_NEAR(stddev(db0), 5.0, 0.05);
  EXPECT_NEAR(mean(db0), shadow_mean_db(params), 0.05);
  EXPECT_NEAR(pearson(db0, db1), 0.2, 0.02);
  EXPECT_NEAR(pearson(db0, db2), 0.04, 0.02);
}

TEST(ShadowBlock, FlatProfileReplicatesAcrossChannels) {
  Rng rng(9);
  const auto block = sample_shadow_block(5, 7, {10.0, 5.0, 0.2, ShadowProfile::flat}, rng);
  for (std::size_t m = 0; m < 5; ++m) {
    for (std::size_t n = 1; n < 7; ++n) EXPECT_EQ(block.at(m, n), block.at(m, 0));
  }
}

TEST(ShadowBlock, PerChannelProfileVariesAcrossChannelsWithSameMoments) {
  const ShadowSampler sampler(2, 3, {10.0, 5.0, 0.5, ShadowProfile::per_channel});
  Rng rng(10);
  std::vector<double> c0, c1, l0, l1;
  for (int i = 0; i < 100000; ++i) {
    const auto block = sampler.sample(rng);
    c0.push_back(linear_to_db(block.at(0, 0)));
    c1.push_back(linear_to_db(block.at(0, 1)));
    l1.push_back(linear_to_db(block.at(1, 0)));
    l0.push_back(block.at(0, 2));
  }
  EXPECT_NEAR(pearson(c0, c1), 0.0, 0.02);  // independent across channels
  EXPECT_NEAR(pearson(c0, l1), 0.5, 0.02);  // correlated across links
  EXPECT_NEAR(stddev(c1), 5.0, 0.05);
  EXPECT_NEAR(mean(l0), 10.0, 0.2);
}

TEST(ShadowBlock, ZeroSpreadIsConstantMean) {
  Rng rng(11);
  for (auto profile : {ShadowProfile::flat, ShadowProfile::per_channel}) {
    const auto block = sample_shadow_block(4, 3, {10.0, 0.0, 0.5, profile}, rng);
    for (double g : block.values()) EXPECT_NEAR(g, 10.0, 1e-12);
  }
}

// =============================================================================
// Block process
// =============================================================================

TEST(FadingProcess, ConstantWithinBlockAndSeedDeterministic) {
  ScenarioConfig cfg;
  cfg.num_pairs = 3;
  cfg.num_channels = 5;
  cfg.fading_block_slots = 20;
  for (auto model : {FadingModel::rayleigh, FadingModel::lognormal}) {
    cfg.fading = model;
    FadingProcess a(cfg, Rng(5)), b(cfg, Rng(5));
    for (std::size_t block = 0; block < 5; ++block) {
      const SnrBlock first = a.at_slot(block * 20);
      EXPECT_TRUE(first.covers(block * 20 + 19));
      EXPECT_EQ(first.block_index(), block);
      for (std::size_t s = block * 20; s < block * 20 + 20; ++s) {
        ASSERT_EQ(a.at_slot(s), first);
        ASSERT_EQ(b.at_slot(s), first);
      }
    }
  }
}
