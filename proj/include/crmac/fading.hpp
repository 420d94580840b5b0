// Block-fading SNR generators: i.i.d. Rayleigh and correlated lognormal shadowing.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "crmac/rng.hpp"

namespace crmac {

inline constexpr std::size_t kDefaultBlockSlots = 20;

/// dB scale factor 10 / ln 10.
inline constexpr double kDbScale = 10.0 / std::numbers::ln10;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Linear received SNR per (pair, channel), constant over one fading block.
class SnrBlock {
 public:
  SnrBlock() = default;
  SnrBlock(std::size_t pairs, std::size_t channels, std::size_t block_index,
           std::size_t block_len_slots)
      : pairs_(pairs),
        channels_(channels),
        block_index_(block_index),
        block_len_slots_(block_len_slots),
        snr_(pairs * channels, 0.0) {}

  std::size_t num_pairs() const { return pairs_; }
  std::size_t num_channels() const { return channels_; }
  std::size_t block_index() const { return block_index_; }
  std::size_t block_len_slots() const { return block_len_slots_; }

  double& at(std::size_t m, std::size_t n) { return snr_[m * channels_ + n]; }
  double at(std::size_t m, std::size_t n) const { return snr_[m * channels_ + n]; }

  std::span<const double> row(std::size_t m) const {
    return {snr_.data() + m * channels_, channels_};
  }
  std::span<const double> values() const { return snr_; }

  /// True if `slot` (zero-based, global) falls inside this block.
  bool covers(std::size_t slot) const {
    return slot / block_len_slots_ == block_index_;
  }

  friend bool operator==(const SnrBlock&, const SnrBlock&) = default;

 private:
  std::size_t pairs_ = 0;
  std::size_t channels_ = 0;
  std::size_t block_index_ = 0;
  std::size_t block_len_slots_ = kDefaultBlockSlots;
  std::vector<double> snr_;
};

struct RayleighParams {
  double mean_snr = 10.0;  ///< linear
};

/// How a pair's shadowing value relates across channels.
enum class ShadowProfile {
  per_channel,  ///< independent draw per channel, correlated across links
  flat,         ///< one draw per pair, replicated over all channels
};

struct ShadowParams {
  double mean_snr = 10.0;  ///< linear mean of the SNR
  double sigma_db = 5.0;
  double rho = 0.2;
  ShadowProfile profile = ShadowProfile::per_channel;
};

/// Exponential SNR draws (Rayleigh amplitude), row-major order.
inline SnrBlock sample_rayleigh_block(std::size_t pairs, std::size_t channels,
                                      const RayleighParams& params, Rng& rng,
                                      std::size_t block_index = 0,
                                      std::size_t block_len_slots = kDefaultBlockSlots) {
  if (pairs == 0 || channels == 0) throw std::invalid_argument("empty SNR block");
  if (!(params.mean_snr > 0.0)) throw std::invalid_argument("mean_snr must be positive");
  SnrBlock block(pairs, channels, block_index, block_len_slots);
  for (std::size_t m = 0; m < pairs; ++m) {
    for (std::size_t n = 0; n < channels; ++n) {
      double g = rng.exponential(params.mean_snr);
      // log1p(-u) is finite for u in [0,1); guard the u == 0 corner.
      block.at(m, n) = g > 0.0 ? g : std::numeric_limits<double>::min();
    }
  }
  return block;
}

/// dB-domain mean that makes the linear mean equal `mean_snr`.
inline double shadow_mean_db(const ShadowParams& params) {
  return linear_to_db(params.mean_snr) - params.sigma_db * params.sigma_db / (2.0 * kDbScale);
}

/// Link correlation matrix with entries rho^|m - m'|.
inline Eigen::MatrixXd correlation_matrix(std::size_t links, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("correlation must be nonnegative");
  if (rho >= 1.0) throw std::domain_error("degenerate correlation");
  const auto dim = static_cast<Eigen::Index>(links);
  Eigen::MatrixXd c(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      c(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return c;
}

/// Lower Cholesky factor of `correlation_matrix(links, rho)`.
inline Eigen::MatrixXd correlation_factor(std::size_t links, double rho) {
  Eigen::LLT<Eigen::MatrixXd> llt(correlation_matrix(links, rho));
  if (llt.info() != Eigen::Success) {
    throw std::logic_error("correlation matrix is not positive definite");
  }
  return llt.matrixL();
}

/// Precomputed sampler for correlated lognormal shadowing.
class ShadowSampler {
 public:
  ShadowSampler(std::size_t pairs, std::size_t channels, const ShadowParams& params)
      : pairs_(pairs),
        channels_(channels),
        params_(params),
        mean_db_(shadow_mean_db(params)),
        factor_(correlation_factor(pairs, params.rho)) {
    if (pairs == 0 || channels == 0) throw std::invalid_argument("empty SNR block");
    if (!(params.mean_snr > 0.0)) throw std::invalid_argument("mean_snr must be positive");
    if (!(params.sigma_db >= 0.0)) throw std::invalid_argument("sigma_db must be nonnegative");
  }

  /// Draws one block. For each channel column (a single column when the
  /// profile is flat) M standard normals are drawn in pair order and coloured
  /// by the Cholesky factor.
  SnrBlock sample(Rng& rng, std::size_t block_index = 0,
                  std::size_t block_len_slots = kDefaultBlockSlots) const {
    SnrBlock block(pairs_, channels_, block_index, block_len_slots);
    const auto dim = static_cast<Eigen::Index>(pairs_);
    Eigen::VectorXd z(dim);
    const std::size_t columns = params_.profile == ShadowProfile::flat ? 1 : channels_;
    for (std::size_t col = 0; col < columns; ++col) {
      for (Eigen::Index m = 0; m < dim; ++m) z(m) = rng.normal();
      const Eigen::VectorXd corr = factor_.triangularView<Eigen::Lower>() * z;
      for (std::size_t m = 0; m < pairs_; ++m) {
        const double snr_db = mean_db_ + params_.sigma_db * corr(static_cast<Eigen::Index>(m));
        const double snr = db_to_linear(snr_db);
        if (params_.profile == ShadowProfile::flat) {
          for (std::size_t n = 0; n < channels_; ++n) block.at(m, n) = snr;
        } else {
          block.at(m, col) = snr;
        }
      }
    }
    return block;
  }

 private:
  std::size_t pairs_;
  std::size_t channels_;
  ShadowParams params_;
  double mean_db_;
  Eigen::MatrixXd factor_;
};

inline SnrBlock sample_shadow_block(std::size_t pairs, std::size_t channels,
                                    const ShadowParams& params, Rng& rng,
                                    std::size_t block_index = 0,
                                    std::size_t block_len_slots = kDefaultBlockSlots) {
  return ShadowSampler(pairs, channels, params).sample(rng, block_index, block_len_slots);
}

}  // namespace crmac
