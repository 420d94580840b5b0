// Channel-selection rules for the sensing step.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crmac/core_model.hpp"
#include "crmac/rng.hpp"

namespace crmac {

struct ChannelBandwidths {
  std::vector<double> b;

  static ChannelBandwidths uniform(std::size_t channels, double bw = 1.0) {
    return ChannelBandwidths{std::vector<double>(channels, bw)};
  }

  std::size_t size() const { return b.size(); }
  double operator[](std::size_t n) const { return b[n]; }

  void validate() const {
    for (double x : b) {
      if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("bandwidths must be positive");
    }
  }
};

enum class PolicyKind { random, myopic, csi_myopic };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::random, PolicyKind::myopic,
                                              PolicyKind::csi_myopic};

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::random: return "random";
    case PolicyKind::myopic: return "myopic";
    case PolicyKind::csi_myopic: return "csi-myopic";
  }
  return "unknown";
}

inline PolicyKind parse_policy(std::string_view name) {
  for (PolicyKind k : kAllPolicies) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected random, myopic or csi-myopic)");
}

/// Shannon capacity B * log2(1 + snr / B) of a channel known to be idle.
inline double capacity(double snr, double bw) { return bw * std::log2(1.0 + snr / bw); }

/// Capacity weighted by the probability that the channel is idle.
inline double expected_capacity(double theta, double snr, double bw) {
  return theta * capacity(snr, bw);
}

/// Index of the largest reward; exact ties are broken uniformly at random.
/// Consumes one draw only when more than one maximizer exists.
inline std::size_t argmax_random_tie(std::span<const double> rewards, Rng& rng) {
  if (rewards.empty()) throw std::invalid_argument("no channels to select from");
  double best = rewards[0];
  std::size_t count = 1;
  for (std::size_t n = 1; n < rewards.size(); ++n) {
    if (rewards[n] > best) {
      best = rewards[n];
      count = 1;
    } else if (rewards[n] == best) {
      ++count;
    }
  }
  if (count == 1) {
    for (std::size_t n = 0; n < rewards.size(); ++n) {
      if (rewards[n] == best) return n;
    }
  }
  std::size_t pick = rng.index(count);
  for (std::size_t n = 0; n < rewards.size(); ++n) {
    if (rewards[n] == best && pick-- == 0) return n;
  }
  return rewards.size() - 1;  // unreachable
}

/// Uniform channel; exactly one draw.
inline std::size_t select_random(std::size_t channels, Rng& rng) {
  if (channels == 0) throw std::invalid_argument("no channels to select from");
  return rng.index(channels);
}

/// Conventional myopic rule: maximize theta_n * B_n.
inline std::size_t select_myopic(const BeliefState& b, const ChannelBandwidths& bw, Rng& rng) {
  std::vector<double> reward(b.size());
  for (std::size_t n = 0; n < b.size(); ++n) reward[n] = b[n] * bw[n];
  return argmax_random_tie(reward, rng);
}

/// CSI-aided myopic rule: maximize the expected capacity of each channel.
inline std::size_t select_csi_myopic(const BeliefState& b, std::span<const double> snr_row,
                                     const ChannelBandwidths& bw, Rng& rng) {
  if (snr_row.size() != b.size()) throw std::invalid_argument("SNR row length mismatch");
  std::vector<double> reward(b.size());
  for (std::size_t n = 0; n < b.size(); ++n) reward[n] = expected_capacity(b[n], snr_row[n], bw[n]);
  return argmax_random_tie(reward, rng);
}

/// Dispatches on the policy kind.
inline std::size_t select_channel(PolicyKind kind, const BeliefState& b,
                                  std::span<const double> snr_row, const ChannelBandwidths& bw,
                                  Rng& rng) {
  switch (kind) {
    case PolicyKind::random: return select_random(b.size(), rng);
    case PolicyKind::myopic: return select_myopic(b, bw, rng);
    case PolicyKind::csi_myopic: return select_csi_myopic(b, snr_row, bw, rng);
  }
  throw std::logic_error("unhandled policy kind");
}

}  // namespace crmac
