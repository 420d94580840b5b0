// Primary-user occupancy chains and secondary-user belief tracking.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crmac/rng.hpp"

namespace crmac {

/// Channel occupancy. The numeric values follow the usual {0 busy, 1 idle} code.
enum class ChannelState : int { busy = 0, idle = 1 };

inline constexpr double kStochasticTolerance = 1e-12;

/// Two-state occupancy chain of one channel; state 0 = busy, 1 = idle.
struct TransitionMatrix {
  double p00 = 0.8;
  double p01 = 0.2;
  double p10 = 0.2;
  double p11 = 0.8;

  /// Builds the chain from its two off-diagonal probabilities.
  static TransitionMatrix from_switching(double p01, double p10) {
    TransitionMatrix m{1.0 - p01, p01, p10, 1.0 - p10};
    m.validate();
    return m;
  }

  void validate() const {
    for (double p : {p00, p01, p10, p11}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("transition probability outside [0,1]");
      }
    }
    if (std::abs(p00 + p01 - 1.0) > kStochasticTolerance ||
        std::abs(p10 + p11 - 1.0) > kStochasticTolerance) {
      throw std::invalid_argument("transition matrix is not row-stochastic");
    }
  }

  /// Probability that the next state is idle given the current one.
  double idle_next(ChannelState current) const {
    return current == ChannelState::idle ? p11 : p01;
  }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

/// Symmetric chain used throughout the reference experiments (stay w.p. 0.8).
inline TransitionMatrix reference_matrix() { return TransitionMatrix{0.8, 0.2, 0.2, 0.8}; }

/// Global PU state of all channels together with their chains.
struct PuNetworkState {
  std::vector<ChannelState> states;
  std::vector<TransitionMatrix> matrices;

  std::size_t num_channels() const { return states.size(); }
  bool is_idle(std::size_t n) const { return states[n] == ChannelState::idle; }

  void validate() const {
    if (states.empty() || states.size() != matrices.size()) {
      throw std::invalid_argument("PU network needs one state and one matrix per channel");
    }
  }
};

/// Per-pair conditional idle probabilities, one per channel.
struct BeliefState {
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  double operator[](std::size_t n) const { return theta[n]; }

  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

/// Outcome of sensing a single channel (sensing is error-free).
struct SenseResult {
  std::size_t channel = 0;
  ChannelState observed = ChannelState::busy;
};

/// Long-run idle probability p01 / (p01 + p10).
inline double stationary_belief(const TransitionMatrix& p) {
  const double denom = p.p01 + p.p10;
  if (!(denom > 0.0)) {
    throw std::domain_error("no unique stationary distribution");
  }
  return p.p01 / denom;
}

/// One-step prediction of an unsensed channel's idle probability.
inline double predict_unsensed(double theta, const TransitionMatrix& p) {
  return theta * p.p11 + (1.0 - theta) * p.p01;
}

/// Stationary beliefs, one per channel.
inline BeliefState init_belief(std::span<const TransitionMatrix> matrices) {
  BeliefState b;
  b.theta.reserve(matrices.size());
  for (const auto& m : matrices) b.theta.push_back(stationary_belief(m));
  return b;
}

/// Belief for the next slot after sensing one channel.
///
/// The sensed channel collapses to p11 (seen idle) or p01 (seen busy); every
/// other channel is propagated through its chain.
inline BeliefState update_belief(const BeliefState& b, const SenseResult& r,
                                 std::span<const TransitionMatrix> matrices) {
  if (r.channel >= b.size() || matrices.size() != b.size()) {
    throw std::out_of_range("sensed channel or matrix count does not match belief");
  }
  BeliefState next;
  next.theta.resize(b.size());
  for (std::size_t n = 0; n < b.size(); ++n) {
    const auto& p = matrices[n];
    if (n == r.channel) {
      next.theta[n] = p.idle_next(r.observed);
    } else {
      next.theta[n] = predict_unsensed(b.theta[n], p);
    }
  }
  return next;
}

/// Draws an initial PU state from each channel's stationary distribution.
/// One uniform per channel, channel 0 first.
inline PuNetworkState initial_pu_state(std::span<const TransitionMatrix> matrices, Rng& rng) {
  PuNetworkState s;
  s.matrices.assign(matrices.begin(), matrices.end());
  s.states.reserve(matrices.size());
  for (const auto& m : matrices) {
    s.states.push_back(rng.bernoulli(stationary_belief(m)) ? ChannelState::idle
                                                           : ChannelState::busy);
  }
  s.validate();
  return s;
}

/// Advances every channel one slot; one uniform per channel, channel 0 first.
inline PuNetworkState step_pu_states(const PuNetworkState& s, Rng& rng) {
  PuNetworkState next = s;
  for (std::size_t n = 0; n < s.num_channels(); ++n) {
    const double idle_p = s.matrices[n].idle_next(s.states[n]);
    next.states[n] = rng.uniform() < idle_p ? ChannelState::idle : ChannelState::busy;
  }
  return next;
}

}  // namespace crmac
