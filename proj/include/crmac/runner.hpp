// Horizon loop, Monte-Carlo aggregation and parameter sweeps.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "crmac/config.hpp"
#include "crmac/core_model.hpp"
#include "crmac/fading.hpp"
#include "crmac/mac.hpp"
#include "crmac/policies.hpp"
#include "crmac/rng.hpp"

namespace crmac {

/// Per-slot time series of one run.
struct RunMetrics {
  std::string scenario_id;
  PolicyKind policy = PolicyKind::csi_myopic;
  std::uint64_t seed = 0;  ///< run index
  std::size_t num_pairs = 1;

  std::vector<double> network_reward;
  std::vector<double> running_norm_throughput;
  std::vector<std::size_t> n_transmitted;
  std::vector<std::size_t> n_lost_contention;
  std::vector<std::size_t> n_slept_busy;
  std::vector<std::size_t> n_blocked;
  std::vector<std::size_t> distinct_channels_used;

  std::size_t horizon() const { return network_reward.size(); }

  /// Mean per-pair reward over the final half of the horizon.
  double steady_state() const {
    const std::size_t t = horizon();
    if (t == 0) return 0.0;
    const std::size_t start = t / 2;
    const double sum = std::accumulate(network_reward.begin() + static_cast<std::ptrdiff_t>(start),
                                       network_reward.end(), 0.0);
    return sum / (static_cast<double>(t - start) * static_cast<double>(num_pairs));
  }

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Fading blocks for one run, drawn lazily from the run's fading stream.
class FadingProcess {
 public:
  FadingProcess(const ScenarioConfig& cfg, Rng rng)
      : cfg_(cfg), rng_(std::move(rng)) {
    if (cfg.fading == FadingModel::lognormal) {
      shadow_.emplace(cfg.num_pairs, cfg.num_channels, cfg.shadow_params());
    }
  }

  /// Block covering `slot`; slots must be visited in nondecreasing order.
  const SnrBlock& at_slot(std::size_t slot) {
    const std::size_t index = slot / cfg_.fading_block_slots;
    while (!current_ || current_->block_index() < index) {
      const std::size_t next = current_ ? current_->block_index() + 1 : 0;
      current_ = draw(next);
    }
    return *current_;
  }

 private:
  SnrBlock draw(std::size_t index) {
    if (shadow_) return shadow_->sample(rng_, index, cfg_.fading_block_slots);
    return sample_rayleigh_block(cfg_.num_pairs, cfg_.num_channels, cfg_.rayleigh_params(), rng_,
                                 index, cfg_.fading_block_slots);
  }

  const ScenarioConfig& cfg_;
  Rng rng_;
  std::optional<ShadowSampler> shadow_;
  std::optional<SnrBlock> current_;
};

/// Reorders the rows of a block: row m of the result is row `order[m]` of `b`.
inline SnrBlock permute_rows(const SnrBlock& b, std::span<const std::size_t> order) {
  SnrBlock out(b.num_pairs(), b.num_channels(), b.block_index(), b.block_len_slots());
  for (std::size_t m = 0; m < b.num_pairs(); ++m) {
    for (std::size_t n = 0; n < b.num_channels(); ++n) out.at(m, n) = b.at(order[m], n);
  }
  return out;
}

/// Called after every slot with the PU state and fading block the slot saw.
using SlotObserver = std::function<void(std::size_t slot, const PuNetworkState&, const SnrBlock&,
                                        const SlotResult&)>;

struct RunOptions {
  /// If set, simulated pair m receives the fading row of pair `pair_order[m]`.
  /// This relabels the pairs without changing any random draw.
  std::vector<std::size_t> pair_order;
  SlotObserver observer;
};

/// Simulates one Monte-Carlo run of `cfg` under `cfg.policy`.
/// All randomness is derived from (cfg.master_seed, run_index).
inline RunMetrics run_scenario(const ScenarioConfig& cfg, std::uint64_t run_index,
                               const RunOptions& options = {}) {
  cfg.validate();
  const std::span<const std::size_t> pair_order = options.pair_order;
  if (!pair_order.empty() && pair_order.size() != cfg.num_pairs) {
    throw std::invalid_argument("pair_order must list every pair");
  }

  Rng pu_rng(cfg.master_seed, run_index, StreamRole::pu);
  Rng policy_rng(cfg.master_seed, run_index, StreamRole::policy);
  Rng mac_rng(cfg.master_seed, run_index, StreamRole::mac);
  FadingProcess fading(cfg, Rng(cfg.master_seed, run_index, StreamRole::fading));

  const auto matrices = cfg.channel_matrices();
  const auto bandwidths = cfg.channel_bandwidths();
  const auto graph = cfg.graph();

  PuNetworkState pu = initial_pu_state(matrices, pu_rng);
  std::vector<BeliefState> beliefs(cfg.num_pairs, init_belief(matrices));
  Databases dbs(graph.num_nodes());

  RunMetrics metrics;
  metrics.scenario_id = cfg.scenario_id;
  metrics.policy = cfg.policy;
  metrics.seed = run_index;
  metrics.num_pairs = cfg.num_pairs;
  const std::size_t horizon = cfg.horizon_slots;
  metrics.network_reward.reserve(horizon);
  metrics.running_norm_throughput.reserve(horizon);

  double cumulative = 0.0;
  std::optional<SnrBlock> permuted;
  for (std::size_t slot = 0; slot < horizon; ++slot) {
    const SnrBlock* snr = &fading.at_slot(slot);
    if (!pair_order.empty()) {
      if (!permuted || permuted->block_index() != snr->block_index()) {
        permuted = permute_rows(*snr, pair_order);
      }
      snr = &*permuted;
    }
    const SlotEnvironment env{pu, *snr, cfg.policy, bandwidths, graph, slot};
    SlotResult r = run_slot(env, beliefs, dbs, policy_rng, mac_rng);
    if (options.observer) options.observer(slot, pu, *snr, r);
    beliefs = std::move(r.beliefs);

    double reward = 0.0;
    std::size_t tx = 0, lost = 0, slept = 0, blocked = 0;
    std::vector<bool> used(cfg.num_channels, false);
    for (const auto& o : r.outcomes) {
      reward += o.reward;
      switch (o.verdict) {
        case Verdict::transmitted:
          ++tx;
          used[o.chosen_channel] = true;
          break;
        case Verdict::lost_contention: ++lost; break;
        case Verdict::slept_busy: ++slept; break;
        case Verdict::blocked_by_database: ++blocked; break;
      }
    }
    cumulative += reward;
    metrics.network_reward.push_back(reward);
    metrics.running_norm_throughput.push_back(
        cumulative / (static_cast<double>(slot + 1) * static_cast<double>(cfg.num_pairs)));
    metrics.n_transmitted.push_back(tx);
    metrics.n_lost_contention.push_back(lost);
    metrics.n_slept_busy.push_back(slept);
    metrics.n_blocked.push_back(blocked);
    metrics.distinct_channels_used.push_back(
        static_cast<std::size_t>(std::count(used.begin(), used.end(), true)));

    pu = step_pu_states(pu, pu_rng);
  }
  return metrics;
}

/// Runs `count` independent jobs on a small thread pool; results keep job order.
template <typename Result, typename Job>
std::vector<Result> parallel_map(std::size_t count, Job job, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::optional<Result>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(job(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Runs seeds 0..num_seeds-1 of `cfg`.
inline std::vector<RunMetrics> run_seeds(const ScenarioConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  return parallel_map<RunMetrics>(
      cfg.num_seeds, [&](std::size_t i) { return run_scenario(cfg, i); }, threads);
}

/// Mean with a normal-approximation 95% interval.
struct Estimate {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;

  double half_width() const { return 0.5 * (ci_high - ci_low); }
};

inline constexpr double kZ95 = 1.959963984540054;

inline Estimate estimate(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("cannot estimate from no samples");
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double half = 0.0;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    half = kZ95 * std::sqrt(ss / (n - 1.0) / n);
  }
  return {mean, mean - half, mean + half, xs.size()};
}

struct Aggregate {
  std::vector<Estimate> per_slot;       ///< running normalized throughput
  std::vector<double> steady_per_run;
  Estimate steady;
};

inline Aggregate aggregate_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs needs at least one run");
  const std::size_t horizon = runs.front().horizon();
  for (const auto& r : runs) {
    if (r.horizon() != horizon) throw std::invalid_argument("runs have mismatched horizons");
  }
  Aggregate agg;
  std::vector<double> column(runs.size());
  agg.per_slot.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < runs.size(); ++i) column[i] = runs[i].running_norm_throughput[t];
    agg.per_slot.push_back(estimate(column));
  }
  for (const auto& r : runs) agg.steady_per_run.push_back(r.steady_state());
  agg.steady = estimate(agg.steady_per_run);
  return agg;
}

enum class SweepParam { mean_snr_db, rho };

inline std::string_view to_string(SweepParam p) {
  return p == SweepParam::mean_snr_db ? "mean_snr_db" : "rho";
}

inline SweepParam parse_sweep_param(std::string_view name) {
  if (name == "mean_snr_db") return SweepParam::mean_snr_db;
  if (name == "rho") return SweepParam::rho;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) +
                              "' (expected mean_snr_db or rho)");
}

/// Copy of `cfg` with one parameter replaced.
inline ScenarioConfig with_param(ScenarioConfig cfg, SweepParam p, double value) {
  if (p == SweepParam::mean_snr_db) {
    cfg.mean_snr_db = value;
  } else {
    if (cfg.fading != FadingModel::lognormal) throw ConfigError("rho", "parameter not applicable");
    cfg.rho = value;
  }
  cfg.validate();
  return cfg;
}

struct SweepRow {
  std::string scenario_id;
  PolicyKind policy = PolicyKind::csi_myopic;
  std::string param_name;
  double param_value = 0.0;
  Estimate steady;
  std::vector<double> steady_per_run;  ///< indexed by run, shared across policies
};

/// One aggregate per (value, policy). Run r of every point uses the same
/// master seed and run index, so PU and fading draws are shared.
inline std::vector<SweepRow> sweep(const ScenarioConfig& cfg, SweepParam param,
                                   std::span<const double> values,
                                   std::span<const PolicyKind> policies, unsigned threads = 0) {
  if (param == SweepParam::rho && cfg.fading != FadingModel::lognormal) {
    throw ConfigError("rho", "parameter not applicable");
  }
  struct Point {
    ScenarioConfig cfg;
    double value;
  };
  std::vector<Point> points;
  for (double v : values) {
    for (PolicyKind k : policies) {
      ScenarioConfig c = with_param(cfg, param, v);
      c.policy = k;
      points.push_back({std::move(c), v});
    }
  }
  const std::size_t seeds = cfg.num_seeds;
  auto steady = parallel_map<double>(
      points.size() * seeds,
      [&](std::size_t job) { return run_scenario(points[job / seeds].cfg, job % seeds).steady_state(); },
      threads);

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    SweepRow row;
    row.scenario_id = cfg.scenario_id;
    row.policy = points[p].cfg.policy;
    row.param_name = std::string(to_string(param));
    row.param_value = points[p].value;
    row.steady_per_run.assign(steady.begin() + static_cast<std::ptrdiff_t>(p * seeds),
                              steady.begin() + static_cast<std::ptrdiff_t>((p + 1) * seeds));
    row.steady = estimate(row.steady_per_run);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace crmac
