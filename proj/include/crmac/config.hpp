// Scenario description and its flat key-value file format.
//
//   # comment
//   key = value
//
// Unknown keys are rejected. See configs/rayleigh.conf for the full key list.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crmac/core_model.hpp"
#include "crmac/fading.hpp"
#include "crmac/mac.hpp"
#include "crmac/policies.hpp"

namespace crmac {

/// Validation failure tied to one configuration field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class FadingModel { rayleigh, lognormal };

inline std::string_view to_string(FadingModel f) {
  return f == FadingModel::rayleigh ? "rayleigh" : "lognormal";
}

inline std::string_view to_string(ShadowProfile p) {
  return p == ShadowProfile::flat ? "flat" : "per-channel";
}

struct ScenarioConfig {
  std::string scenario_id = "scenario";
  std::size_t num_pairs = 20;
  std::size_t num_channels = 40;
  std::size_t horizon_slots = 2000;
  std::size_t fading_block_slots = kDefaultBlockSlots;
  /// One matrix shared by every channel, or one per channel.
  std::vector<TransitionMatrix> matrices{reference_matrix()};
  FadingModel fading = FadingModel::rayleigh;
  double mean_snr_db = 10.0;
  double sigma_db = 5.0;
  double rho = 0.2;
  ShadowProfile shadow_profile = ShadowProfile::per_channel;
  PolicyKind policy = PolicyKind::csi_myopic;
  /// One bandwidth shared by every channel, or one per channel.
  std::vector<double> bandwidths{1.0};
  /// Empty means the complete graph.
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::size_t num_seeds = 50;
  std::uint64_t master_seed = 1;

  double mean_snr() const { return db_to_linear(mean_snr_db); }

  std::vector<TransitionMatrix> channel_matrices() const {
    if (matrices.size() == 1) return std::vector<TransitionMatrix>(num_channels, matrices[0]);
    return matrices;
  }

  ChannelBandwidths channel_bandwidths() const {
    if (bandwidths.size() == 1) return ChannelBandwidths::uniform(num_channels, bandwidths[0]);
    return ChannelBandwidths{bandwidths};
  }

  NeighborGraph graph() const {
    if (edges.empty()) return NeighborGraph::complete(num_pairs);
    return NeighborGraph::from_edges(num_pairs, edges);
  }

  RayleighParams rayleigh_params() const { return {mean_snr()}; }
  ShadowParams shadow_params() const { return {mean_snr(), sigma_db, rho, shadow_profile}; }

  void validate() const {
    if (scenario_id.empty()) throw ConfigError("scenario_id", "must not be empty");
    if (num_pairs < 1) throw ConfigError("num_pairs", "must be at least 1");
    if (num_channels < 1) throw ConfigError("num_channels", "must be at least 1");
    if (horizon_slots < 1) throw ConfigError("horizon_slots", "must be at least 1");
    if (fading_block_slots < 1) throw ConfigError("fading_block_slots", "must be at least 1");
    if (num_seeds < 1) throw ConfigError("num_seeds", "must be at least 1");
    if (matrices.size() != 1 && matrices.size() != num_channels) {
      throw ConfigError("transition_matrices", "need one matrix or one per channel");
    }
    for (const auto& m : matrices) {
      try {
        m.validate();
        (void)stationary_belief(m);
      } catch (const std::exception& e) {
        throw ConfigError("transition_matrices", e.what());
      }
    }
    if (!std::isfinite(mean_snr_db)) throw ConfigError("mean_snr_db", "must be finite");
    if (fading == FadingModel::lognormal) {
      if (!(sigma_db >= 0.0) || !std::isfinite(sigma_db)) {
        throw ConfigError("sigma_db", "must be finite and nonnegative");
      }
      if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho", "must lie in [0, 1)");
    }
    if (bandwidths.size() != 1 && bandwidths.size() != num_channels) {
      throw ConfigError("bandwidths", "need one value or one per channel");
    }
    for (double b : bandwidths) {
      if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("bandwidths", "must be positive");
    }
    for (auto [a, b] : edges) {
      if (a >= 2 * num_pairs || b >= 2 * num_pairs) {
        throw ConfigError("neighbor_graph", "edge node id out of range");
      }
      if (a == b) throw ConfigError("neighbor_graph", "self-edges are not allowed");
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError(field, "cannot parse '" + text + "'");
  return value;
}

inline std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number<double>(field, item));
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "scenario_id") {
    cfg.scenario_id = value;
  } else if (key == "num_pairs") {
    cfg.num_pairs = parse_number<std::size_t>(key, value);
  } else if (key == "num_channels") {
    cfg.num_channels = parse_number<std::size_t>(key, value);
  } else if (key == "horizon_slots") {
    cfg.horizon_slots = parse_number<std::size_t>(key, value);
  } else if (key == "fading_block_slots") {
    cfg.fading_block_slots = parse_number<std::size_t>(key, value);
  } else if (key == "transition_matrices") {
    // "p01:p10" for a shared chain, or a comma list of them, one per channel.
    cfg.matrices.clear();
    for (const auto& item : detail::split(value, ',')) {
      const auto parts = detail::split(item, ':');
      if (parts.size() != 2) throw ConfigError(key, "expected p01:p10, got '" + item + "'");
      const double p01 = parse_number<double>(key, parts[0]);
      const double p10 = parse_number<double>(key, parts[1]);
      try {
        cfg.matrices.push_back(TransitionMatrix::from_switching(p01, p10));
      } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
      }
    }
  } else if (key == "fading_model") {
    if (value == "rayleigh") cfg.fading = FadingModel::rayleigh;
    else if (value == "lognormal") cfg.fading = FadingModel::lognormal;
    else throw ConfigError(key, "expected rayleigh or lognormal, got '" + value + "'");
  } else if (key == "mean_snr_db") {
    cfg.mean_snr_db = parse_number<double>(key, value);
  } else if (key == "sigma_db") {
    cfg.sigma_db = parse_number<double>(key, value);
  } else if (key == "rho") {
    cfg.rho = parse_number<double>(key, value);
  } else if (key == "shadow_profile") {
    if (value == "per-channel") cfg.shadow_profile = ShadowProfile::per_channel;
    else if (value == "flat") cfg.shadow_profile = ShadowProfile::flat;
    else throw ConfigError(key, "expected per-channel or flat, got '" + value + "'");
  } else if (key == "policy") {
    try {
      cfg.policy = parse_policy(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "bandwidths") {
    cfg.bandwidths = detail::parse_list(key, value);
  } else if (key == "neighbor_graph") {
    // "complete" or an edge list "a-b, c-d" over node ids (TX_m = 2m, RX_m = 2m+1).
    cfg.edges.clear();
    if (value != "complete") {
      for (const auto& item : detail::split(value, ',')) {
        const auto ends = detail::split(item, '-');
        if (ends.size() != 2) throw ConfigError(key, "expected a-b, got '" + item + "'");
        cfg.edges.emplace_back(parse_number<NodeId>(key, ends[0]), parse_number<NodeId>(key, ends[1]));
      }
      if (cfg.edges.empty()) throw ConfigError(key, "empty edge list");
    }
  } else if (key == "num_seeds") {
    cfg.num_seeds = parse_number<std::size_t>(key, value);
  } else if (key == "master_seed") {
    cfg.master_seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    apply_setting(cfg, detail::trim(std::string_view(body).substr(0, eq)),
                  detail::trim(std::string_view(body).substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace crmac
