// crsim: command-line front end for the cognitive-radio MAC simulator.
//
//   crsim run   --config <file> [--policy <name>[,<name>...]] [--seeds k]
//               [--master-seed u64] --out <csv> [--timeseries | --steady]
//   crsim sweep --config <file> --param mean_snr_db|rho --values v1,v2,...
//               [--policy ...] [--seeds k] [--master-seed u64] --out <csv>
//               [--timeseries | --steady]
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crmac/crmac.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string policies;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> master_seed;
  std::string out;
  bool timeseries = false;
  bool steady = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Scenario file (key = value)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--policy", o.policies, "random, myopic, csi-myopic, a comma list, or all");
  cmd->add_option("--seeds", o.seeds, "Number of Monte-Carlo runs")->check(CLI::PositiveNumber);
  cmd->add_option("--master-seed", o.master_seed, "Master seed for stream derivation");
  cmd->add_option("--out", o.out, "Output CSV path")->required();
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
  auto* ts = cmd->add_flag("--timeseries", o.timeseries, "Per-slot time-series CSV");
  auto* st = cmd->add_flag("--steady", o.steady, "Steady-state summary CSV");
  ts->excludes(st);
}

std::vector<crmac::PolicyKind> resolve_policies(const std::string& spec,
                                                const crmac::ScenarioConfig& cfg) {
  if (spec.empty()) return {cfg.policy};
  if (spec == "all") return {std::begin(crmac::kAllPolicies), std::end(crmac::kAllPolicies)};
  std::vector<crmac::PolicyKind> out;
  for (const auto& name : crmac::detail::split(spec, ',')) out.push_back(crmac::parse_policy(name));
  return out;
}

crmac::ScenarioConfig load(const CommonOptions& o) {
  auto cfg = crmac::load_config(o.config);
  if (o.seeds) cfg.num_seeds = *o.seeds;
  if (o.master_seed) cfg.master_seed = *o.master_seed;
  cfg.validate();
  return cfg;
}

std::vector<crmac::RunMetrics> run_policies(const crmac::ScenarioConfig& base,
                                            const std::vector<crmac::PolicyKind>& policies,
                                            unsigned threads) {
  std::vector<crmac::RunMetrics> runs;
  for (auto k : policies) {
    auto cfg = base;
    cfg.policy = k;
    auto r = crmac::run_seeds(cfg, threads);
    runs.insert(runs.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return runs;
}

std::vector<crmac::SweepRow> steady_rows(const crmac::ScenarioConfig& cfg,
                                         const std::vector<crmac::RunMetrics>& runs) {
  std::vector<crmac::SweepRow> rows;
  for (std::size_t begin = 0; begin < runs.size(); begin += cfg.num_seeds) {
    std::span<const crmac::RunMetrics> group(runs.data() + begin, cfg.num_seeds);
    const auto agg = crmac::aggregate_runs(group);
    crmac::SweepRow row;
    row.scenario_id = cfg.scenario_id;
    row.policy = group.front().policy;
    row.param_name = "none";
    row.param_value = 0.0;
    row.steady = agg.steady;
    row.steady_per_run = agg.steady_per_run;
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_run(const CommonOptions& o) {
  const auto cfg = load(o);
  const auto policies = resolve_policies(o.policies, cfg);
  const auto runs = run_policies(cfg, policies, o.threads);
  if (o.steady) {
    const auto rows = steady_rows(cfg, runs);
    crmac::write_csv(o.out, rows);
    for (const auto& r : rows) {
      std::cout << crmac::to_string(r.policy) << ": steady-state " << r.steady.mean << " ["
                << r.steady.ci_low << ", " << r.steady.ci_high << "]\n";
    }
  } else {
    crmac::write_csv(o.out, runs);
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& param_name, const std::string& values_text) {
  const auto cfg = load(o);
  const auto param = crmac::parse_sweep_param(param_name);
  std::vector<double> values;
  if (!values_text.empty()) values = crmac::detail::parse_list("--values", values_text);
  const auto policies = o.policies.empty()
                            ? std::vector<crmac::PolicyKind>(std::begin(crmac::kAllPolicies),
                                                             std::end(crmac::kAllPolicies))
                            : resolve_policies(o.policies, cfg);
  if (o.timeseries) {
    std::vector<crmac::RunMetrics> runs;
    for (double v : values) {
      auto point = crmac::with_param(cfg, param, v);
      point.scenario_id = cfg.scenario_id + "@" + param_name + "=" + crmac::format_real(v);
      auto r = run_policies(point, policies, o.threads);
      runs.insert(runs.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    crmac::write_csv(o.out, runs);
    return 0;
  }
  const auto rows = crmac::sweep(cfg, param, values, policies, o.threads);
  crmac::write_csv(o.out, rows);
  for (const auto& r : rows) {
    std::cout << r.param_name << '=' << r.param_value << ' ' << crmac::to_string(r.policy) << ": "
              << r.steady.mean << " [" << r.steady.ci_low << ", " << r.steady.ci_high << "]\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognitive-radio multi-channel MAC simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate one scenario for one or more policies");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string param_name;
  std::string values_text;
  auto* sw = app.add_subcommand("sweep", "Steady-state throughput over a parameter grid");
  add_common(sw, sweep_opts);
  sw->add_option("--param", param_name, "mean_snr_db or rho")->required();
  sw->add_option("--values", values_text, "Comma-separated parameter values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    return cmd_sweep(sweep_opts, param_name, values_text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
