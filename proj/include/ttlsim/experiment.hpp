#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttlsim/adaptive.hpp"
#include "ttlsim/metrics.hpp"
#include "ttlsim/simulate.hpp"
#include "ttlsim/workload.hpp"

namespace ttlsim {

struct WorkloadConfig {
  enum class Kind { Poisson, Markov, Trace };
  Kind kind = Kind::Poisson;
  PopularitySpec poisson;
  MarkovLabelSpec markov;
  RareMode rare;
  std::string trace_path;
};

struct PolicyConfig {
  enum class Kind { Dttl, Fttl, FixedTtl, Lru, StaticFttl };
  Kind kind = Kind::Dttl;
  ControllerConfig controller;
  double fixed_ttl = 0;
  std::uint64_t lru_capacity_bytes = 0;
  std::map<int, StaticFttlPolicy::Pair> static_ttls;
};

struct ExperimentConfig {
  WorkloadConfig workload;
  PolicyConfig policy;
  MetricsConfig metrics;
  std::uint64_t requests = 0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::uint64_t arrival_log_stride = 0;  // 0 = no per-arrival log

  nlohmann::json source_json;  // canonical form, hashed into every CSV
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
std::string config_hash_hex(const ExperimentConfig& cfg);
std::string fnv1a_hex(const std::string& data);

std::unique_ptr<RequestSource> make_source(const ExperimentConfig& cfg);
std::unique_ptr<RequestSource> make_source(const ExperimentConfig& cfg,
                                           std::uint64_t request_limit);
std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg);

// Single run: writes report.csv and windows.csv (and arrivals.csv when a
// stride is configured) under out_dir when non-empty.
MetricsReport run_simulate(const ExperimentConfig& cfg);

struct SweepRow {
  double target = 0;
  std::string policy;
  double achieved_hit_rate = 0;
  double avg_cache_bytes = 0;
  double normalized_size = 0;
  std::string status = "ok";
};

// Hit-rate-curve sweep: per target run the single-level controller, then
// optionally the filtering controller with s* = fraction x measured size.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg,
                                const std::vector<double>& targets,
                                std::optional<double> size_fraction);

struct CompareCheRow {
  double target = 0;
  double che_ttl = 0;
  double fixed_ohr = 0;
  double fixed_avg_bytes = 0;
  double lru_ohr = 0;
  double lru_size_bytes = 0;
  double dttl_ohr = 0;
  double dttl_avg_bytes = 0;
  double fttl_ohr = 0;
  double fttl_avg_bytes = 0;
  bool feasible = true;
};

std::vector<CompareCheRow> run_compare_che(const ExperimentConfig& cfg,
                                           const std::vector<double>& targets,
                                           double estimate_fraction);

struct RobustnessRow {
  double step_value = 0;
  double achieved_ohr = 0;
  double avg_cache_bytes = 0;
  double outage_fraction = 0;
};

std::vector<RobustnessRow> run_robustness(const ExperimentConfig& cfg,
                                          const std::string& apply_to,
                                          const std::vector<double>& step_values);

// CSV writers (header row plus a config-hash comment line).
void write_sweep_csv(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows,
                     std::ostream& out);
void write_compare_che_csv(const ExperimentConfig& cfg,
                           const std::vector<CompareCheRow>& rows,
                           std::ostream& out);
void write_robustness_csv(const ExperimentConfig& cfg,
                          const std::vector<RobustnessRow>& rows,
                          std::ostream& out);
void write_report_csv(const ExperimentConfig& cfg, const MetricsReport& report,
                      std::ostream& out);
void write_windows_csv(const ExperimentConfig& cfg, const MetricsReport& report,
                       std::ostream& out);

}  // namespace ttlsim
