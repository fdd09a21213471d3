#include "ttlsim/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "ttlsim/baselines.hpp"
#include "ttlsim/errors.hpp"
#include "ttlsim/trace_io.hpp"

namespace ttlsim {

namespace {

using nlohmann::json;

double get_number(const json& j, const char* key, std::optional<double> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  if (!j.at(key).is_number())
    throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string get_string(const json& j, const char* key,
                       std::optional<std::string> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

RareMode parse_rare_mode(const json& j) {
  RareMode m;
  if (j.is_null()) return m;
  std::string kind = get_string(j, "kind", std::string("one_hit_wonders"));
  if (kind == "one_hit_wonders") {
    m.kind = RareMode::Kind::OneHitWonders;
  } else if (kind == "flash_crowds") {
    m.kind = RareMode::Kind::FlashCrowds;
    m.burst_size = static_cast<int>(get_number(j, "burst_size", 5.0));
    m.budget_coefficient = get_number(j, "budget_coefficient", 1.0);
    m.budget_exponent = get_number(j, "budget_exponent", 0.5);
    m.rarity_window = get_number(j, "rarity_window_s", 60.0);
  } else {
    throw ConfigError("unknown rare mode '" + kind + "'");
  }
  m.validate();
  return m;
}

PopularitySpec parse_popularity(const json& j) {
  PopularitySpec spec;
  spec.total_rate = get_number(j, "rate_per_s");
  if (!j.contains("types") || !j.at("types").is_array())
    throw ConfigError("poisson workload needs a 'types' array");
  for (const auto& tj : j.at("types")) {
    TypeSpec t;
    t.type_id = static_cast<int>(get_number(tj, "type_id", 1.0));
    t.rare_fraction = get_number(tj, "rare_fraction", 0.0);
    t.rare_size_bytes =
        static_cast<std::uint64_t>(get_number(tj, "rare_size_bytes", 1.0));
    if (tj.contains("zipf")) {
      const auto& zj = tj.at("zipf");
      ZipfParams z;
      z.object_count = static_cast<std::size_t>(get_number(zj, "count"));
      z.exponent = get_number(zj, "exponent");
      z.recurrent_mass = get_number(zj, "mass", 1.0 - t.rare_fraction);
      z.object_size_bytes =
          static_cast<std::uint64_t>(get_number(zj, "object_size_bytes", 1.0));
      t.objects = expand_zipf(t.type_id, z);
    } else if (tj.contains("objects")) {
      for (const auto& oj : tj.at("objects")) {
        RecurrentObject o;
        o.id = get_string(oj, "id");
        o.probability = get_number(oj, "probability");
        o.size_bytes = static_cast<std::uint64_t>(get_number(oj, "size_bytes", 1.0));
        t.objects.push_back(std::move(o));
      }
    }
    spec.types.push_back(std::move(t));
  }
  spec.validate();
  return spec;
}

InterArrival parse_interarrival(const json& j) {
  InterArrival ia;
  std::string family = get_string(j, "family", std::string("exponential"));
  ia.rate = get_number(j, "rate_per_s");
  if (family == "exponential") {
    ia.family = InterArrival::Family::Exponential;
  } else if (family == "weibull") {
    ia.family = InterArrival::Family::Weibull;
    ia.weibull_shape = get_number(j, "shape");
  } else if (family == "hyperexp2") {
    ia.family = InterArrival::Family::HyperExp2;
    ia.hyper_p = get_number(j, "p");
    ia.hyper_mean_ratio = get_number(j, "mean_ratio");
  } else {
    throw ConfigError("unknown inter-arrival family '" + family + "'");
  }
  ia.validate();
  return ia;
}

MarkovLabelSpec parse_markov(const json& j) {
  MarkovLabelSpec spec;
  spec.inter_arrival = parse_interarrival(j.at("interarrival"));
  for (const auto& sj : j.at("recurrent_states")) {
    MarkovState s;
    s.id = get_string(sj, "id");
    s.type_id = static_cast<int>(get_number(sj, "type_id", 1.0));
    s.size_bytes = static_cast<std::uint64_t>(get_number(sj, "size_bytes", 1.0));
    spec.recurrent_states.push_back(std::move(s));
  }
  if (j.contains("rare_states")) {
    for (const auto& sj : j.at("rare_states")) {
      int t = static_cast<int>(get_number(sj, "type_id", 1.0));
      spec.rare_state_types.push_back(t);
      spec.rare_size_bytes[t] =
          static_cast<std::uint64_t>(get_number(sj, "rare_size_bytes", 1.0));
    }
  }
  if (!j.contains("transition") || !j.at("transition").is_array())
    throw ConfigError("markov workload needs a 'transition' matrix");
  for (const auto& row : j.at("transition"))
    spec.transition.push_back(row.get<std::vector<double>>());
  spec.validate();
  return spec;
}

StepSchedule parse_step(const json& j) {
  StepSchedule s;
  std::string kind = get_string(j, "kind", std::string("decaying"));
  if (kind == "decaying") {
    s = StepSchedule::decaying(get_number(j, "eta0"), get_number(j, "alpha", 1.0));
  } else if (kind == "constant") {
    s = StepSchedule::constant(get_number(j, "value"));
  } else {
    throw ConfigError("unknown step schedule '" + kind + "'");
  }
  return s;
}

ControllerConfig parse_controller(const json& j) {
  ControllerConfig c;
  std::string mode = get_string(j, "mode", std::string("ohr"));
  if (mode == "ohr")
    c.mode = HitRateMode::ObjectHitRate;
  else if (mode == "bhr")
    c.mode = HitRateMode::ByteHitRate;
  else
    throw ConfigError("mode must be 'ohr' or 'bhr'");
  if (!j.contains("targets") || !j.at("targets").is_array())
    throw ConfigError("controller needs a 'targets' array");
  for (const auto& tj : j.at("targets")) {
    int t = static_cast<int>(get_number(tj, "type_id", 1.0));
    TypeTargets tt;
    tt.hit_rate = get_number(tj, "hit_rate");
    tt.normalized_size = get_number(tj, "normalized_size_s", 0.0);
    tt.ttl_bound = get_number(tj, "ttl_bound_s", 1e7);
    c.targets[t] = tt;
  }
  c.epsilon = get_number(j, "epsilon", 0.1);
  // Defaults: hand-tuned constant steps, the size step scaled by the size
  // target and the running mean object size.
  c.eta = StepSchedule::constant(1e-2);
  c.eta_s = StepSchedule::constant(1e-9);
  c.scale_size_step = true;
  if (j.contains("eta")) c.eta = parse_step(j.at("eta"));
  if (j.contains("eta_s")) c.eta_s = parse_step(j.at("eta_s"));
  if (j.contains("scale_size_step"))
    c.scale_size_step = j.at("scale_size_step").get<bool>();
  c.normalize_byte_weight = j.value("normalize_byte_weight", false);
  c.initial_vartheta = get_number(j, "initial_vartheta", 0.0);
  c.initial_vartheta_s = get_number(j, "initial_vartheta_s", 0.0);
  return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  cfg.source_json = j;

  const auto& wj = j.at("workload");
  std::string wkind = get_string(wj, "kind");
  if (wkind == "poisson") {
    cfg.workload.kind = WorkloadConfig::Kind::Poisson;
    cfg.workload.poisson = parse_popularity(wj);
    cfg.workload.rare = parse_rare_mode(wj.value("rare_mode", json()));
  } else if (wkind == "markov") {
    cfg.workload.kind = WorkloadConfig::Kind::Markov;
    cfg.workload.markov = parse_markov(wj);
    cfg.workload.rare = parse_rare_mode(wj.value("rare_mode", json()));
  } else if (wkind == "trace") {
    cfg.workload.kind = WorkloadConfig::Kind::Trace;
    cfg.workload.trace_path = get_string(wj, "path");
    if (!std::filesystem::exists(cfg.workload.trace_path))
      throw ConfigError("trace does not exist: " + cfg.workload.trace_path);
  } else {
    throw ConfigError("unknown workload kind '" + wkind + "'");
  }

  const auto& pj = j.at("policy");
  std::string pkind = get_string(pj, "kind");
  if (pkind == "dttl") {
    cfg.policy.kind = PolicyConfig::Kind::Dttl;
    cfg.policy.controller = parse_controller(pj);
    cfg.policy.controller.validate(false);
  } else if (pkind == "fttl") {
    cfg.policy.kind = PolicyConfig::Kind::Fttl;
    cfg.policy.controller = parse_controller(pj);
    cfg.policy.controller.validate(true);
  } else if (pkind == "fixed_ttl") {
    cfg.policy.kind = PolicyConfig::Kind::FixedTtl;
    cfg.policy.fixed_ttl = get_number(pj, "ttl_s");
    if (cfg.policy.fixed_ttl < 0) throw ConfigError("ttl_s must be >= 0");
  } else if (pkind == "lru") {
    cfg.policy.kind = PolicyConfig::Kind::Lru;
    cfg.policy.lru_capacity_bytes =
        static_cast<std::uint64_t>(get_number(pj, "capacity_bytes"));
  } else if (pkind == "static_fttl") {
    cfg.policy.kind = PolicyConfig::Kind::StaticFttl;
    for (const auto& tj : pj.at("targets")) {
      int t = static_cast<int>(get_number(tj, "type_id", 1.0));
      StaticFttlPolicy::Pair p;
      p.theta = get_number(tj, "deep_ttl_s");
      p.theta_s = get_number(tj, "shallow_ttl_s");
      cfg.policy.static_ttls[t] = p;
    }
  } else {
    throw ConfigError("unknown policy kind '" + pkind + "'");
  }

  if (j.contains("metrics")) {
    const auto& mj = j.at("metrics");
    cfg.metrics.window_seconds = get_number(mj, "window_seconds", 7200.0);
    cfg.metrics.outage_threshold = get_number(mj, "outage_threshold", 0.05);
    if (cfg.metrics.window_seconds <= 0)
      throw ConfigError("window_seconds must be positive");
  }
  if (cfg.policy.controller.normalize_byte_weight) {
    ControllerConfig& ctl = cfg.policy.controller;
    if (pj.contains("max_size_bytes")) {
      ctl.max_size_bytes =
          static_cast<std::uint64_t>(get_number(pj, "max_size_bytes"));
    } else if (cfg.workload.kind == WorkloadConfig::Kind::Poisson) {
      ctl.max_size_bytes = cfg.workload.poisson.max_size_bytes();
    } else if (cfg.workload.kind == WorkloadConfig::Kind::Markov) {
      std::uint64_t m = 0;
      for (const auto& s : cfg.workload.markov.recurrent_states)
        m = std::max(m, s.size_bytes);
      for (const auto& [t, s] : cfg.workload.markov.rare_size_bytes)
        m = std::max(m, s);
      ctl.max_size_bytes = m;
    } else {
      throw ConfigError(
          "normalize_byte_weight on a trace workload needs an explicit "
          "max_size_bytes");
    }
    if (ctl.max_size_bytes == 0)
      throw ConfigError("max_size_bytes must be positive");
  }
  cfg.requests = static_cast<std::uint64_t>(get_number(j, "requests"));
  if (cfg.requests == 0) throw ConfigError("requests must be >= 1");
  cfg.seed = static_cast<std::uint64_t>(get_number(j, "seed", 1.0));
  cfg.out_dir = get_string(j, "out", std::string(""));
  cfg.arrival_log_stride =
      static_cast<std::uint64_t>(get_number(j, "arrival_log_stride", 0.0));
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_experiment_config(j);
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  return fnv1a_hex(cfg.source_json.dump() + "|" + std::to_string(cfg.seed) +
                   "|" + std::to_string(cfg.requests));
}

std::unique_ptr<RequestSource> make_source(const ExperimentConfig& cfg) {
  return make_source(cfg, cfg.requests);
}

std::unique_ptr<RequestSource> make_source(const ExperimentConfig& cfg,
                                           std::uint64_t request_limit) {
  switch (cfg.workload.kind) {
    case WorkloadConfig::Kind::Poisson:
      return std::make_unique<PoissonGenerator>(cfg.workload.poisson,
                                                cfg.workload.rare, cfg.seed,
                                                request_limit);
    case WorkloadConfig::Kind::Markov:
      return std::make_unique<MarkovGenerator>(cfg.workload.markov,
                                               cfg.workload.rare, cfg.seed,
                                               request_limit);
    case WorkloadConfig::Kind::Trace:
      return std::make_unique<LimitSource>(
          std::make_unique<TraceReader>(cfg.workload.trace_path), request_limit);
  }
  throw ConfigError("bad workload kind");
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg) {
  switch (cfg.kind) {
    case PolicyConfig::Kind::Dttl:
      return std::make_unique<DttlPolicy>(cfg.controller);
    case PolicyConfig::Kind::Fttl:
      return std::make_unique<FttlPolicy>(cfg.controller);
    case PolicyConfig::Kind::FixedTtl:
      return std::make_unique<FixedTtlPolicy>(cfg.fixed_ttl);
    case PolicyConfig::Kind::Lru:
      return std::make_unique<LruPolicy>(cfg.lru_capacity_bytes);
    case PolicyConfig::Kind::StaticFttl:
      return std::make_unique<StaticFttlPolicy>(cfg.static_ttls);
  }
  throw ConfigError("bad policy kind");
}

namespace {

std::map<int, double> hit_targets_of(const PolicyConfig& p) {
  std::map<int, double> targets;
  if (p.kind == PolicyConfig::Kind::Dttl || p.kind == PolicyConfig::Kind::Fttl)
    for (const auto& [t, tt] : p.controller.targets) targets[t] = tt.hit_rate;
  return targets;
}

MetricsReport run_one(const ExperimentConfig& cfg, std::ostream* arrival_log) {
  auto source = make_source(cfg);
  auto policy = make_policy(cfg.policy);
  SimulationOptions opts;
  opts.metrics = cfg.metrics;
  opts.hit_rate_targets = hit_targets_of(cfg.policy);
  opts.arrival_log = arrival_log;
  opts.arrival_log_stride = cfg.arrival_log_stride ? cfg.arrival_log_stride : 1;
  return run_simulation(*source, *policy, opts);
}

void hash_comment(const ExperimentConfig& cfg, std::ostream& out) {
  out << "# config_hash=" << config_hash_hex(cfg) << '\n';
}

}  // namespace

void write_report_csv(const ExperimentConfig& cfg, const MetricsReport& report,
                      std::ostream& out) {
  hash_comment(cfg, out);
  out << "type_id,requests,hits,bytes,hit_bytes,ohr,bhr,normalized_size_s,"
         "eq2_normalized_size_s,avg_cache_bytes,outage_fraction,"
         "final_theta,final_theta_s,final_vartheta,final_vartheta_s\n";
  for (const auto& [t, tm] : report.types) {
    out << t << ',' << tm.requests << ',' << tm.hits << ',' << tm.bytes << ','
        << tm.hit_bytes << ',' << format_double(tm.ohr) << ','
        << format_double(tm.bhr) << ',' << format_double(tm.normalized_size)
        << ',' << format_double(tm.eq2_normalized_size) << ','
        << format_double(tm.avg_cache_bytes) << ','
        << format_double(tm.outage_fraction) << ','
        << format_double(tm.final_theta) << ',' << format_double(tm.final_theta_s)
        << ',' << format_double(tm.final_vartheta) << ','
        << format_double(tm.final_vartheta_s) << '\n';
  }
  out << "all," << report.requests << ',' << report.hits << ",,,"
      << format_double(report.ohr) << ',' << format_double(report.bhr) << ",,,"
      << format_double(report.avg_cache_bytes) << ','
      << format_double(report.outage_fraction) << ",,,,\n";
}

void write_windows_csv(const ExperimentConfig& cfg, const MetricsReport& report,
                       std::ostream& out) {
  hash_comment(cfg, out);
  out << "window_index,start_time_s,type_id,requests,hits,bytes,hit_bytes,"
         "hit_rate,byte_hit_rate,mean_theta,mean_theta_s\n";
  for (const auto& w : report.windows) {
    out << w.index << ',' << format_double(w.start_time) << ',' << w.type_id
        << ',' << w.requests << ',' << w.hits << ',' << w.bytes << ','
        << w.hit_bytes << ',' << format_double(w.hit_rate) << ','
        << format_double(w.byte_hit_rate) << ',' << format_double(w.mean_theta)
        << ',' << format_double(w.mean_theta_s) << '\n';
  }
}

MetricsReport run_simulate(const ExperimentConfig& cfg) {
  std::optional<std::ofstream> arrivals;
  namespace fs = std::filesystem;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    if (cfg.arrival_log_stride > 0)
      arrivals.emplace(fs::path(cfg.out_dir) / "arrivals.csv");
  }
  MetricsReport report = run_one(cfg, arrivals ? &*arrivals : nullptr);
  if (!cfg.out_dir.empty()) {
    std::ofstream rep(fs::path(cfg.out_dir) / "report.csv");
    write_report_csv(cfg, report, rep);
    std::ofstream win(fs::path(cfg.out_dir) / "windows.csv");
    write_windows_csv(cfg, report, win);
  }
  return report;
}

namespace {

// Runs the paired d-TTL / f-TTL experiment for one target. The filtering
// controller's size target is fraction x the measured single-level size.
struct TargetPairResult {
  MetricsReport dttl;
  std::optional<MetricsReport> fttl;
};

ExperimentConfig with_target(const ExperimentConfig& base, double target,
                             PolicyConfig::Kind kind) {
  ExperimentConfig cfg = base;
  cfg.policy.kind = kind;
  for (auto& [t, tt] : cfg.policy.controller.targets) tt.hit_rate = target;
  return cfg;
}

TargetPairResult run_target_pair(const ExperimentConfig& base, double target,
                                 std::optional<double> size_fraction) {
  TargetPairResult out;
  ExperimentConfig dcfg = with_target(base, target, PolicyConfig::Kind::Dttl);
  dcfg.out_dir.clear();
  out.dttl = run_one(dcfg, nullptr);
  if (size_fraction) {
    ExperimentConfig fcfg = with_target(base, target, PolicyConfig::Kind::Fttl);
    fcfg.out_dir.clear();
    for (auto& [t, tt] : fcfg.policy.controller.targets) {
      auto it = out.dttl.types.find(t);
      double measured = it != out.dttl.types.end() ? it->second.normalized_size : 0;
      tt.normalized_size = *size_fraction * measured;
    }
    out.fttl = run_one(fcfg, nullptr);
  }
  return out;
}

double primary_type_hit_rate(const MetricsReport& rep, HitRateMode mode) {
  return mode == HitRateMode::ObjectHitRate ? rep.ohr : rep.bhr;
}

double aggregate_normalized_size(const MetricsReport& rep) {
  double bytes = 0;
  for (const auto& [t, tm] : rep.types) bytes += static_cast<double>(tm.bytes);
  return bytes > 0 ? rep.avg_cache_bytes * rep.horizon / bytes : 0;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg,
                                const std::vector<double>& targets,
                                std::optional<double> size_fraction) {
  if (cfg.policy.kind != PolicyConfig::Kind::Dttl &&
      cfg.policy.kind != PolicyConfig::Kind::Fttl)
    throw ConfigError("sweep requires an adaptive policy config");
  std::vector<std::future<std::vector<SweepRow>>> futures;
  for (double target : targets) {
    futures.push_back(std::async(std::launch::async, [&, target] {
      std::vector<SweepRow> rows;
      try {
        TargetPairResult pair = run_target_pair(cfg, target, size_fraction);
        HitRateMode mode = cfg.policy.controller.mode;
        rows.push_back({target, "dttl", primary_type_hit_rate(pair.dttl, mode),
                        pair.dttl.avg_cache_bytes,
                        aggregate_normalized_size(pair.dttl), "ok"});
        if (pair.fttl)
          rows.push_back({target, "fttl", primary_type_hit_rate(*pair.fttl, mode),
                          pair.fttl->avg_cache_bytes,
                          aggregate_normalized_size(*pair.fttl), "ok"});
      } catch (const std::exception& e) {
        rows.push_back({target, "dttl", 0, 0, 0, std::string("error: ") + e.what()});
      }
      return rows;
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& f : futures)
    for (auto& r : f.get()) rows.push_back(std::move(r));
  return rows;
}

std::vector<CompareCheRow> run_compare_che(const ExperimentConfig& cfg,
                                           const std::vector<double>& targets,
                                           double estimate_fraction) {
  if (cfg.policy.kind != PolicyConfig::Kind::Dttl &&
      cfg.policy.kind != PolicyConfig::Kind::Fttl)
    throw ConfigError("compare-che requires an adaptive policy config");
  if (estimate_fraction <= 0 || estimate_fraction > 1)
    throw ConfigError("estimation fraction must be in (0, 1]");
  auto prefix_n = static_cast<std::uint64_t>(
      static_cast<double>(cfg.requests) * estimate_fraction);
  if (prefix_n == 0) throw ConfigError("estimation prefix is empty");

  // Rates from the prefix over the prefix duration.
  std::vector<Request> prefix;
  {
    auto src = make_source(cfg, prefix_n);
    prefix = drain(*src);
  }
  if (prefix.empty()) throw ConfigError("workload produced no requests");
  double horizon = prefix.back().arrival_time;
  RateEstimate rates = estimate_rates_from_trace(prefix, horizon);
  prefix.clear();
  prefix.shrink_to_fit();

  HitRateMode mode = cfg.policy.kind == PolicyConfig::Kind::Dttl ||
                             cfg.policy.kind == PolicyConfig::Kind::Fttl
                         ? cfg.policy.controller.mode
                         : HitRateMode::ObjectHitRate;

  std::vector<std::future<CompareCheRow>> futures;
  for (double target : targets) {
    futures.push_back(std::async(std::launch::async, [&, target] {
      CompareCheRow row;
      row.target = target;
      CheSolution che;
      try {
        che = che_ttl_for_target_hitrate(rates, target, mode);
      } catch (const InfeasibleError& e) {
        std::cerr << "compare-che: target " << target << " infeasible: "
                  << e.what() << '\n';
        row.feasible = false;
        return row;
      }
      row.che_ttl = che.ttl;
      row.lru_size_bytes = che.expected_size_bytes;

      ExperimentConfig fixed_cfg = cfg;
      fixed_cfg.out_dir.clear();
      fixed_cfg.policy = PolicyConfig{};
      fixed_cfg.policy.kind = PolicyConfig::Kind::FixedTtl;
      fixed_cfg.policy.fixed_ttl = che.ttl;
      MetricsReport fixed = run_one(fixed_cfg, nullptr);
      row.fixed_ohr = mode == HitRateMode::ObjectHitRate ? fixed.ohr : fixed.bhr;
      row.fixed_avg_bytes = fixed.avg_cache_bytes;

      ExperimentConfig lru_cfg = cfg;
      lru_cfg.out_dir.clear();
      lru_cfg.policy = PolicyConfig{};
      lru_cfg.policy.kind = PolicyConfig::Kind::Lru;
      lru_cfg.policy.lru_capacity_bytes = static_cast<std::uint64_t>(
          std::max(1.0, std::ceil(che.expected_size_bytes)));
      MetricsReport lru = run_one(lru_cfg, nullptr);
      row.lru_ohr = mode == HitRateMode::ObjectHitRate ? lru.ohr : lru.bhr;

      TargetPairResult pair = run_target_pair(cfg, target, 0.5);
      row.dttl_ohr = primary_type_hit_rate(pair.dttl, mode);
      row.dttl_avg_bytes = pair.dttl.avg_cache_bytes;
      if (pair.fttl) {
        row.fttl_ohr = primary_type_hit_rate(*pair.fttl, mode);
        row.fttl_avg_bytes = pair.fttl->avg_cache_bytes;
      }
      return row;
    }));
  }
  std::vector<CompareCheRow> rows;
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

std::vector<RobustnessRow> run_robustness(const ExperimentConfig& cfg,
                                          const std::string& apply_to,
                                          const std::vector<double>& step_values) {
  if (cfg.policy.kind != PolicyConfig::Kind::Dttl &&
      cfg.policy.kind != PolicyConfig::Kind::Fttl)
    throw ConfigError("robustness requires an adaptive policy config");
  if (apply_to != "eta" && apply_to != "eta_s")
    throw ConfigError("apply_to must be 'eta' or 'eta_s'");

  std::vector<std::future<RobustnessRow>> futures;
  for (double v : step_values) {
    futures.push_back(std::async(std::launch::async, [&, v] {
      ExperimentConfig run_cfg = cfg;
      run_cfg.out_dir.clear();
      StepSchedule step = StepSchedule::constant(v);
      if (apply_to == "eta")
        run_cfg.policy.controller.eta = step;
      else
        run_cfg.policy.controller.eta_s = step;
      MetricsReport rep = run_one(run_cfg, nullptr);
      return RobustnessRow{v, rep.ohr, rep.avg_cache_bytes, rep.outage_fraction};
    }));
  }
  std::vector<RobustnessRow> rows;
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

void write_sweep_csv(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows,
                     std::ostream& out) {
  hash_comment(cfg, out);
  out << "target,policy,achieved_hit_rate,avg_cache_bytes,normalized_size_s,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& c : status)
      if (c == ',' || c == '\n') c = ';';
    out << format_double(r.target) << ',' << r.policy << ','
        << format_double(r.achieved_hit_rate) << ','
        << format_double(r.avg_cache_bytes) << ','
        << format_double(r.normalized_size) << ',' << status << '\n';
  }
}

void write_compare_che_csv(const ExperimentConfig& cfg,
                           const std::vector<CompareCheRow>& rows,
                           std::ostream& out) {
  hash_comment(cfg, out);
  out << "target,che_ttl_s,fixed_ttl_ohr,fixed_ttl_avg_bytes,lru_ohr,"
         "lru_size_bytes,dttl_ohr,dttl_avg_bytes,fttl_ohr,fttl_avg_bytes\n";
  for (const auto& r : rows) {
    out << format_double(r.target) << ',';
    if (!r.feasible) {
      out << "nan,nan,nan,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    out << format_double(r.che_ttl) << ',' << format_double(r.fixed_ohr) << ','
        << format_double(r.fixed_avg_bytes) << ',' << format_double(r.lru_ohr)
        << ',' << format_double(r.lru_size_bytes) << ','
        << format_double(r.dttl_ohr) << ',' << format_double(r.dttl_avg_bytes)
        << ',' << format_double(r.fttl_ohr) << ','
        << format_double(r.fttl_avg_bytes) << '\n';
  }
}

void write_robustness_csv(const ExperimentConfig& cfg,
                          const std::vector<RobustnessRow>& rows,
                          std::ostream& out) {
  hash_comment(cfg, out);
  out << "step_value,achieved_ohr,avg_cache_bytes,outage_fraction\n";
  for (const auto& r : rows)
    out << format_double(r.step_value) << ',' << format_double(r.achieved_ohr)
        << ',' << format_double(r.avg_cache_bytes) << ','
        << format_double(r.outage_fraction) << '\n';
}

}  // namespace ttlsim
