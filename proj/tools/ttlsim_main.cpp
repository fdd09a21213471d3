#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ttlsim/analytics.hpp"
#include "ttlsim/baselines.hpp"
#include "ttlsim/errors.hpp"
#include "ttlsim/experiment.hpp"
#include "ttlsim/trace_io.hpp"

namespace fs = std::filesystem;
using namespace ttlsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> requests;
  std::string out_dir;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_required = true) {
  auto* opt = sub->add_option("--config", args.config_path, "experiment JSON");
  if (config_required) opt->required();
  sub->add_option("--seed", args.seed, "RNG seed override");
  sub->add_option("--requests", args.requests, "request count override");
  sub->add_option("--out", args.out_dir, "output directory");
}

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.requests) cfg.requests = *args.requests;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  return cfg;
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& dir,
                             const char* name) {
  if (dir.empty()) return std::cout;
  fs::create_directories(dir);
  file.open(fs::path(dir) / name);
  if (!file) throw ConfigError("cannot write to " + dir);
  return file;
}

OracleTypeInput oracle_input_from_config(const ExperimentConfig& cfg, int type_id) {
  if (cfg.workload.kind != WorkloadConfig::Kind::Poisson)
    throw ConfigError(
        "analytic oracles are exact only for the Poisson/independent workload; "
        "validate Markov or trace runs by simulation");
  return oracle_input_from_spec(cfg.workload.poisson, type_id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TTL cache simulation toolkit"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* generate = app.add_subcommand("generate", "write a synthetic trace CSV");
  add_common(generate, args);

  auto* simulate = app.add_subcommand("simulate", "run one simulation");
  add_common(simulate, args);

  auto* sweep = app.add_subcommand("sweep", "hit-rate curve over targets");
  add_common(sweep, args);
  std::vector<double> targets{0.8, 0.7, 0.6, 0.5, 0.4};
  sweep->add_option("--targets", targets, "hit-rate targets");
  double size_fraction = 0.5;
  bool no_fttl = false;
  sweep->add_option("--size-fraction", size_fraction,
                    "filtering size target as a fraction of the measured "
                    "single-level size");
  sweep->add_flag("--no-fttl", no_fttl, "sweep the single-level policy only");

  auto* compare = app.add_subcommand("compare-che", "fixed-TTL/LRU table at "
                                                    "analytically derived TTLs");
  add_common(compare, args);
  std::vector<double> che_targets{0.8, 0.7, 0.6, 0.5, 0.4};
  compare->add_option("--targets", che_targets, "hit-rate targets");
  double estimate_fraction = 0.1;
  compare->add_option("--estimate-fraction", estimate_fraction,
                      "leading fraction of requests used for rate estimation");

  auto* robustness = app.add_subcommand("robustness", "constant-step grid");
  add_common(robustness, args);
  std::vector<double> steps;
  robustness->add_option("--steps", steps, "constant step values");
  std::string apply_to = "eta";
  robustness->add_option("--apply-to", apply_to, "eta or eta_s");

  auto* oracle = app.add_subcommand("oracle", "closed-form hit rate and "
                                              "normalized size");
  add_common(oracle, args);
  double o_theta = 0, o_theta_s = 0;
  std::optional<double> o_solve;
  oracle->add_option("--theta", o_theta, "deep/shadow TTL seconds");
  oracle->add_option("--theta-shallow", o_theta_s, "shallow TTL seconds");
  oracle->add_option("--solve-full-filter", o_solve,
                     "instead, solve theta with theta_shallow=0 for this target");

  auto* tune = app.add_subcommand("tune", "TTL bound for a Zipf workload");
  std::size_t t_count = 0;
  double t_beta = 1.5, t_q = 1.0, t_alpha = 0.0, t_n = 0, t_lambda0 = 1.0;
  std::vector<double> t_targets;
  std::string t_out;
  tune->add_option("--count", t_count, "recurrent objects K")->required();
  tune->add_option("--beta", t_beta, "Zipf exponent > 1")->required();
  tune->add_option("--mass", t_q, "recurrent probability mass q");
  tune->add_option("--alpha", t_alpha, "rare traffic fraction");
  tune->add_option("--n", t_n, "scale (lambda = n * lambda0)")->required();
  tune->add_option("--lambda0", t_lambda0, "base rate");
  tune->add_option("--targets", t_targets, "hit-rate targets")->required();
  tune->add_option("--out", t_out, "output directory");

  auto* audit = app.add_subcommand("audit", "bursty-arrival fractions per window");
  add_common(audit, args);
  double a_r = 60.0, a_exp = 0.75;
  std::string a_trace;
  audit->add_option("--r-seconds", a_r, "rarity window R");
  audit->add_option("--window-exponent", a_exp, "window growth exponent (0.5, 1]");
  audit->add_option("--trace", a_trace, "audit a trace file instead of a config");
  audit->get_option("--config")->required(false);

  auto* che = app.add_subcommand("che", "characteristic-time solution only");
  add_common(che, args);
  double che_target = 0.6;
  che->add_option("--target", che_target, "hit-rate target");
  double che_fraction = 0.1;
  che->add_option("--estimate-fraction", che_fraction,
                  "leading fraction of requests used for rate estimation");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      ExperimentConfig cfg = load(args);
      auto source = make_source(cfg);
      if (cfg.out_dir.empty()) {
        std::cout << "# config_hash=" << config_hash_hex(cfg) << '\n';
        write_trace(*source, std::cout);
      } else {
        fs::create_directories(cfg.out_dir);
        std::ofstream f(fs::path(cfg.out_dir) / "trace.csv");
        if (!f) throw ConfigError("cannot write to " + cfg.out_dir);
        f << "# config_hash=" << config_hash_hex(cfg) << '\n';
        write_trace(*source, f);
        std::cerr << "wrote " << (fs::path(cfg.out_dir) / "trace.csv").string()
                  << '\n';
      }
    } else if (simulate->parsed()) {
      ExperimentConfig cfg = load(args);
      MetricsReport rep = run_simulate(cfg);
      if (cfg.out_dir.empty()) {
        write_report_csv(cfg, rep, std::cout);
      } else {
        std::cerr << "ohr=" << rep.ohr << " bhr=" << rep.bhr
                  << " avg_cache_bytes=" << rep.avg_cache_bytes << '\n';
      }
    } else if (sweep->parsed()) {
      ExperimentConfig cfg = load(args);
      auto rows = run_sweep(cfg, targets,
                            no_fttl ? std::nullopt
                                    : std::optional<double>(size_fraction));
      std::ofstream f;
      write_sweep_csv(cfg, rows, open_or_stdout(f, cfg.out_dir, "sweep.csv"));
    } else if (compare->parsed()) {
      ExperimentConfig cfg = load(args);
      auto rows = run_compare_che(cfg, che_targets, estimate_fraction);
      std::ofstream f;
      write_compare_che_csv(cfg, rows,
                            open_or_stdout(f, cfg.out_dir, "compare_che.csv"));
    } else if (robustness->parsed()) {
      ExperimentConfig cfg = load(args);
      auto rows = run_robustness(cfg, apply_to, steps);
      std::ofstream f;
      write_robustness_csv(cfg, rows,
                           open_or_stdout(f, cfg.out_dir, "robustness.csv"));
    } else if (oracle->parsed()) {
      ExperimentConfig cfg = load(args);
      if (cfg.workload.kind != WorkloadConfig::Kind::Poisson)
        throw ConfigError(
            "analytic oracles are exact only for the Poisson/independent "
            "workload; validate Markov or trace runs by simulation");
      std::ofstream f;
      std::ostream& out = open_or_stdout(f, cfg.out_dir, "oracle.csv");
      out << "# config_hash=" << config_hash_hex(cfg) << '\n';
      out << "type_id,theta,theta_shallow,hit_rate,normalized_size_s\n";
      HitRateMode mode = HitRateMode::ObjectHitRate;
      for (const auto& t : cfg.workload.poisson.types) {
        OracleTypeInput in = oracle_input_from_config(cfg, t.type_id);
        double th = o_theta, ths = o_theta_s;
        if (o_solve) {
          th = solve_full_filter_ttl(in, *o_solve, mode, 1e9);
          ths = 0;
        }
        out << t.type_id << ',' << format_double(th) << ',' << format_double(ths)
            << ',' << format_double(oracle_hit_rate(in, th, ths, mode)) << ','
            << format_double(oracle_normalized_size(in, th, ths)) << '\n';
      }
    } else if (tune->parsed()) {
      std::ofstream f;
      std::ostream& out = open_or_stdout(f, t_out, "tune.csv");
      std::ostringstream flags;
      flags << "tune|" << t_count << '|' << t_beta << '|' << t_q << '|'
            << t_alpha << '|' << t_n << '|' << t_lambda0;
      for (double h : t_targets) flags << '|' << h;
      out << "# config_hash=" << fnv1a_hex(flags.str()) << '\n';
      out << "target,ttl_bound_s,r_star,delta_r,c_star,lambda_c_star,"
             "hit_rate_at_bound\n";
      for (double h : t_targets) {
        ZipfTuneInput in;
        in.object_count = t_count;
        in.exponent = t_beta;
        in.recurrent_mass = t_q;
        in.rare_fraction = t_alpha;
        in.n = t_n;
        in.lambda0 = t_lambda0;
        in.target_hit_rate = h;
        TuneResult r = tune_ttl_bound(in);
        out << format_double(h) << ',' << format_double(r.ttl_bound) << ','
            << format_double(r.r_star) << ',' << format_double(r.delta_r) << ','
            << format_double(r.c_star) << ',' << format_double(r.lambda_c_star)
            << ',' << format_double(r.hit_rate_at_bound) << '\n';
      }
    } else if (audit->parsed()) {
      std::unique_ptr<RequestSource> source;
      std::ofstream f;
      std::string out_dir = args.out_dir;
      if (!a_trace.empty()) {
        source = std::make_unique<TraceReader>(a_trace);
      } else if (!args.config_path.empty()) {
        ExperimentConfig cfg = load(args);
        out_dir = cfg.out_dir;
        source = make_source(cfg);
      } else {
        throw ConfigError("audit needs --trace or --config");
      }
      RarityAudit a = audit_rarity(*source, a_r, a_exp);
      std::ostream& out = open_or_stdout(f, out_dir, "audit.csv");
      std::ostringstream flags;
      flags << "audit|" << a_trace << '|' << args.config_path << '|' << a_r
            << '|' << a_exp;
      out << "# config_hash=" << fnv1a_hex(flags.str()) << '\n';
      out << "type_id,window_start_index,window_length,bursty,fraction\n";
      for (const auto& [t, windows] : a.per_type)
        for (const auto& w : windows)
          out << t << ',' << w.start_index << ',' << w.length << ',' << w.bursty
              << ',' << format_double(w.fraction) << '\n';
    } else if (che->parsed()) {
      ExperimentConfig cfg = load(args);
      auto prefix_n = static_cast<std::uint64_t>(
          static_cast<double>(cfg.requests) * che_fraction);
      auto src = make_source(cfg, std::max<std::uint64_t>(prefix_n, 1));
      std::vector<Request> prefix = drain(*src);
      if (prefix.empty()) throw ConfigError("workload produced no requests");
      RateEstimate rates =
          estimate_rates_from_trace(prefix, prefix.back().arrival_time);
      CheSolution sol =
          che_ttl_for_target_hitrate(rates, che_target, HitRateMode::ObjectHitRate);
      std::cout << "# config_hash=" << config_hash_hex(cfg) << '\n'
                << "T_seconds,expected_size_bytes,predicted_hit_rate\n"
                << format_double(sol.ttl) << ','
                << format_double(sol.expected_size_bytes) << ','
                << format_double(sol.predicted_hit_rate) << '\n';
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
