#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "ttlsim/analytics.hpp"
#include "ttlsim/baselines.hpp"
#include "ttlsim/errors.hpp"
#include "ttlsim/experiment.hpp"
#include "ttlsim/trace_io.hpp"
#include "ttlsim/workload.hpp"

namespace py = pybind11;
using namespace ttlsim;

namespace {

OracleTypeInput zipf_oracle_input(std::size_t count, double exponent, double mass,
                                  double rare_fraction, double rate,
                                  double object_size, double rare_size) {
  OracleTypeInput in;
  double z = 0;
  for (std::size_t k = 1; k <= count; ++k)
    z += std::pow(static_cast<double>(k), -exponent);
  for (std::size_t k = 1; k <= count; ++k)
    in.recurrent.push_back(
        {rate * mass * std::pow(static_cast<double>(k), -exponent) / z,
         object_size});
  in.rare_rate = rate * rare_fraction;
  in.rare_size = rare_size;
  return in;
}

py::dict report_to_dict(const MetricsReport& rep) {
  py::dict d;
  d["requests"] = rep.requests;
  d["hits"] = rep.hits;
  d["ohr"] = rep.ohr;
  d["bhr"] = rep.bhr;
  d["horizon_s"] = rep.horizon;
  d["avg_cache_bytes"] = rep.avg_cache_bytes;
  d["outage_fraction"] = rep.outage_fraction;
  py::dict types;
  for (const auto& [t, tm] : rep.types) {
    py::dict td;
    td["requests"] = tm.requests;
    td["hits"] = tm.hits;
    td["ohr"] = tm.ohr;
    td["bhr"] = tm.bhr;
    td["normalized_size_s"] = tm.normalized_size;
    td["eq2_normalized_size_s"] = tm.eq2_normalized_size;
    td["avg_cache_bytes"] = tm.avg_cache_bytes;
    td["outage_fraction"] = tm.outage_fraction;
    td["final_theta"] = tm.final_theta;
    td["final_theta_s"] = tm.final_theta_s;
    td["final_vartheta"] = tm.final_vartheta;
    td["final_vartheta_s"] = tm.final_vartheta_s;
    types[py::int_(t)] = td;
  }
  d["types"] = types;
  return d;
}

ExperimentConfig config_from_json_str(const std::string& config_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

}  // namespace

PYBIND11_MODULE(_ttlsim, m) {
  m.doc() = "TTL cache simulation toolkit";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "TraceParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("gamma_threshold", &gamma_threshold, py::arg("x"), py::arg("y"),
        py::arg("epsilon"),
        "Threshold coupling of the two latent variables: y below 1-3eps/2, "
        "1 above 1-eps/2, smooth quartic ramp in between.");

  m.def(
      "zipf_oracle",
      [](std::size_t count, double exponent, double mass, double rare_fraction,
         double rate, double theta, double theta_s, const std::string& mode,
         double object_size, double rare_size) {
        OracleTypeInput in = zipf_oracle_input(
            count, exponent, mass, rare_fraction, rate, object_size, rare_size);
        HitRateMode hm = mode == "bhr" ? HitRateMode::ByteHitRate
                                       : HitRateMode::ObjectHitRate;
        py::dict d;
        d["hit_rate"] = oracle_hit_rate(in, theta, theta_s, hm);
        d["normalized_size_s"] = oracle_normalized_size(in, theta, theta_s);
        return d;
      },
      py::arg("count"), py::arg("exponent"), py::arg("mass"),
      py::arg("rare_fraction"), py::arg("rate"), py::arg("theta"),
      py::arg("theta_s"), py::arg("mode") = "ohr", py::arg("object_size") = 1.0,
      py::arg("rare_size") = 1.0,
      "Closed-form hit rate and normalized size for a Zipf type under "
      "exponential inter-arrivals.");

  m.def(
      "solve_full_filter_ttl",
      [](std::size_t count, double exponent, double mass, double rare_fraction,
         double rate, double target, double ttl_bound) {
        OracleTypeInput in =
            zipf_oracle_input(count, exponent, mass, rare_fraction, rate, 1, 1);
        return solve_full_filter_ttl(in, target, HitRateMode::ObjectHitRate,
                                     ttl_bound);
      },
      py::arg("count"), py::arg("exponent"), py::arg("mass"),
      py::arg("rare_fraction"), py::arg("rate"), py::arg("target"),
      py::arg("ttl_bound") = 1e9);

  m.def(
      "tune_ttl_bound",
      [](std::size_t count, double exponent, double mass, double rare_fraction,
         double n, double lambda0, double target) {
        ZipfTuneInput in;
        in.object_count = count;
        in.exponent = exponent;
        in.recurrent_mass = mass;
        in.rare_fraction = rare_fraction;
        in.n = n;
        in.lambda0 = lambda0;
        in.target_hit_rate = target;
        TuneResult r = tune_ttl_bound(in);
        py::dict d;
        d["ttl_bound_s"] = r.ttl_bound;
        d["r_star"] = r.r_star;
        d["delta_r"] = r.delta_r;
        d["c_star"] = r.c_star;
        d["lambda_c_star"] = r.lambda_c_star;
        d["hit_rate_at_bound"] = r.hit_rate_at_bound;
        return d;
      },
      py::arg("count"), py::arg("exponent"), py::arg("mass"),
      py::arg("rare_fraction"), py::arg("n"), py::arg("lambda0"),
      py::arg("target"));

  m.def(
      "generate_trace",
      [](const std::string& config_json, const std::string& path) {
        ExperimentConfig cfg = config_from_json_str(config_json);
        auto source = make_source(cfg);
        write_trace_file(*source, path);
      },
      py::arg("config_json"), py::arg("path"),
      "Materialize the configured workload as a trace CSV.");

  m.def(
      "simulate",
      [](const std::string& config_json) {
        ExperimentConfig cfg = config_from_json_str(config_json);
        cfg.out_dir.clear();
        return report_to_dict(run_simulate(cfg));
      },
      py::arg("config_json"),
      "Run one simulation from an experiment-config JSON string and return "
      "the metrics report.");

  m.def(
      "sweep",
      [](const std::string& config_json, const std::vector<double>& targets,
         std::optional<double> size_fraction) {
        ExperimentConfig cfg = config_from_json_str(config_json);
        cfg.out_dir.clear();
        auto rows = run_sweep(cfg, targets, size_fraction);
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["target"] = r.target;
          d["policy"] = r.policy;
          d["achieved_hit_rate"] = r.achieved_hit_rate;
          d["avg_cache_bytes"] = r.avg_cache_bytes;
          d["normalized_size_s"] = r.normalized_size;
          d["status"] = r.status;
          out.append(d);
        }
        return out;
      },
      py::arg("config_json"), py::arg("targets"),
      py::arg("size_fraction") = std::optional<double>(0.5));

  m.def(
      "audit_rarity",
      [](const std::string& trace_path, double r_seconds, double window_exponent) {
        TraceReader reader(trace_path);
        RarityAudit a = audit_rarity(reader, r_seconds, window_exponent);
        py::dict d;
        for (const auto& [t, ws] : a.per_type) {
          py::list rows;
          for (const auto& w : ws)
            rows.append(
                py::make_tuple(w.start_index, w.length, w.bursty, w.fraction));
          d[py::int_(t)] = rows;
        }
        return d;
      },
      py::arg("trace_path"), py::arg("r_seconds"),
      py::arg("window_exponent") = 0.75);

  m.def(
      "che_ttl_for_target",
      [](const std::string& trace_path, double target, const std::string& mode) {
        TraceReader reader(trace_path);
        std::vector<Request> stream = drain(reader);
        if (stream.empty()) throw ConfigError("empty trace");
        RateEstimate rates =
            estimate_rates_from_trace(stream, stream.back().arrival_time);
        HitRateMode hm = mode == "bhr" ? HitRateMode::ByteHitRate
                                       : HitRateMode::ObjectHitRate;
        CheSolution sol = che_ttl_for_target_hitrate(rates, target, hm);
        py::dict d;
        d["ttl_s"] = sol.ttl;
        d["expected_size_bytes"] = sol.expected_size_bytes;
        d["expected_size_objects"] = sol.expected_size_objects;
        d["predicted_hit_rate"] = sol.predicted_hit_rate;
        return d;
      },
      py::arg("trace_path"), py::arg("target"), py::arg("mode") = "ohr");
}
