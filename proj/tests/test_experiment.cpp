#include <doctest.h>

#include <fstream>
#include <sstream>

#include <filesystem>

#include "ttlsim/errors.hpp"
#include "ttlsim/experiment.hpp"

using namespace ttlsim;
using nlohmann::json;

namespace {

std::string scratch(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

json base_config() {
  return json::parse(R"({
    "workload": {
      "kind": "poisson",
      "rate_per_s": 20.0,
      "types": [
        {"type_id": 1,
         "zipf": {"count": 100, "exponent": 0.8, "mass": 0.8},
         "rare_fraction": 0.2}
      ],
      "rare_mode": {"kind": "one_hit_wonders"}
    },
    "policy": {
      "kind": "dttl",
      "mode": "ohr",
      "targets": [{"type_id": 1, "hit_rate": 0.5, "ttl_bound_s": 50.0}],
      "eta": {"kind": "decaying", "eta0": 1.0, "alpha": 0.6}
    },
    "metrics": {"window_seconds": 200.0, "outage_threshold": 0.05},
    "requests": 40000,
    "seed": 5
  })");
}

}  // namespace

TEST_CASE("fixed TTL on a three-request hand trace") {
  json j = base_config();
  j["workload"] = {{"kind", "trace"}, {"path", scratch("hand_trace.csv")}};
  j["policy"] = {{"kind", "fixed_ttl"}, {"ttl_s", 10.0}};
  j["requests"] = 3;
  {
    std::ofstream f(scratch("hand_trace.csv"));
    f << "arrival_time_s,object_id,type_id,size_bytes\n"
      << "0,a,1,1\n5,a,1,1\n12,a,1,1\n";
  }
  ExperimentConfig cfg = parse_experiment_config(j);
  MetricsReport rep = run_simulate(cfg);
  CHECK(rep.requests == 3);
  CHECK(rep.ohr == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("same config and seed produce byte-identical artifacts") {
  json j = base_config();
  j["requests"] = 20000;
  auto render = [&](const std::string&) {
    ExperimentConfig cfg = parse_experiment_config(j);
    MetricsReport rep = run_simulate(cfg);
    std::ostringstream report, windows;
    write_report_csv(cfg, rep, report);
    write_windows_csv(cfg, rep, windows);
    return report.str() + "\n---\n" + windows.str();
  };
  CHECK(render("a") == render("b"));
}

TEST_CASE("artifacts carry a header row and a config-hash comment") {
  ExperimentConfig cfg = parse_experiment_config(base_config());
  cfg.requests = 2000;
  MetricsReport rep = run_simulate(cfg);
  std::ostringstream os;
  write_report_csv(cfg, rep, os);
  std::istringstream is(os.str());
  std::string first, second;
  std::getline(is, first);
  std::getline(is, second);
  CHECK(first.rfind("# config_hash=", 0) == 0);
  CHECK(second.rfind("type_id,", 0) == 0);
}

TEST_CASE("sweep emits one row per policy per target and honors ordering") {
  ExperimentConfig cfg = parse_experiment_config(base_config());
  cfg.requests = 30000;
  auto rows = run_sweep(cfg, {0.4, 0.6}, 0.5);
  REQUIRE(rows.size() == 4);
  // d-TTL first within each target; the filtering size target came from it
  CHECK(rows[0].policy == "dttl");
  CHECK(rows[1].policy == "fttl");
  CHECK(rows[0].target == doctest::Approx(0.4));
  CHECK(rows[2].target == doctest::Approx(0.6));
  for (const auto& r : rows) CHECK(r.status == "ok");
  // the filtering run needs less cache on this rare-heavy workload
  CHECK(rows[1].avg_cache_bytes < rows[0].avg_cache_bytes);
  CHECK(rows[3].avg_cache_bytes < rows[2].avg_cache_bytes);
}

TEST_CASE("robustness rows and empty grid") {
  ExperimentConfig cfg = parse_experiment_config(base_config());
  cfg.requests = 20000;
  auto rows = run_robustness(cfg, "eta", {0.01, 0.02});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].step_value == doctest::Approx(0.01));
  CHECK(rows[1].step_value == doctest::Approx(0.02));

  auto empty = run_robustness(cfg, "eta", {});
  CHECK(empty.empty());
  std::ostringstream os;
  write_robustness_csv(cfg, empty, os);
  std::istringstream is(os.str());
  std::string comment, header, rest;
  std::getline(is, comment);
  std::getline(is, header);
  CHECK(header == "step_value,achieved_ohr,avg_cache_bytes,outage_fraction");
  CHECK_FALSE(std::getline(is, rest));
}

TEST_CASE("compare-che table has nine value columns after the target") {
  ExperimentConfig cfg = parse_experiment_config(base_config());
  cfg.requests = 30000;
  auto rows = run_compare_che(cfg, {0.5}, 0.1);
  REQUIRE(rows.size() == 1);
  std::ostringstream os;
  write_compare_che_csv(cfg, rows, os);
  std::istringstream is(os.str());
  std::string comment, header, data;
  std::getline(is, comment);
  std::getline(is, header);
  std::getline(is, data);
  auto count_cols = [](const std::string& line) {
    return std::count(line.begin(), line.end(), ',') + 1;
  };
  CHECK(count_cols(header) == 10);
  CHECK(count_cols(data) == 10);
}

TEST_CASE("config validation failures") {
  SUBCASE("two workload kinds cannot be expressed; unknown kind is an error") {
    json j = base_config();
    j["workload"]["kind"] = "nonsense";
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  SUBCASE("missing requests") {
    json j = base_config();
    j.erase("requests");
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  SUBCASE("bad target hit rate") {
    json j = base_config();
    j["policy"]["targets"][0]["hit_rate"] = 1.5;
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  SUBCASE("negative size target") {
    json j = base_config();
    j["policy"]["kind"] = "fttl";
    j["policy"]["targets"][0]["normalized_size_s"] = -1.0;
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  SUBCASE("missing trace path at validation time") {
    json j = base_config();
    j["workload"] = {{"kind", "trace"}, {"path", "does_not_exist_42.csv"}};
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  SUBCASE("table defaults: constant steps and scaled size step") {
    json j = base_config();
    j["policy"].erase("eta");
    j["policy"]["targets"][0].erase("ttl_bound_s");
    ExperimentConfig cfg = parse_experiment_config(j);
    CHECK(cfg.policy.controller.eta.kind == StepSchedule::Kind::Constant);
    CHECK(cfg.policy.controller.eta.value == doctest::Approx(1e-2));
    CHECK(cfg.policy.controller.eta_s.value == doctest::Approx(1e-9));
    CHECK(cfg.policy.controller.scale_size_step);
    CHECK(cfg.policy.controller.targets.at(1).ttl_bound == doctest::Approx(1e7));
  }
}

TEST_CASE("static pair policy rejects an inverted TTL pair") {
  json j = base_config();
  j["policy"] = {{"kind", "static_fttl"},
                 {"targets", json::array({{{"type_id", 1},
                                           {"deep_ttl_s", 2.0},
                                           {"shallow_ttl_s", 5.0}}})}};
  ExperimentConfig cfg = parse_experiment_config(j);
  CHECK_THROWS_AS(make_policy(cfg.policy), ConfigError);
}

TEST_CASE("two content types converge to their own targets") {
  json j = json::parse(R"({
    "workload": {
      "kind": "poisson",
      "rate_per_s": 60.0,
      "types": [
        {"type_id": 1,
         "zipf": {"count": 200, "exponent": 0.8, "mass": 0.5},
         "rare_fraction": 0.1},
        {"type_id": 2,
         "zipf": {"count": 100, "exponent": 1.0, "mass": 0.35},
         "rare_fraction": 0.05}
      ]
    },
    "policy": {
      "kind": "dttl",
      "mode": "ohr",
      "targets": [
        {"type_id": 1, "hit_rate": 0.45, "ttl_bound_s": 60.0},
        {"type_id": 2, "hit_rate": 0.7, "ttl_bound_s": 120.0}
      ],
      "eta": {"kind": "decaying", "eta0": 1.0, "alpha": 0.6}
    },
    "metrics": {"window_seconds": 500.0},
    "requests": 1500000,
    "seed": 12
  })");
  ExperimentConfig cfg = parse_experiment_config(j);
  MetricsReport rep = run_simulate(cfg);
  REQUIRE(rep.types.count(1) == 1);
  REQUIRE(rep.types.count(2) == 1);
  CHECK(std::abs(rep.types[1].ohr - 0.45) < 0.02);
  CHECK(std::abs(rep.types[2].ohr - 0.7) < 0.02);
  CHECK(rep.types[1].final_theta != rep.types[2].final_theta);
}

TEST_CASE("fixed TTL pair policy runs from a JSON config") {
  json j = base_config();
  j["policy"] = {{"kind", "static_fttl"},
                 {"targets", json::array({{{"type_id", 1},
                                           {"deep_ttl_s", 20.0},
                                           {"shallow_ttl_s", 5.0}}})}};
  j["requests"] = 100000;
  ExperimentConfig cfg = parse_experiment_config(j);
  MetricsReport rep = run_simulate(cfg);
  CHECK(rep.requests == 100000);
  CHECK(rep.ohr > 0.1);
  CHECK(rep.types[1].normalized_size ==
        doctest::Approx(rep.types[1].eq2_normalized_size).epsilon(1e-6));
}

TEST_CASE("byte-weight normalization derives w_max from the workload") {
  json j = base_config();
  j["workload"]["types"][0].erase("zipf");
  j["workload"]["types"][0]["objects"] = json::array(
      {{{"id", "a"}, {"probability", 0.5}, {"size_bytes", 4096}},
       {{"id", "b"}, {"probability", 0.3}, {"size_bytes", 128}}});
  j["policy"]["mode"] = "bhr";
  j["policy"]["normalize_byte_weight"] = true;
  ExperimentConfig cfg = parse_experiment_config(j);
  CHECK(cfg.policy.controller.max_size_bytes == 4096);

  json trace_j = j;
  {
    std::ofstream f(scratch("bw_trace.csv"));
    f << "arrival_time_s,object_id,type_id,size_bytes\n0,a,1,1\n";
  }
  trace_j["workload"] = {{"kind", "trace"}, {"path", scratch("bw_trace.csv")}};
  CHECK_THROWS_AS(parse_experiment_config(trace_j), ConfigError);
  trace_j["policy"]["max_size_bytes"] = 1000;
  CHECK(parse_experiment_config(trace_j).policy.controller.max_size_bytes == 1000);
}
