#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttlsim/adaptive.hpp"
#include "ttlsim/request.hpp"
#include "ttlsim/ttl_core.hpp"

namespace ttlsim {

struct MetricsConfig {
  double window_seconds = 7200.0;
  double outage_threshold = 0.05;  // |window hit rate - target| above this is an outage
};

struct TypeMetrics {
  std::uint64_t requests = 0;
  std::uint64_t hits = 0;
  std::uint64_t bytes = 0;
  std::uint64_t hit_bytes = 0;
  double ohr = 0;
  double bhr = 0;
  double normalized_size = 0;       // size-time integral / requested bytes
  double eq2_normalized_size = 0;   // per-arrival min(X_suc, TTL) accumulation
  double avg_cache_bytes = 0;
  double outage_fraction = 0;       // windows beyond threshold / windows
  double final_theta = 0;
  double final_theta_s = 0;
  double final_vartheta = 0;
  double final_vartheta_s = 0;
};

struct WindowRow {
  std::uint64_t index = 0;
  double start_time = 0;
  int type_id = 0;
  std::uint64_t requests = 0;
  std::uint64_t hits = 0;
  std::uint64_t bytes = 0;
  std::uint64_t hit_bytes = 0;
  double hit_rate = 0;       // OHR within the window
  double byte_hit_rate = 0;
  double mean_theta = 0;
  double mean_theta_s = 0;
};

struct MetricsReport {
  std::map<int, TypeMetrics> types;
  std::vector<WindowRow> windows;
  std::uint64_t requests = 0;
  std::uint64_t hits = 0;
  double ohr = 0;
  double bhr = 0;
  double horizon = 0;          // last arrival timestamp
  double avg_cache_bytes = 0;  // total size-time integral / horizon
  double outage_fraction = 0;  // aggregate windows vs request-weighted target
};

// Accumulates per-request outcomes into cumulative, windowed and
// per-arrival-equation views of a simulation.
class MetricsCollector {
 public:
  MetricsCollector(MetricsConfig cfg, std::map<int, double> hit_rate_targets);

  // Returns true when the request crossed into a new window (used to refresh
  // windowed controller state).
  bool record(const Request& r, const RequestOutcome& out);
  void on_evictions(const std::vector<Eviction>& evs);

  struct Integrals {
    double total = 0;
    std::map<int, double> per_type;
  };
  MetricsReport finalize(double end_time, const Integrals& integrals);

  std::vector<int> seen_types() const {
    std::vector<int> out;
    for (const auto& [t, _] : types_) out.push_back(t);
    return out;
  }

 private:
  struct OpenInterval {
    double start = 0;
    double granted_ttl = 0;
    std::uint64_t bytes = 0;
    int type_id = 0;
  };
  struct WindowAccum {
    std::uint64_t requests = 0;
    std::uint64_t hits = 0;
    std::uint64_t bytes = 0;
    std::uint64_t hit_bytes = 0;
    double theta_sum = 0;
    double theta_s_sum = 0;
  };

  void flush_window();
  void close_interval(const OpenInterval& iv, double until);

  MetricsConfig cfg_;
  std::map<int, double> targets_;
  std::map<int, TypeMetrics> types_;
  std::unordered_map<std::string, OpenInterval> open_;
  std::map<int, double> eq2_byte_seconds_;
  std::vector<WindowRow> windows_;
  std::map<int, WindowAccum> window_accum_;
  std::uint64_t window_index_ = 0;
  bool any_ = false;
  std::uint64_t requests_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t hit_bytes_ = 0;
};

}  // namespace ttlsim
