#pragma once

#include <functional>
#include <limits>
#include <list>
#include <memory>
#include <optional>
#include <unordered_map>

#include "ttlsim/adaptive.hpp"
#include "ttlsim/metrics.hpp"
#include "ttlsim/request.hpp"
#include "ttlsim/ttl_core.hpp"

namespace ttlsim {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual RequestOutcome on_request(const Request& r) = 0;
  // TTL policies expose their cache so the driver can advance time and
  // forward evictions; LRU manages time internally and returns nullptr.
  virtual CacheState* cache() { return nullptr; }
  virtual void on_metrics_window() {}
};

// Single-level adaptive TTL controller: one latent variable per type, the
// requested object is (re)installed in the deep cache with the post-update
// TTL on every arrival.
class DttlPolicy : public Policy {
 public:
  explicit DttlPolicy(ControllerConfig cfg);
  RequestOutcome on_request(const Request& r) override;
  CacheState* cache() override { return &cache_; }
  const ControllerState& controller() const { return state_; }

 private:
  ControllerConfig cfg_;
  ControllerState state_;
  CacheState cache_;
};

// Two-level filtering controller: first-seen objects enter the shallow cache
// with the filtering TTL plus a metadata shadow entry; hits and virtual hits
// promote to the deep cache.
class FttlPolicy : public Policy {
 public:
  explicit FttlPolicy(ControllerConfig cfg);
  RequestOutcome on_request(const Request& r) override;
  CacheState* cache() override { return &cache_; }
  void on_metrics_window() override { state_.refresh_size_scale(); }
  const ControllerState& controller() const { return state_; }

 private:
  ControllerConfig cfg_;
  ControllerState state_;
  CacheState cache_;
};

// Two-level cache with fixed TTL pair (theta, theta_s) per type; same cache
// mechanics as the filtering controller, no adaptation.
class StaticFttlPolicy : public Policy {
 public:
  struct Pair {
    double theta = 0;
    double theta_s = 0;
  };
  explicit StaticFttlPolicy(std::map<int, Pair> ttls);
  RequestOutcome on_request(const Request& r) override;
  CacheState* cache() override { return &cache_; }

 private:
  std::map<int, Pair> ttls_;
  CacheState cache_;
};

class FixedTtlPolicy : public Policy {
 public:
  explicit FixedTtlPolicy(double ttl);
  RequestOutcome on_request(const Request& r) override;
  CacheState* cache() override { return &cache_; }

 private:
  double ttl_;
  CacheState cache_;
};

// Byte-capacity LRU. Recency order updated on every access; objects larger
// than the capacity bypass the cache and count as misses.
class LruPolicy : public Policy {
 public:
  explicit LruPolicy(std::uint64_t capacity_bytes);
  RequestOutcome on_request(const Request& r) override;

  std::uint64_t resident_bytes() const { return bytes_; }
  double size_time_integral() const { return integral_; }
  double size_time_integral(int type_id) const;
  double now() const { return now_; }

 private:
  void integrate_to(double t);

  std::uint64_t capacity_;
  std::uint64_t bytes_ = 0;
  double now_ = 0;
  double integral_ = 0;
  std::unordered_map<int, double> integral_by_type_;
  std::unordered_map<int, std::uint64_t> bytes_by_type_;
  std::list<std::string> order_;  // front = most recent
  struct Slot {
    std::list<std::string>::iterator pos;
    std::uint64_t size_bytes;
    int type_id;
  };
  std::unordered_map<std::string, Slot> slots_;
};

// Per-request probe for invariant fuzzing; called after each processed
// request with the arrival index.
using RequestProbe =
    std::function<void(std::uint64_t index, const Request&, const RequestOutcome&)>;

struct SimulationOptions {
  MetricsConfig metrics;
  std::map<int, double> hit_rate_targets;  // outage reference per type
  RequestProbe probe;                      // optional
  std::ostream* arrival_log = nullptr;     // optional per-arrival CSV
  std::uint64_t arrival_log_stride = 1;
};

MetricsReport run_simulation(RequestSource& source, Policy& policy,
                             const SimulationOptions& options);

}  // namespace ttlsim
