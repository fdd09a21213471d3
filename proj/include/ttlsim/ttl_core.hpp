#pragma once

#include <cstdint>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttlsim/request.hpp"

namespace ttlsim {

enum class Residency { Deep, Shallow, Shadow };

// Absolute expiry timestamps; 0 means inactive. Legal states are
// (deep,0,0), (0,shallow,shadow) with shallow <= shadow, (0,0,shadow)
// and (0,0,0).
struct TimerTuple {
  double deep = 0;
  double shallow = 0;
  double shadow = 0;

  bool inactive() const { return deep == 0 && shallow == 0 && shadow == 0; }
  bool legal() const {
    if (deep > 0) return shallow == 0 && shadow == 0;
    if (shallow > 0) return shadow >= shallow;
    return true;
  }
};

enum class EventKind { DeepHit, ShallowHit, VirtualHit, Miss };

struct Classification {
  EventKind kind = EventKind::Miss;
  double remaining = 0;  // expiry minus arrival time, hits only
};

struct Eviction {
  std::string object_id;
  Residency level;
  double time = 0;
  bool object_dropped = false;  // tuple became fully inactive
};

// Requested residency for an arriving object. A TTL of exactly 0 leaves that
// residency inactive; ShallowPlusShadow(0, t) degrades to shadow-only.
struct Disposition {
  double deep_ttl = 0;
  double shallow_ttl = 0;
  double shadow_ttl = 0;

  static Disposition deep(double ttl) { return {ttl, 0, 0}; }
  static Disposition shallow_plus_shadow(double shallow_ttl, double shadow_ttl) {
    return {0, shallow_ttl, shadow_ttl};
  }
  static Disposition shadow_only(double ttl) { return {0, 0, ttl}; }
  static Disposition none() { return {0, 0, 0}; }
};

// Event-driven TTL cache state shared by every TTL policy: per-object timer
// tuples, byte occupancy and the exact size-time integral, maintained with a
// lazily invalidated expiry queue. Shadow entries hold metadata only and
// never contribute bytes.
class CacheState {
 public:
  // Processes every timer with expiry strictly before `time`, advancing the
  // size-time integral piecewise-exactly across each expiry. A timer expiring
  // exactly at `time` survives so the arrival at `time` still classifies as a
  // hit (remaining TTL >= elapsed).
  std::vector<Eviction> advance_to(double time);

  // Requires the state advanced to the request's arrival time. Pure.
  Classification classify(const Request& r) const;

  void install(const Request& r, Disposition d);

  double now() const { return now_; }
  std::uint64_t resident_bytes() const { return bytes_total_; }
  std::uint64_t resident_bytes(int type_id) const;
  double size_time_integral() const { return integral_total_; }
  double size_time_integral(int type_id) const;

  std::size_t tracked_objects() const { return entries_.size(); }
  bool deep_resident(const std::string& id) const;
  bool shallow_resident(const std::string& id) const;
  bool shadow_resident(const std::string& id) const;
  // Empty optional-like: returns (0,0,0) for unknown objects.
  TimerTuple timers(const std::string& id) const;
  template <typename Fn>
  void for_each_entry(Fn&& fn) const {
    for (const auto& [id, e] : entries_) fn(id, e.timers);
  }

 private:
  struct Entry {
    TimerTuple timers;
    std::uint64_t size_bytes = 0;
    int type_id = 1;
  };
  struct Pending {
    double time;
    std::uint64_t seq;
    Residency level;
    std::string object_id;
    bool operator>(const Pending& o) const {
      if (time != o.time) return time > o.time;
      return seq > o.seq;
    }
  };

  void integrate_to(double time);
  void add_bytes(int type_id, std::uint64_t bytes, bool sign_positive);
  void schedule(double time, Residency level, const std::string& id);

  std::unordered_map<std::string, Entry> entries_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0;
  std::uint64_t bytes_total_ = 0;
  double integral_total_ = 0;
  std::unordered_map<int, std::uint64_t> bytes_by_type_;
  std::unordered_map<int, double> integral_by_type_;
};

}  // namespace ttlsim
