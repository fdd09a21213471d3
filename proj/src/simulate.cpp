#include "ttlsim/simulate.hpp"

#include <cmath>
#include <ostream>

#include "ttlsim/errors.hpp"
#include "ttlsim/trace_io.hpp"

namespace ttlsim {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

DttlPolicy::DttlPolicy(ControllerConfig cfg)
    : cfg_(std::move(cfg)), state_(cfg_, /*filtering=*/false) {}

RequestOutcome DttlPolicy::on_request(const Request& r) {
  cache_.advance_to(r.arrival_time);
  Classification c = cache_.classify(r);
  bool hit = c.kind == EventKind::DeepHit;

  std::uint64_t l = state_.bump_arrivals();
  state_.update_hit_latent(r.type_id, l, state_.hit_weight(r), hit);
  double theta_next = state_.theta(r.type_id);
  cache_.install(r, Disposition::deep(theta_next));

  RequestOutcome out;
  out.event = hit ? EventKind::DeepHit : EventKind::Miss;
  out.hit = hit;
  out.s_estimate = kNan;
  out.granted_ttl = theta_next;
  out.theta = theta_next;
  out.theta_s = theta_next;
  out.vartheta = state_.vartheta(r.type_id);
  out.vartheta_s = 1.0;
  return out;
}

FttlPolicy::FttlPolicy(ControllerConfig cfg)
    : cfg_(std::move(cfg)), state_(cfg_, /*filtering=*/true) {}

RequestOutcome FttlPolicy::on_request(const Request& r) {
  cache_.advance_to(r.arrival_time);
  Classification c = cache_.classify(r);
  bool hit = c.kind == EventKind::DeepHit || c.kind == EventKind::ShallowHit;

  double theta_pre = state_.theta(r.type_id);
  double theta_s_pre = state_.theta_s(r.type_id);
  double s = estimate_s(c, theta_pre, theta_s_pre);

  std::uint64_t l = state_.bump_arrivals();
  state_.observe_size(static_cast<double>(r.size_bytes));
  state_.update_hit_latent(r.type_id, l, state_.hit_weight(r), hit);
  // Size feedback is always byte-weighted, independent of the hit-rate mode.
  state_.update_size_latent(r.type_id, l, static_cast<double>(r.size_bytes), s);

  double theta_next = state_.theta(r.type_id);
  double theta_s_next = state_.theta_s(r.type_id);

  double granted = 0;
  if (c.kind == EventKind::Miss) {
    cache_.install(r, Disposition::shallow_plus_shadow(theta_s_next, theta_next));
    granted = theta_s_next;
  } else {
    // Hit or virtual hit: promote to deep; any shallow/shadow state is replaced.
    cache_.install(r, Disposition::deep(theta_next));
    granted = theta_next;
  }

  RequestOutcome out;
  out.event = c.kind;
  out.hit = hit;
  out.s_estimate = s;
  out.granted_ttl = granted;
  out.theta = theta_next;
  out.theta_s = theta_s_next;
  out.vartheta = state_.vartheta(r.type_id);
  out.vartheta_s = state_.vartheta_s(r.type_id);
  return out;
}

StaticFttlPolicy::StaticFttlPolicy(std::map<int, Pair> ttls)
    : ttls_(std::move(ttls)) {
  for (const auto& [t, p] : ttls_) {
    if (p.theta < 0 || p.theta_s < 0 || p.theta_s > p.theta)
      throw ConfigError("static TTL pair needs 0 <= theta_s <= theta (type " +
                        std::to_string(t) + ")");
  }
}

RequestOutcome StaticFttlPolicy::on_request(const Request& r) {
  auto it = ttls_.find(r.type_id);
  if (it == ttls_.end())
    throw ConfigError("no TTL pair for type " + std::to_string(r.type_id));
  const Pair& p = it->second;

  cache_.advance_to(r.arrival_time);
  Classification c = cache_.classify(r);
  bool hit = c.kind == EventKind::DeepHit || c.kind == EventKind::ShallowHit;

  double granted;
  if (c.kind == EventKind::Miss) {
    cache_.install(r, Disposition::shallow_plus_shadow(p.theta_s, p.theta));
    granted = p.theta_s;
  } else {
    cache_.install(r, Disposition::deep(p.theta));
    granted = p.theta;
  }

  RequestOutcome out;
  out.event = c.kind;
  out.hit = hit;
  out.s_estimate = estimate_s(c, p.theta, p.theta_s);
  out.granted_ttl = granted;
  out.theta = p.theta;
  out.theta_s = p.theta_s;
  out.vartheta = 0;
  out.vartheta_s = 0;
  return out;
}

FixedTtlPolicy::FixedTtlPolicy(double ttl) : ttl_(ttl) {
  if (ttl < 0) throw ConfigError("fixed TTL must be >= 0");
}

RequestOutcome FixedTtlPolicy::on_request(const Request& r) {
  cache_.advance_to(r.arrival_time);
  Classification c = cache_.classify(r);
  bool hit = c.kind == EventKind::DeepHit;
  cache_.install(r, Disposition::deep(ttl_));

  RequestOutcome out;
  out.event = hit ? EventKind::DeepHit : EventKind::Miss;
  out.hit = hit;
  out.s_estimate = kNan;
  out.granted_ttl = ttl_;
  out.theta = ttl_;
  out.theta_s = ttl_;
  return out;
}

LruPolicy::LruPolicy(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {
  if (capacity_ == 0) throw ConfigError("LRU capacity must be positive");
}

void LruPolicy::integrate_to(double t) {
  double dt = t - now_;
  if (dt < 0) throw std::logic_error("LRU time regression");
  if (dt > 0 && bytes_ > 0) {
    integral_ += static_cast<double>(bytes_) * dt;
    for (auto& [ty, b] : bytes_by_type_)
      if (b > 0) integral_by_type_[ty] += static_cast<double>(b) * dt;
  }
  now_ = t;
}

double LruPolicy::size_time_integral(int type_id) const {
  auto it = integral_by_type_.find(type_id);
  return it == integral_by_type_.end() ? 0 : it->second;
}

RequestOutcome LruPolicy::on_request(const Request& r) {
  integrate_to(r.arrival_time);
  RequestOutcome out;
  out.s_estimate = kNan;
  out.granted_ttl = kNan;

  auto it = slots_.find(r.object_id);
  if (it != slots_.end()) {
    order_.erase(it->second.pos);
    order_.push_front(r.object_id);
    it->second.pos = order_.begin();
    out.event = EventKind::DeepHit;
    out.hit = true;
    return out;
  }
  out.event = EventKind::Miss;
  out.hit = false;
  if (r.size_bytes > capacity_) return out;  // bypass
  while (bytes_ + r.size_bytes > capacity_) {
    const std::string& victim = order_.back();
    auto vit = slots_.find(victim);
    bytes_ -= vit->second.size_bytes;
    bytes_by_type_[vit->second.type_id] -= vit->second.size_bytes;
    slots_.erase(vit);
    order_.pop_back();
  }
  order_.push_front(r.object_id);
  slots_[r.object_id] = {order_.begin(), r.size_bytes, r.type_id};
  bytes_ += r.size_bytes;
  bytes_by_type_[r.type_id] += r.size_bytes;
  return out;
}

MetricsReport run_simulation(RequestSource& source, Policy& policy,
                             const SimulationOptions& options) {
  MetricsCollector collector(options.metrics, options.hit_rate_targets);
  CacheState* cache = policy.cache();
  LruPolicy* lru = dynamic_cast<LruPolicy*>(&policy);

  if (options.arrival_log)
    *options.arrival_log
        << "l,arrival_time,type,event,Y,s,theta,theta_s,vartheta,vartheta_s\n";

  Request r;
  std::uint64_t index = 0;
  double end_time = 0;
  while (source.next(r)) {
    ++index;
    end_time = r.arrival_time;
    if (cache) collector.on_evictions(cache->advance_to(r.arrival_time));
    RequestOutcome out = policy.on_request(r);
    if (collector.record(r, out)) policy.on_metrics_window();
    if (options.probe) options.probe(index, r, out);
    if (options.arrival_log && index % options.arrival_log_stride == 0) {
      const char* ev = out.event == EventKind::DeepHit      ? "deep_hit"
                       : out.event == EventKind::ShallowHit ? "shallow_hit"
                       : out.event == EventKind::VirtualHit ? "virtual_hit"
                                                            : "miss";
      *options.arrival_log << index << ',' << format_double(r.arrival_time) << ','
                           << r.type_id << ',' << ev << ',' << (out.hit ? 1 : 0)
                           << ',' << format_double(out.s_estimate) << ','
                           << format_double(out.theta) << ','
                           << format_double(out.theta_s) << ','
                           << format_double(out.vartheta) << ','
                           << format_double(out.vartheta_s) << '\n';
    }
  }

  MetricsCollector::Integrals integrals;
  if (cache) {
    cache->advance_to(end_time);
    integrals.total = cache->size_time_integral();
    for (int t : collector.seen_types())
      integrals.per_type[t] = cache->size_time_integral(t);
  } else if (lru) {
    integrals.total = lru->size_time_integral();
    for (int t : collector.seen_types())
      integrals.per_type[t] = lru->size_time_integral(t);
  }
  return collector.finalize(end_time, integrals);
}

}  // namespace ttlsim
