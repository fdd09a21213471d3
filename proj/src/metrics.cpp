#include "ttlsim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ttlsim {

MetricsCollector::MetricsCollector(MetricsConfig cfg,
                                   std::map<int, double> hit_rate_targets)
    : cfg_(cfg), targets_(std::move(hit_rate_targets)) {}

void MetricsCollector::close_interval(const OpenInterval& iv, double until) {
  double span = std::min(until - iv.start, iv.granted_ttl);
  if (span > 0)
    eq2_byte_seconds_[iv.type_id] += static_cast<double>(iv.bytes) * span;
}

void MetricsCollector::flush_window() {
  for (const auto& [t, acc] : window_accum_) {
    if (acc.requests == 0) continue;
    WindowRow row;
    row.index = window_index_;
    row.start_time = static_cast<double>(window_index_) * cfg_.window_seconds;
    row.type_id = t;
    row.requests = acc.requests;
    row.hits = acc.hits;
    row.bytes = acc.bytes;
    row.hit_bytes = acc.hit_bytes;
    row.hit_rate = static_cast<double>(acc.hits) / static_cast<double>(acc.requests);
    row.byte_hit_rate =
        acc.bytes == 0 ? 0
                       : static_cast<double>(acc.hit_bytes) /
                             static_cast<double>(acc.bytes);
    row.mean_theta = acc.theta_sum / static_cast<double>(acc.requests);
    row.mean_theta_s = acc.theta_s_sum / static_cast<double>(acc.requests);
    windows_.push_back(row);
  }
  window_accum_.clear();
}

bool MetricsCollector::record(const Request& r, const RequestOutcome& out) {
  bool new_window = false;
  auto w = static_cast<std::uint64_t>(r.arrival_time / cfg_.window_seconds);
  if (!any_) {
    window_index_ = w;
    any_ = true;
  } else if (w != window_index_) {
    flush_window();
    window_index_ = w;
    new_window = true;
  }

  TypeMetrics& tm = types_[r.type_id];
  ++tm.requests;
  tm.bytes += r.size_bytes;
  ++requests_;
  bytes_ += r.size_bytes;
  if (out.hit) {
    ++tm.hits;
    tm.hit_bytes += r.size_bytes;
    ++hits_;
    hit_bytes_ += r.size_bytes;
  }
  tm.final_theta = out.theta;
  tm.final_theta_s = out.theta_s;
  tm.final_vartheta = out.vartheta;
  tm.final_vartheta_s = out.vartheta_s;

  WindowAccum& acc = window_accum_[r.type_id];
  ++acc.requests;
  acc.bytes += r.size_bytes;
  if (out.hit) {
    ++acc.hits;
    acc.hit_bytes += r.size_bytes;
  }
  acc.theta_sum += out.theta;
  acc.theta_s_sum += out.theta_s;

  if (!std::isnan(out.granted_ttl)) {
    auto it = open_.find(r.object_id);
    if (it != open_.end()) {
      close_interval(it->second, r.arrival_time);
      it->second = {r.arrival_time, out.granted_ttl, r.size_bytes, r.type_id};
    } else {
      open_.emplace(r.object_id, OpenInterval{r.arrival_time, out.granted_ttl,
                                              r.size_bytes, r.type_id});
    }
  }
  return new_window;
}

void MetricsCollector::on_evictions(const std::vector<Eviction>& evs) {
  for (const auto& ev : evs) {
    if (!ev.object_dropped) continue;
    auto it = open_.find(ev.object_id);
    if (it == open_.end()) continue;
    // The last timer outlives the residency, so the granted TTL elapsed in full.
    close_interval(it->second, it->second.start + it->second.granted_ttl);
    open_.erase(it);
  }
}

MetricsReport MetricsCollector::finalize(double end_time,
                                         const Integrals& integrals) {
  for (const auto& [id, iv] : open_) close_interval(iv, end_time);
  open_.clear();
  flush_window();

  MetricsReport rep;
  rep.windows = windows_;
  rep.requests = requests_;
  rep.hits = hits_;
  rep.horizon = end_time;
  rep.ohr = requests_ ? static_cast<double>(hits_) / static_cast<double>(requests_) : 0;
  rep.bhr = bytes_ ? static_cast<double>(hit_bytes_) / static_cast<double>(bytes_) : 0;
  rep.avg_cache_bytes = end_time > 0 ? integrals.total / end_time : 0;

  for (auto& [t, tm] : types_) {
    tm.ohr = tm.requests ? static_cast<double>(tm.hits) / static_cast<double>(tm.requests) : 0;
    tm.bhr = tm.bytes ? static_cast<double>(tm.hit_bytes) / static_cast<double>(tm.bytes) : 0;
    double integral = 0;
    auto it = integrals.per_type.find(t);
    if (it != integrals.per_type.end()) integral = it->second;
    tm.normalized_size = tm.bytes ? integral / static_cast<double>(tm.bytes) : 0;
    tm.eq2_normalized_size =
        tm.bytes ? eq2_byte_seconds_[t] / static_cast<double>(tm.bytes) : 0;
    tm.avg_cache_bytes = end_time > 0 ? integral / end_time : 0;

    auto target = targets_.find(t);
    if (target != targets_.end()) {
      std::uint64_t windows = 0, outages = 0;
      for (const auto& row : windows_) {
        if (row.type_id != t) continue;
        ++windows;
        if (std::abs(row.hit_rate - target->second) > cfg_.outage_threshold)
          ++outages;
      }
      tm.outage_fraction =
          windows ? static_cast<double>(outages) / static_cast<double>(windows) : 0;
    }
    rep.types[t] = tm;
  }

  // Aggregate outage against the request-weighted target.
  if (!targets_.empty() && requests_ > 0) {
    double weighted_target = 0;
    for (const auto& [t, tm] : types_) {
      auto it = targets_.find(t);
      if (it != targets_.end())
        weighted_target += it->second * static_cast<double>(tm.requests);
    }
    weighted_target /= static_cast<double>(requests_);
    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> agg;
    for (const auto& row : windows_) {
      auto& [req, hit] = agg[row.index];
      req += row.requests;
      hit += row.hits;
    }
    std::uint64_t outages = 0;
    for (const auto& [idx, rh] : agg) {
      double hr = static_cast<double>(rh.second) / static_cast<double>(rh.first);
      if (std::abs(hr - weighted_target) > cfg_.outage_threshold) ++outages;
    }
    rep.outage_fraction =
        agg.empty() ? 0 : static_cast<double>(outages) / static_cast<double>(agg.size());
  }
  return rep;
}

}  // namespace ttlsim
