#include "ttlsim/ttl_core.hpp"

#include <cmath>
#include <stdexcept>

namespace ttlsim {

void CacheState::integrate_to(double time) {
  double dt = time - now_;
  if (dt < 0) throw std::logic_error("cache time regression");
  if (dt == 0) return;
  if (bytes_total_ > 0) {
    integral_total_ += static_cast<double>(bytes_total_) * dt;
    for (auto& [t, b] : bytes_by_type_)
      if (b > 0) integral_by_type_[t] += static_cast<double>(b) * dt;
  }
  now_ = time;
}

void CacheState::add_bytes(int type_id, std::uint64_t bytes, bool sign_positive) {
  if (sign_positive) {
    bytes_total_ += bytes;
    bytes_by_type_[type_id] += bytes;
  } else {
    if (bytes_by_type_[type_id] < bytes || bytes_total_ < bytes)
      throw std::logic_error("byte accounting underflow");
    bytes_total_ -= bytes;
    bytes_by_type_[type_id] -= bytes;
  }
}

void CacheState::schedule(double time, Residency level, const std::string& id) {
  queue_.push(Pending{time, seq_++, level, id});
}

std::vector<Eviction> CacheState::advance_to(double time) {
  if (time < now_) throw std::logic_error("advance_to into the past");
  std::vector<Eviction> evictions;
  while (!queue_.empty() && queue_.top().time < time) {
    Pending p = queue_.top();
    queue_.pop();
    auto it = entries_.find(p.object_id);
    if (it == entries_.end()) continue;  // stale
    TimerTuple& tt = it->second.timers;
    double* slot = p.level == Residency::Deep      ? &tt.deep
                   : p.level == Residency::Shallow ? &tt.shallow
                                                   : &tt.shadow;
    if (*slot != p.time) continue;  // timer was reset since scheduling
    integrate_to(p.time);
    *slot = 0;
    if (p.level != Residency::Shadow)
      add_bytes(it->second.type_id, it->second.size_bytes, false);
    Eviction ev;
    ev.object_id = p.object_id;
    ev.level = p.level;
    ev.time = p.time;
    ev.object_dropped = tt.inactive();
    if (ev.object_dropped) entries_.erase(it);
    evictions.push_back(std::move(ev));
  }
  integrate_to(time);
  return evictions;
}

Classification CacheState::classify(const Request& r) const {
  if (r.arrival_time != now_)
    throw std::logic_error("classify before advancing to the arrival time");
  auto it = entries_.find(r.object_id);
  if (it == entries_.end()) return {EventKind::Miss, 0};
  const TimerTuple& tt = it->second.timers;
  if (tt.deep > 0) return {EventKind::DeepHit, tt.deep - now_};
  if (tt.shallow > 0) return {EventKind::ShallowHit, tt.shallow - now_};
  if (tt.shadow > 0) return {EventKind::VirtualHit, tt.shadow - now_};
  return {EventKind::Miss, 0};
}

void CacheState::install(const Request& r, Disposition d) {
  if (d.deep_ttl < 0 || d.shallow_ttl < 0 || d.shadow_ttl < 0)
    throw std::logic_error("negative TTL");
  if (d.deep_ttl > 0 && (d.shallow_ttl > 0 || d.shadow_ttl > 0))
    throw std::logic_error("deep residency excludes the lower level");
  if (d.shallow_ttl > d.shadow_ttl)
    throw std::logic_error("shallow TTL above shadow TTL");

  TimerTuple next;
  if (d.deep_ttl > 0) next.deep = now_ + d.deep_ttl;
  if (d.shallow_ttl > 0) next.shallow = now_ + d.shallow_ttl;
  if (d.shadow_ttl > 0) next.shadow = now_ + d.shadow_ttl;

  auto it = entries_.find(r.object_id);
  bool was_resident = false;
  if (it != entries_.end()) {
    const TimerTuple& cur = it->second.timers;
    was_resident = cur.deep > 0 || cur.shallow > 0;
    if (was_resident) add_bytes(it->second.type_id, it->second.size_bytes, false);
  }
  if (next.inactive()) {
    if (it != entries_.end()) entries_.erase(it);
    return;
  }
  Entry& e = it != entries_.end() ? it->second : entries_[r.object_id];
  e.timers = next;
  e.size_bytes = r.size_bytes;
  e.type_id = r.type_id;
  if (next.deep > 0 || next.shallow > 0) add_bytes(r.type_id, r.size_bytes, true);
  if (next.shallow > 0) schedule(next.shallow, Residency::Shallow, r.object_id);
  if (next.shadow > 0) schedule(next.shadow, Residency::Shadow, r.object_id);
  if (next.deep > 0) schedule(next.deep, Residency::Deep, r.object_id);
}

std::uint64_t CacheState::resident_bytes(int type_id) const {
  auto it = bytes_by_type_.find(type_id);
  return it == bytes_by_type_.end() ? 0 : it->second;
}

double CacheState::size_time_integral(int type_id) const {
  auto it = integral_by_type_.find(type_id);
  return it == integral_by_type_.end() ? 0 : it->second;
}

bool CacheState::deep_resident(const std::string& id) const {
  auto it = entries_.find(id);
  return it != entries_.end() && it->second.timers.deep > 0;
}

bool CacheState::shallow_resident(const std::string& id) const {
  auto it = entries_.find(id);
  return it != entries_.end() && it->second.timers.shallow > 0;
}

bool CacheState::shadow_resident(const std::string& id) const {
  auto it = entries_.find(id);
  return it != entries_.end() && it->second.timers.shadow > 0;
}

TimerTuple CacheState::timers(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? TimerTuple{} : it->second.timers;
}

}  // namespace ttlsim
