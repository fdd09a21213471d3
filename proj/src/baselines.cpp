#include "ttlsim/baselines.hpp"

#include <cmath>

#include "ttlsim/errors.hpp"

namespace ttlsim {

namespace {

constexpr double kTtlCap = 1e9;  // seconds; beyond this the solve is divergent
constexpr double kRelTol = 1e-10;

// Bisection on a strictly increasing objective; bracket grows by doubling.
template <typename Fn>
double solve_increasing(Fn&& f, double target, const char* what) {
  double lo = 0;
  double f0 = f(0.0);
  if (f0 >= target) return 0;
  double hi = 1.0;
  while (f(hi) < target) {
    hi *= 2;
    if (hi > kTtlCap)
      throw InfeasibleError(std::string(what) +
                            ": no solution below the TTL cap (diverges)");
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= kRelTol * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RateEstimate estimate_rates_from_trace(const std::vector<Request>& stream,
                                       double horizon) {
  if (horizon <= 0) throw ConfigError("estimation horizon must be positive");
  if (stream.empty()) throw ConfigError("cannot estimate rates from an empty stream");
  RateEstimate est;
  est.horizon = horizon;
  std::unordered_map<std::string, std::size_t> index;
  struct Accum {
    std::uint64_t count = 0;
    double bytes = 0;
  };
  std::vector<Accum> acc;
  for (const auto& r : stream) {
    auto [it, inserted] = index.emplace(r.object_id, acc.size());
    if (inserted) {
      acc.push_back({});
      est.objects.push_back({r.object_id, 0, 0, 0});
    }
    Accum& a = acc[it->second];
    ++a.count;
    a.bytes += static_cast<double>(r.size_bytes);
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto& o = est.objects[i];
    o.count = acc[i].count;
    o.rate = static_cast<double>(acc[i].count) / horizon;
    o.mean_size = acc[i].bytes / static_cast<double>(acc[i].count);
    est.total_rate += o.rate;
    est.total_byte_rate += o.rate * o.mean_size;
  }
  return est;
}

RateEstimate estimate_rates_from_source(RequestSource& source, double horizon,
                                        std::size_t limit) {
  std::vector<Request> buf;
  Request r;
  while (buf.size() < limit && source.next(r)) buf.push_back(r);
  return estimate_rates_from_trace(buf, horizon);
}

double che_expected_size_at(const RateEstimate& rates, double ttl,
                            CheSizeMode mode) {
  double s = 0;
  for (const auto& o : rates.objects) {
    double p_in = -std::expm1(-o.rate * ttl);
    s += (mode == CheSizeMode::ObjectCount ? 1.0 : o.mean_size) * p_in;
  }
  return s;
}

double che_characteristic_time(const RateEstimate& rates, double capacity,
                               CheSizeMode mode) {
  double total = mode == CheSizeMode::ObjectCount
                     ? static_cast<double>(rates.objects.size())
                     : [&] {
                         double t = 0;
                         for (const auto& o : rates.objects) t += o.mean_size;
                         return t;
                       }();
  if (capacity <= 0 || capacity >= total)
    throw InfeasibleError("capacity must be in (0, total content size)");
  return solve_increasing(
      [&](double t) { return che_expected_size_at(rates, t, mode); }, capacity,
      "characteristic time");
}

double che_hit_rate_at(const RateEstimate& rates, double ttl, HitRateMode mode) {
  double num = 0, den = 0;
  for (const auto& o : rates.objects) {
    double w = mode == HitRateMode::ObjectHitRate ? 1.0 : o.mean_size;
    double p = -std::expm1(-o.rate * ttl);
    num += w * o.rate * p;
    den += w * o.rate;
  }
  return den == 0 ? 0 : num / den;
}

CheSolution che_ttl_for_target_hitrate(const RateEstimate& rates, double target,
                                       HitRateMode mode) {
  if (target < 0 || target >= 1)
    throw InfeasibleError("target hit rate must be in [0, 1)");
  CheSolution sol;
  if (target == 0) return sol;
  sol.ttl = solve_increasing(
      [&](double t) { return che_hit_rate_at(rates, t, mode); }, target,
      "hit-rate inversion");
  sol.predicted_hit_rate = che_hit_rate_at(rates, sol.ttl, mode);
  sol.expected_size_bytes = che_expected_size_at(rates, sol.ttl, CheSizeMode::Bytes);
  sol.expected_size_objects =
      che_expected_size_at(rates, sol.ttl, CheSizeMode::ObjectCount);
  return sol;
}

}  // namespace ttlsim
