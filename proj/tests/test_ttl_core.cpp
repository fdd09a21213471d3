#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "ttlsim/ttl_core.hpp"

using namespace ttlsim;

namespace {

Request req(double t, const char* id, std::uint64_t size = 1, int type = 1) {
  Request r;
  r.arrival_time = t;
  r.object_id = id;
  r.type_id = type;
  r.size_bytes = size;
  return r;
}

}  // namespace

TEST_CASE("expiry exactly at the arrival instant is still a hit") {
  CacheState cache;
  cache.advance_to(0);
  cache.install(req(0, "a"), Disposition::deep(5.0));
  cache.advance_to(5.0);
  Classification c = cache.classify(req(5.0, "a"));
  CHECK(c.kind == EventKind::DeepHit);
  CHECK(c.remaining == 0.0);
}

TEST_CASE("strict overshoot evicts and integrates the full residency") {
  CacheState cache;
  cache.advance_to(0);
  cache.install(req(0, "a", 3), Disposition::deep(5.0));
  auto evs = cache.advance_to(5.0001);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].object_id == "a");
  CHECK(evs[0].object_dropped);
  CHECK(cache.classify(req(5.0001, "a")).kind == EventKind::Miss);
  CHECK(cache.size_time_integral() == doctest::Approx(3 * 5.0));
  CHECK(cache.resident_bytes() == 0);
}

TEST_CASE("piecewise integration across two expiries") {
  CacheState cache;
  cache.install(req(0, "x", 10), Disposition::deep(1.0));
  cache.install(req(0, "y", 20), Disposition::deep(2.0));
  cache.advance_to(3.0);
  CHECK(cache.size_time_integral() == doctest::Approx(10 * 1.0 + 20 * 2.0));
}

TEST_CASE("shallow-plus-shadow with zero shallow TTL degrades to shadow only") {
  CacheState cache;
  cache.advance_to(10.0);
  cache.install(req(10, "a", 8), Disposition::shallow_plus_shadow(0.0, 4.0));
  TimerTuple t = cache.timers("a");
  CHECK(t.deep == 0);
  CHECK(t.shallow == 0);
  CHECK(t.shadow == doctest::Approx(14.0));
  CHECK(cache.resident_bytes() == 0);
  CHECK(cache.classify(req(10.0, "a")).kind == EventKind::VirtualHit);
}

TEST_CASE("install timestamps are absolute") {
  CacheState cache;
  cache.advance_to(10.0);
  cache.install(req(10, "d"), Disposition::deep(3.0));
  CHECK(cache.timers("d").deep == doctest::Approx(13.0));
  cache.install(req(10, "s"), Disposition::shallow_plus_shadow(1.0, 4.0));
  CHECK(cache.timers("s").shallow == doctest::Approx(11.0));
  CHECK(cache.timers("s").shadow == doctest::Approx(14.0));
}

TEST_CASE("shadow entries carry no bytes; shallow entries do") {
  CacheState cache;
  cache.install(req(0, "a", 100, 2), Disposition::shallow_plus_shadow(2.0, 6.0));
  CHECK(cache.resident_bytes() == 100);
  CHECK(cache.resident_bytes(2) == 100);
  auto evs = cache.advance_to(3.0);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].level == Residency::Shallow);
  CHECK_FALSE(evs[0].object_dropped);  // shadow still alive
  CHECK(cache.resident_bytes() == 0);
  CHECK(cache.classify(req(3.0, "a")).kind == EventKind::VirtualHit);
  evs = cache.advance_to(7.0);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].level == Residency::Shadow);
  CHECK(evs[0].object_dropped);
  CHECK(cache.size_time_integral(2) == doctest::Approx(100 * 2.0));
}

TEST_CASE("classification order: deep, shallow, virtual, miss") {
  CacheState cache;
  CHECK(cache.classify(req(0, "nope")).kind == EventKind::Miss);
  cache.install(req(0, "s"), Disposition::shallow_plus_shadow(2.0, 5.0));
  CHECK(cache.classify(req(0, "s")).kind == EventKind::ShallowHit);
  cache.advance_to(1.0);
  Classification c = cache.classify(req(1.0, "s"));
  CHECK(c.kind == EventKind::ShallowHit);
  CHECK(c.remaining == doctest::Approx(1.0));
}

TEST_CASE("reinstall resets timers and invalidates stale expiries") {
  CacheState cache;
  cache.install(req(0, "a", 5), Disposition::deep(2.0));
  cache.advance_to(1.0);
  cache.install(req(1, "a", 5), Disposition::deep(2.0));  // now expires at 3
  auto evs = cache.advance_to(2.5);  // the original expiry at 2 is stale
  CHECK(evs.empty());
  CHECK(cache.deep_resident("a"));
  evs = cache.advance_to(4.0);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].time == doctest::Approx(3.0));
  // integral: 5 bytes over [0, 3]
  CHECK(cache.size_time_integral() == doctest::Approx(15.0));
}

TEST_CASE("promotion from shallow to deep keeps byte accounting consistent") {
  CacheState cache;
  cache.install(req(0, "a", 7), Disposition::shallow_plus_shadow(3.0, 9.0));
  cache.advance_to(1.0);
  cache.install(req(1, "a", 7), Disposition::deep(4.0));
  CHECK(cache.resident_bytes() == 7);
  TimerTuple t = cache.timers("a");
  CHECK(t.deep == doctest::Approx(5.0));
  CHECK(t.shallow == 0);
  CHECK(t.shadow == 0);
  cache.advance_to(6.0);
  CHECK(cache.resident_bytes() == 0);
  CHECK(cache.size_time_integral() == doctest::Approx(7 * 5.0));
  CHECK(cache.tracked_objects() == 0);
}

TEST_CASE("time regression is an internal error") {
  CacheState cache;
  cache.advance_to(5.0);
  CHECK_THROWS_AS(cache.advance_to(4.0), std::logic_error);
}

TEST_CASE("tuples stay in legal states under random operation sequences") {
  CacheState cache;
  std::uint64_t s = 88172645463325252ull;
  auto rnd = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s % 10000) / 10000.0;
  };
  double now = 0;
  for (int i = 0; i < 20000; ++i) {
    now += rnd() * 2.0;
    cache.advance_to(now);
    std::string id = "o" + std::to_string(static_cast<int>(rnd() * 50));
    Request r = req(now, id.c_str(), 1 + static_cast<int>(rnd() * 10));
    double choice = rnd();
    if (choice < 0.4) {
      cache.install(r, Disposition::deep(rnd() * 5.0));
    } else if (choice < 0.8) {
      double shadow = rnd() * 6.0;
      cache.install(r, Disposition::shallow_plus_shadow(rnd() * shadow, shadow));
    } else if (choice < 0.9) {
      cache.install(r, Disposition::shadow_only(rnd() * 6.0));
    } else {
      cache.install(r, Disposition::none());
    }
    cache.for_each_entry([&](const std::string&, const TimerTuple& t) {
      CHECK(t.legal());
      CHECK_FALSE(t.inactive());  // inactive entries are erased
    });
  }
}

namespace {

// Brute-force reference: recomputes every residency by linear scan, no event
// queue, integrating occupancy between consecutive operation timestamps.
struct ReferenceCache {
  struct Obj {
    double deep = 0, shallow = 0, shadow = 0;
    std::uint64_t size = 0;
  };
  std::map<std::string, Obj> objs;
  double now = 0;
  double integral = 0;

  void advance(double t) {
    // walk over expiry boundaries in time order
    for (;;) {
      double next = t;
      for (auto& [id, o] : objs) {
        for (double e : {o.deep, o.shallow}) {
          if (e > now && e < next) next = e;
        }
      }
      std::uint64_t bytes = 0;
      for (auto& [id, o] : objs)
        if (o.deep > now || o.shallow > now) bytes += o.size;
      integral += static_cast<double>(bytes) * (next - now);
      now = next;
      if (now >= t) break;
    }
    now = t;
  }

  bool resident(const Obj& o) const { return o.deep >= now && o.deep > 0; }

  int classify(const std::string& id) const {  // 0 deep, 1 shallow, 2 virtual, 3 miss
    auto it = objs.find(id);
    if (it == objs.end()) return 3;
    const Obj& o = it->second;
    if (o.deep >= now && o.deep > 0) return 0;
    if (o.shallow >= now && o.shallow > 0) return 1;
    if (o.shadow >= now && o.shadow > 0) return 2;
    return 3;
  }

  void install_deep(const std::string& id, std::uint64_t size, double ttl) {
    Obj& o = objs[id];
    o = Obj{};
    o.size = size;
    if (ttl > 0) o.deep = now + ttl;
  }
  void install_pair(const std::string& id, std::uint64_t size, double ts,
                    double td) {
    Obj& o = objs[id];
    o = Obj{};
    o.size = size;
    if (ts > 0) o.shallow = now + ts;
    if (td > 0) o.shadow = now + td;
  }
};

}  // namespace

TEST_CASE("event-queue cache agrees with a brute-force reference") {
  CacheState cache;
  ReferenceCache ref;
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  auto rnd = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s % 100000) / 100000.0;
  };
  double now = 0;
  for (int i = 0; i < 10000; ++i) {
    now += rnd() * 1.5;
    cache.advance_to(now);
    ref.advance(now);
    std::string id = "o" + std::to_string(static_cast<int>(rnd() * 40));
    std::uint64_t size = 1 + static_cast<std::uint64_t>(rnd() * 9);
    Request r = req(now, id.c_str(), size);

    Classification c = cache.classify(r);
    int expected = ref.classify(id);
    int got = c.kind == EventKind::DeepHit      ? 0
              : c.kind == EventKind::ShallowHit ? 1
              : c.kind == EventKind::VirtualHit ? 2
                                                : 3;
    REQUIRE(got == expected);

    if (rnd() < 0.5) {
      double ttl = rnd() * 4.0;
      cache.install(r, Disposition::deep(ttl));
      ref.install_deep(id, size, ttl);
    } else {
      double shadow = rnd() * 5.0;
      double shallow = rnd() * shadow;
      cache.install(r, Disposition::shallow_plus_shadow(shallow, shadow));
      ref.install_pair(id, size, shallow, shadow);
    }
    if (i % 500 == 0)
      REQUIRE(cache.size_time_integral() ==
              doctest::Approx(ref.integral).epsilon(1e-9));
  }
  CHECK(cache.size_time_integral() == doctest::Approx(ref.integral).epsilon(1e-9));
}
