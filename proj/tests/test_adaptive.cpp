#include <doctest.h>

#include <cmath>

#include "ttlsim/adaptive.hpp"
#include "ttlsim/analytics.hpp"
#include "ttlsim/errors.hpp"
#include "ttlsim/rng.hpp"
#include "ttlsim/simulate.hpp"
#include "ttlsim/workload.hpp"

using namespace ttlsim;

namespace {

ControllerConfig basic_config(double h_star, double bound) {
  ControllerConfig cfg;
  cfg.targets[1] = {h_star, 0.0, bound};
  cfg.eta = StepSchedule::decaying(1.0, 0.6);
  cfg.eta_s = StepSchedule::decaying(0.02, 1.0);
  return cfg;
}

PopularitySpec one_hit_heavy_spec() {
  PopularitySpec spec;
  spec.total_rate = 50.0;
  TypeSpec t;
  t.type_id = 1;
  ZipfParams z;
  z.object_count = 200;
  z.exponent = 0.8;
  z.recurrent_mass = 0.7;
  t.objects = expand_zipf(1, z);
  t.rare_fraction = 0.3;
  spec.types.push_back(t);
  return spec;
}

}  // namespace

TEST_CASE("threshold function regions and fixed values") {
  CHECK(gamma_threshold(0.5, 0.3, 0.1) == 0.3);   // x <= 1 - 3eps/2
  CHECK(gamma_threshold(0.97, 0.3, 0.1) == 1.0);  // x >= 1 - eps/2
  CHECK(gamma_threshold(0.8, 0.0, 0.2) == doctest::Approx(0.5));  // midpoint
}

TEST_CASE("threshold function is monotone with bounded slope") {
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    double eps = rng.uniform(0.02, 0.6);
    double y = rng.uniform();
    double x1 = rng.uniform(), x2 = rng.uniform();
    if (x1 > x2) std::swap(x1, x2);
    CHECK(gamma_threshold(x1, y, eps) <= gamma_threshold(x2, y, eps) + 1e-12);
    double y2 = rng.uniform();
    double ylo = std::min(y, y2), yhi = std::max(y, y2);
    double x = rng.uniform();
    CHECK(gamma_threshold(x, ylo, eps) <= gamma_threshold(x, yhi, eps) + 1e-12);
  }
  // finite-difference x-slope over a grid never exceeds 4/eps
  for (double eps : {0.05, 0.1, 0.3}) {
    double h = 1e-5;
    double worst = 0;
    for (int i = 0; i <= 1000; ++i) {
      double x = i / 1000.0;
      double d = (gamma_threshold(std::min(1.0, x + h), 0.0, eps) -
                  gamma_threshold(x, 0.0, eps)) / h;
      worst = std::max(worst, d);
    }
    CHECK(worst <= 4.0 / eps + 1e-6);
  }
}

TEST_CASE("latent hit-rate update arithmetic and projection") {
  ControllerConfig cfg = basic_config(0.6, 10.0);
  cfg.eta = StepSchedule::constant(0.01);
  ControllerState st(cfg, false);

  SUBCASE("miss increments by eta * h*") {
    // start the latent variable at 0.5 via a warm override
    ControllerConfig warm = cfg;
    warm.initial_vartheta = 0.5;
    ControllerState s(warm, false);
    s.update_hit_latent(1, 1, 1.0, false);
    CHECK(s.vartheta(1) == doctest::Approx(0.506));
  }
  SUBCASE("hit decrements by eta * (1 - h*)") {
    ControllerConfig warm = cfg;
    warm.initial_vartheta = 0.5;
    ControllerState s(warm, false);
    s.update_hit_latent(1, 1, 1.0, true);
    CHECK(s.vartheta(1) == doctest::Approx(0.496));
  }
  SUBCASE("projection clamps at 1") {
    ControllerConfig warm = cfg;
    warm.initial_vartheta = 0.999;
    ControllerState s(warm, false);
    s.update_hit_latent(1, 1, 1.0, false);
    CHECK(s.vartheta(1) == 1.0);
  }
  (void)st;
}

TEST_CASE("step schedules") {
  CHECK(StepSchedule::decaying(1.0, 0.75).at(16) == doctest::Approx(1.0 / 8));
  CHECK(StepSchedule::constant(1e-2).at(1) == 1e-2);
  CHECK(StepSchedule::constant(1e-2).at(999999) == 1e-2);
  CHECK(StepSchedule::decaying(2.0, 1.0).at(4) == doctest::Approx(0.5));
  CHECK_THROWS_AS(StepSchedule::decaying(1.0, 0.4).validate(false), ConfigError);
}

TEST_CASE("normalized-size estimator uses pre-update TTLs") {
  CHECK(estimate_s({EventKind::Miss, 0}, 7.0, 2.5) == 2.5);
  CHECK(estimate_s({EventKind::VirtualHit, 1.0}, 7.0, 2.5) == 7.0);
  CHECK(estimate_s({EventKind::DeepHit, 3.0}, 7.0, 2.5) == 4.0);
  CHECK(estimate_s({EventKind::ShallowHit, 0.5}, 7.0, 2.5) == 6.5);
}

TEST_CASE("controller state keeps invariants after every update") {
  ControllerConfig cfg = basic_config(0.7, 25.0);
  cfg.targets[1].normalized_size = 1.0;
  ControllerState st(cfg, true);
  Rng rng(37);
  for (std::uint64_t l = 1; l <= 50000; ++l) {
    st.update_hit_latent(1, l, 1.0, rng.uniform() < 0.5);
    st.update_size_latent(1, l, 1.0, rng.uniform(0.0, 30.0));
    double v = st.vartheta(1), vs = st.vartheta_s(1);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(vs >= 0.0);
    CHECK(vs <= 1.0);
    CHECK(st.theta_s(1) <= st.theta(1) + 1e-12);
    CHECK(st.theta(1) <= cfg.targets[1].ttl_bound + 1e-12);
  }
}

TEST_CASE("pinned filtering controller reproduces the single-level policy") {
  // vartheta_s pinned at 1 with a zero size step makes theta_s == theta;
  // the hit/miss sequence and latent trajectory then match the single-level
  // controller on the same stream.
  PopularitySpec spec = one_hit_heavy_spec();
  ControllerConfig cfg = basic_config(0.6, 50.0);

  ControllerConfig pinned = cfg;
  pinned.initial_vartheta_s = 1.0;
  pinned.eta_s = StepSchedule::constant(0.0);
  pinned.targets[1].normalized_size = 0.0;

  DttlPolicy dttl(cfg);
  FttlPolicy fttl(pinned);

  PoissonGenerator gen(spec, RareMode{}, 77, 50000);
  Request r;
  while (gen.next(r)) {
    dttl.cache()->advance_to(r.arrival_time);
    fttl.cache()->advance_to(r.arrival_time);
    RequestOutcome a = dttl.on_request(r);
    RequestOutcome b = fttl.on_request(r);
    CHECK(a.hit == b.hit);
    CHECK(a.theta == doctest::Approx(b.theta).epsilon(1e-12));
    CHECK(b.theta_s == doctest::Approx(b.theta).epsilon(1e-12));
  }
}

TEST_CASE("full filtering keeps one-hit wonders out of the deep cache") {
  // theta_s pinned to zero: deep installs happen only on shallow or virtual
  // hits, which a one-hit wonder never produces.
  std::map<int, StaticFttlPolicy::Pair> ttls{{1, {30.0, 0.0}}};
  StaticFttlPolicy policy(ttls);
  PopularitySpec spec = one_hit_heavy_spec();
  PoissonGenerator gen(spec, RareMode{}, 41, 100000);
  Request r;
  while (gen.next(r)) {
    policy.cache()->advance_to(r.arrival_time);
    policy.on_request(r);
    if (is_rare_id(r.object_id)) CHECK_FALSE(policy.cache()->deep_resident(r.object_id));
  }
}

TEST_CASE("latent update drift has the right sign around the fixed point") {
  // Fixed TTL pair (theta = theta_s): below the solution of h(theta) = h*
  // the mean update is positive, above it is negative.
  PopularitySpec spec;
  spec.total_rate = 20.0;
  TypeSpec t;
  t.type_id = 1;
  ZipfParams z;
  z.object_count = 100;
  z.exponent = 0.9;
  z.recurrent_mass = 1.0;
  t.objects = expand_zipf(1, z);
  spec.types.push_back(t);

  const double h_star = 0.5;
  OracleTypeInput oracle = oracle_input_from_spec(spec, 1);
  double theta_star = 0;
  {
    double lo = 0, hi = 1000;
    for (int i = 0; i < 100; ++i) {
      double mid = 0.5 * (lo + hi);
      if (oracle_hit_rate(oracle, mid, mid, HitRateMode::ObjectHitRate) < h_star)
        lo = mid;
      else
        hi = mid;
    }
    theta_star = 0.5 * (lo + hi);
  }

  auto drift_at = [&](double theta) {
    std::map<int, StaticFttlPolicy::Pair> ttls{{1, {theta, theta}}};
    StaticFttlPolicy policy(ttls);
    PoissonGenerator gen(spec, RareMode{}, 53, 100000);
    Request r;
    double sum = 0;
    std::uint64_t n = 0;
    while (gen.next(r)) {
      policy.cache()->advance_to(r.arrival_time);
      RequestOutcome out = policy.on_request(r);
      sum += h_star - (out.hit ? 1.0 : 0.0);
      ++n;
    }
    return sum / static_cast<double>(n);
  };

  CHECK(drift_at(theta_star * 0.5) > 0);
  CHECK(drift_at(theta_star * 2.0) < 0);
}

TEST_CASE("byte-hit-rate mode weights updates by request size") {
  // two objects with very different sizes; the byte-weighted controller
  // steers the byte hit rate to its target
  PopularitySpec spec;
  spec.total_rate = 20.0;
  TypeSpec t;
  t.type_id = 1;
  t.objects.push_back({"big", 0.3, 1000});
  t.objects.push_back({"small", 0.7, 10});
  spec.types.push_back(t);

  ControllerConfig cfg;
  cfg.targets[1] = {0.5, 0.0, 30.0};
  cfg.mode = HitRateMode::ByteHitRate;
  cfg.eta = StepSchedule::decaying(0.01, 0.6);  // sizes scale the steps
  DttlPolicy policy(cfg);
  PoissonGenerator gen(spec, RareMode{}, 83, 400000);
  SimulationOptions opts;
  opts.metrics.window_seconds = 1000;
  opts.hit_rate_targets = {{1, 0.5}};
  MetricsReport rep = run_simulation(gen, policy, opts);
  CHECK(std::abs(rep.bhr - 0.5) < 0.02);
}

TEST_CASE("constant size step with target scaling stays stable") {
  PopularitySpec spec = one_hit_heavy_spec();
  ControllerConfig cfg = basic_config(0.5, 50.0);
  cfg.targets[1].normalized_size = 1.5;
  cfg.eta_s = StepSchedule::constant(1e-3);
  cfg.scale_size_step = true;
  FttlPolicy policy(cfg);
  PoissonGenerator gen(spec, RareMode{}, 89, 300000);
  SimulationOptions opts;
  opts.metrics.window_seconds = 500;
  opts.hit_rate_targets = {{1, 0.5}};
  MetricsReport rep = run_simulation(gen, policy, opts);
  CHECK(std::abs(rep.ohr - 0.5) < 0.02);
  CHECK(rep.types[1].final_vartheta_s >= 0.0);
  CHECK(rep.types[1].final_vartheta_s <= 1.0);
}

TEST_CASE("two-level mutations per classification") {
  // Fixed pair keeps the TTLs legible: theta=10, theta_s=4.
  std::map<int, StaticFttlPolicy::Pair> ttls{{1, {10.0, 4.0}}};

  SUBCASE("first request: object shallow, metadata shadow") {
    StaticFttlPolicy p(ttls);
    Request r{0.0, "x", 1, 1};
    p.cache()->advance_to(0.0);
    RequestOutcome out = p.on_request(r);
    CHECK(out.event == EventKind::Miss);
    TimerTuple t = p.cache()->timers("x");
    CHECK(t.shallow == doctest::Approx(4.0));
    CHECK(t.shadow == doctest::Approx(10.0));
    CHECK(t.deep == 0.0);
  }
  SUBCASE("second request within the shallow TTL promotes to deep") {
    StaticFttlPolicy p(ttls);
    p.cache()->advance_to(0.0);
    p.on_request({0.0, "x", 1, 1});
    p.cache()->advance_to(3.0);
    RequestOutcome out = p.on_request({3.0, "x", 1, 1});
    CHECK(out.event == EventKind::ShallowHit);
    CHECK(out.hit);
    TimerTuple t = p.cache()->timers("x");
    CHECK(t.deep == doctest::Approx(13.0));
    CHECK(t.shallow == 0.0);
    CHECK(t.shadow == 0.0);
  }
  SUBCASE("second request after shallow expiry but within shadow: virtual hit") {
    StaticFttlPolicy p(ttls);
    p.cache()->advance_to(0.0);
    p.on_request({0.0, "x", 1, 1});
    p.cache()->advance_to(7.0);
    RequestOutcome out = p.on_request({7.0, "x", 1, 1});
    CHECK(out.event == EventKind::VirtualHit);
    CHECK_FALSE(out.hit);  // a virtual hit counts as a miss for Y
    CHECK(out.s_estimate == doctest::Approx(10.0));
    TimerTuple t = p.cache()->timers("x");
    CHECK(t.deep == doctest::Approx(17.0));
    CHECK(t.shallow == 0.0);
    CHECK(t.shadow == 0.0);
  }
}
