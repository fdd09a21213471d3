#include "ttlsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ttlsim/errors.hpp"

namespace ttlsim {

namespace {

constexpr double kResidual = 1e-10;

double family_cdf(InterArrival::Family family, double rate, double x,
                  double weibull_shape, double hyper_p, double hyper_mean_ratio) {
  if (x <= 0) return 0;
  switch (family) {
    case InterArrival::Family::Exponential:
      return -std::expm1(-rate * x);
    case InterArrival::Family::Weibull: {
      double scale = 1.0 / (rate * std::tgamma(1.0 + 1.0 / weibull_shape));
      return -std::expm1(-std::pow(x / scale, weibull_shape));
    }
    case InterArrival::Family::HyperExp2: {
      double m2 = 1.0 / (rate * (hyper_p * hyper_mean_ratio + (1.0 - hyper_p)));
      double m1 = hyper_mean_ratio * m2;
      return hyper_p * -std::expm1(-x / m1) +
             (1.0 - hyper_p) * -std::expm1(-x / m2);
    }
  }
  return 0;
}

// Adaptive Simpson on [a, b] to absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (b <= a) return 0;
  double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

}  // namespace

void OracleTypeInput::validate() const {
  for (const auto& c : recurrent) {
    if (c.rate <= 0) throw ConfigError("oracle class rates must be positive");
    if (c.size <= 0) throw ConfigError("oracle class sizes must be positive");
  }
  if (rare_rate < 0) throw ConfigError("rare rate must be >= 0");
  if (recurrent.empty() && rare_rate == 0)
    throw ConfigError("oracle input has no traffic");
}

double oracle_cdf(const OracleTypeInput& in, double rate, double x) {
  return family_cdf(in.family, rate, x, in.weibull_shape, in.hyper_p,
                    in.hyper_mean_ratio);
}

double oracle_mean_truncated(const OracleTypeInput& in, double rate,
                             double theta) {
  if (theta <= 0) return 0;
  if (in.family == InterArrival::Family::Exponential)
    return -std::expm1(-rate * theta) / rate;
  // E[min(X, theta)] = integral_0^theta (1 - F(x)) dx
  return integrate(
      [&](double x) { return 1.0 - oracle_cdf(in, rate, x); }, 0, theta, 1e-10);
}

double oracle_hit_rate(const OracleTypeInput& in, double theta, double theta_s,
                       HitRateMode mode) {
  in.validate();
  if (theta_s < 0 || theta_s > theta)
    throw ConfigError("oracle needs 0 <= theta_s <= theta");
  double num = 0, den = 0;
  for (const auto& c : in.recurrent) {
    double w = mode == HitRateMode::ObjectHitRate ? 1.0 : c.size;
    double p = oracle_cdf(in, c.rate, theta);
    double ps = oracle_cdf(in, c.rate, theta_s);
    num += w * c.rate * (p * p + (1.0 - p) * ps);
    den += w * c.rate;
  }
  double w_rare = mode == HitRateMode::ObjectHitRate ? 1.0 : in.rare_size;
  den += w_rare * in.rare_rate;
  return den == 0 ? 0 : num / den;
}

double oracle_normalized_size(const OracleTypeInput& in, double theta,
                              double theta_s) {
  in.validate();
  if (theta_s < 0 || theta_s > theta)
    throw ConfigError("oracle needs 0 <= theta_s <= theta");
  double num = 0, den = 0;
  for (const auto& c : in.recurrent) {
    double p = oracle_cdf(in, c.rate, theta);
    double s_deep = oracle_mean_truncated(in, c.rate, theta);
    double s_shallow = oracle_mean_truncated(in, c.rate, theta_s);
    num += c.size * c.rate * (p * s_deep + (1.0 - p) * s_shallow);
    den += c.size * c.rate;
  }
  num += in.rare_size * in.rare_rate * theta_s;
  den += in.rare_size * in.rare_rate;
  return den == 0 ? 0 : num / den;
}

OracleTypeInput oracle_input_from_spec(const PopularitySpec& spec, int type_id) {
  spec.validate();
  OracleTypeInput in;
  for (const auto& t : spec.types) {
    if (t.type_id != type_id) continue;
    for (const auto& o : t.objects)
      in.recurrent.push_back(
          {spec.total_rate * o.probability, static_cast<double>(o.size_bytes)});
    in.rare_rate = spec.total_rate * t.rare_fraction;
    in.rare_size = static_cast<double>(t.rare_size_bytes);
    return in;
  }
  throw ConfigError("type " + std::to_string(type_id) + " not in spec");
}

double solve_full_filter_ttl(const OracleTypeInput& in, double target,
                             HitRateMode mode, double ttl_bound) {
  if (target < 0) throw ConfigError("target hit rate must be >= 0");
  if (target == 0) return 0;
  double sup = oracle_hit_rate(in, ttl_bound, 0, mode);
  if (target > sup)
    throw InfeasibleError("target " + std::to_string(target) +
                          " above the full-filtering supremum " +
                          std::to_string(sup) + " at the TTL bound");
  double lo = 0, hi = ttl_bound;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    if (oracle_hit_rate(in, mid, 0, mode) < target)
      lo = mid;
    else
      hi = mid;
  }
  double theta = 0.5 * (lo + hi);
  // Residual check; the objective is strictly increasing so bisection meets it.
  if (std::abs(oracle_hit_rate(in, theta, 0, mode) - target) > 1e-6)
    throw InfeasibleError("full-filter inversion did not converge");
  return theta;
}

DominanceReport check_filtering_dominance(const OracleTypeInput& in, double theta,
                                          double theta_s, HitRateMode mode,
                                          double ttl_bound) {
  if (theta_s <= 0) throw ConfigError("the compared pair must have theta_s > 0");
  DominanceReport rep;
  rep.hit_rate = oracle_hit_rate(in, theta, theta_s, mode);
  rep.size_pair = oracle_normalized_size(in, theta, theta_s);
  try {
    rep.theta_full = solve_full_filter_ttl(in, rep.hit_rate, mode, ttl_bound);
  } catch (const InfeasibleError&) {
    return rep;  // not applicable: the pair's hit rate needs theta_s > 0
  }
  rep.applicable = true;
  rep.size_full = oracle_normalized_size(in, rep.theta_full, 0);
  rep.dominated = rep.size_full <= rep.size_pair + kResidual;
  rep.strict = rep.size_full < rep.size_pair - kResidual;
  return rep;
}

MonotonicityReport check_monotonicity(const OracleTypeInput& in, double theta_max,
                                      int n, HitRateMode mode) {
  MonotonicityReport rep;
  rep.worst_theta_slope = std::numeric_limits<double>::infinity();
  rep.worst_theta_s_slope = std::numeric_limits<double>::infinity();
  double h = theta_max / (n - 1);
  double fd = 0.5 * h;  // central difference half-step
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double theta = i * h, theta_s = j * h;
      double here = oracle_hit_rate(in, theta, theta_s, mode);
      // d/d theta, keeping theta >= theta_s
      double lo = std::max(theta - fd, theta_s);
      double hi = theta + fd;
      double slope =
          (oracle_hit_rate(in, hi, theta_s, mode) -
           oracle_hit_rate(in, lo, theta_s, mode)) / (hi - lo);
      if (here < 1.0 - 1e-12) {
        rep.worst_theta_slope = std::min(rep.worst_theta_slope, slope);
        if (slope <= 0) rep.ok = false;
      }
      // d/d theta_s, keeping theta_s <= theta
      double slo = std::max(theta_s - fd, 0.0);
      double shi = std::min(theta_s + fd, theta);
      if (shi > slo) {
        double slope_s =
            (oracle_hit_rate(in, theta, shi, mode) -
             oracle_hit_rate(in, theta, slo, mode)) / (shi - slo);
        rep.worst_theta_s_slope = std::min(rep.worst_theta_s_slope, slope_s);
        if (slope_s < -1e-12) rep.ok = false;
      }
    }
  }
  return rep;
}

TuneResult tune_ttl_bound(const ZipfTuneInput& in) {
  if (in.exponent <= 1)
    throw ConfigError("tuning requires a Zipf exponent > 1 (tail sum diverges)");
  if (in.object_count == 0) throw ConfigError("object_count must be >= 1");
  if (in.recurrent_mass <= 0 || in.recurrent_mass > 1)
    throw ConfigError("recurrent mass must be in (0, 1]");
  if (in.target_hit_rate <= 0 || in.target_hit_rate >= 1)
    throw ConfigError("target hit rate must be in (0, 1)");
  if (in.n <= 1) throw ConfigError("scale n must be > 1");

  TuneResult out;
  out.r_star = 1.0 - in.target_hit_rate /
                         (1.0 + in.rare_fraction / in.recurrent_mass);
  out.delta_r = out.r_star / std::log(in.n);
  if (0.99 * out.r_star <= out.delta_r)
    throw InfeasibleError("0.99 r* <= delta r at this scale; increase n");

  double z = 0;
  for (std::size_t k = 1; k <= in.object_count; ++k)
    z += std::pow(static_cast<double>(k), -in.exponent);
  out.c_star = std::pow(out.delta_r * z * (in.exponent - 1.0),
                        -1.0 / (in.exponent - 1.0));
  double lambda = in.n * in.lambda0;
  out.lambda_c_star = lambda * in.recurrent_mass / z *
                      std::pow(out.c_star, -in.exponent);
  out.ttl_bound = std::log(1.0 / (0.99 * out.r_star - out.delta_r)) /
                  out.lambda_c_star;

  // Re-evaluate on the expanded spec: h(L, L) should clear the target.
  OracleTypeInput oracle;
  for (std::size_t k = 1; k <= in.object_count; ++k) {
    double prob = in.recurrent_mass *
                  std::pow(static_cast<double>(k), -in.exponent) / z;
    oracle.recurrent.push_back({lambda * prob, 1.0});
  }
  oracle.rare_rate = lambda * in.rare_fraction;
  out.hit_rate_at_bound = oracle_hit_rate(oracle, out.ttl_bound, out.ttl_bound,
                                          HitRateMode::ObjectHitRate);
  return out;
}

}  // namespace ttlsim
