#pragma once

#include <cstdint>
#include <vector>

#include "ttlsim/adaptive.hpp"
#include "ttlsim/workload.hpp"

namespace ttlsim {

// Closed-form renewal model for one content type under fixed TTL pairs.
// p_c is the per-object inter-arrival c.d.f.: exponential in Poisson mode
// (closed forms throughout), otherwise evaluated by the family's c.d.f. with
// adaptive-Simpson quadrature for the partial expectation.
struct OracleClass {
  double rate = 0;     // lambda_c, requests/second
  double size = 1;     // w_c, bytes
};

struct OracleTypeInput {
  std::vector<OracleClass> recurrent;
  double rare_rate = 0;   // alpha_t * lambda, requests/second
  double rare_size = 1;   // bytes
  InterArrival::Family family = InterArrival::Family::Exponential;
  // Non-exponential families interpret each class rate as 1/mean of that
  // object's inter-arrival time with the family's shape parameters.
  double weibull_shape = 1.0;
  double hyper_p = 0.5;
  double hyper_mean_ratio = 1.0;

  void validate() const;
};

// Per-object hit probability within x seconds.
double oracle_cdf(const OracleTypeInput& in, double rate, double x);
// Expected residency E[min(X_c, theta)].
double oracle_mean_truncated(const OracleTypeInput& in, double rate, double theta);

// h_t(theta, theta_s): per-request hit probability for the type.
double oracle_hit_rate(const OracleTypeInput& in, double theta, double theta_s,
                       HitRateMode mode);
// s_t(theta, theta_s): normalized size in seconds.
double oracle_normalized_size(const OracleTypeInput& in, double theta,
                              double theta_s);

// Builds the per-type oracle input from a Poisson/independent-labeling spec.
OracleTypeInput oracle_input_from_spec(const PopularitySpec& spec, int type_id);

// Unique theta with h(theta, 0) = target (full filtering); bisection with
// residual <= 1e-10. Throws InfeasibleError naming the supremum when the
// target is unattainable within ttl_bound.
double solve_full_filter_ttl(const OracleTypeInput& in, double target,
                             HitRateMode mode, double ttl_bound);

struct DominanceReport {
  bool applicable = false;  // the pair's hit rate is reachable under full filtering
  bool dominated = false;   // s_full <= s_pair (strict when alpha > 0)
  bool strict = false;
  double hit_rate = 0;
  double size_pair = 0;
  double size_full = 0;
  double theta_full = 0;
};

// Compares the normalized size of a (theta, theta_s>0) pair against the full
// filtering pair achieving the same hit rate.
DominanceReport check_filtering_dominance(const OracleTypeInput& in, double theta,
                                          double theta_s, HitRateMode mode,
                                          double ttl_bound);

struct MonotonicityReport {
  bool ok = true;
  double worst_theta_slope = 0;    // most negative d h / d theta (h < 1 region)
  double worst_theta_s_slope = 0;  // most negative d h / d theta_s
};

// Central finite differences of the hit-rate oracle over an n x n grid on
// [0, theta_max]^2 restricted to theta >= theta_s.
MonotonicityReport check_monotonicity(const OracleTypeInput& in, double theta_max,
                                      int n, HitRateMode mode);

struct ZipfTuneInput {
  std::size_t object_count = 0;  // K_t
  double exponent = 1.5;         // beta_t > 1
  double recurrent_mass = 1.0;   // q_t
  double rare_fraction = 0.0;    // alpha_t
  double n = 1;                  // scale: lambda = n * lambda0
  double lambda0 = 1;
  double target_hit_rate = 0.5;
};

struct TuneResult {
  double ttl_bound = 0;  // L_t
  double r_star = 0;
  double delta_r = 0;
  double c_star = 0;         // real-valued tail index
  double lambda_c_star = 0;  // rate of the c*-th object
  double hit_rate_at_bound = 0;  // oracle h(L, L) on the expanded spec
};

// TTL bound guaranteeing the target under Zipf popularity with beta > 1:
// L = (1/lambda_{c*}) ln(1/(0.99 r* - dr)), r* = 1 - h*/(1 + alpha/q),
// dr = r*/ln(n), c* = (dr Z (beta-1))^{-1/(beta-1)}.
TuneResult tune_ttl_bound(const ZipfTuneInput& in);

}  // namespace ttlsim
