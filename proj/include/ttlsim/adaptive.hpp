#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ttlsim/request.hpp"
#include "ttlsim/ttl_core.hpp"

namespace ttlsim {

struct StepSchedule {
  enum class Kind { Decaying, Constant };
  Kind kind = Kind::Decaying;
  double eta0 = 1.0;
  double alpha = 1.0;   // Decaying: eta0 / l^alpha, alpha in (0.5, 1]
  double value = 0.0;   // Constant

  static StepSchedule decaying(double eta0, double alpha) {
    StepSchedule s;
    s.kind = Kind::Decaying;
    s.eta0 = eta0;
    s.alpha = alpha;
    return s;
  }
  static StepSchedule constant(double v) {
    StepSchedule s;
    s.kind = Kind::Constant;
    s.value = v;
    return s;
  }

  void validate(bool size_schedule) const;
  double at(std::uint64_t l) const {
    return kind == Kind::Constant ? value
                                  : eta0 / std::pow(static_cast<double>(l), alpha);
  }
};

enum class HitRateMode { ObjectHitRate, ByteHitRate };

// Threshold function coupling the two latent variables: equals y for
// x <= 1-3eps/2, equals 1 for x >= 1-eps/2, quartic interpolation in between
// (0/0 read as 1); non-decreasing in both arguments, x-slope bounded by 4/eps.
double gamma_threshold(double x, double y, double epsilon);

struct TypeTargets {
  double hit_rate = 0.5;         // h*_t in (0,1)
  double normalized_size = 0.0;  // s*_t seconds, filtering controller only
  double ttl_bound = 1.0;        // L_t > 0
};

struct ControllerConfig {
  std::map<int, TypeTargets> targets;  // keyed by type_id
  double epsilon = 0.1;                // in (0, 2/3)
  HitRateMode mode = HitRateMode::ObjectHitRate;
  StepSchedule eta = StepSchedule::decaying(1.0, 0.6);
  StepSchedule eta_s = StepSchedule::decaying(0.01, 1.0);
  // Constant size-step scaled by 1/(s* * w_avg); w_avg is the running mean of
  // observed request sizes, refreshed at metrics-window boundaries.
  bool scale_size_step = false;
  // Optional byte-mode weight normalization by w_max to keep effective steps
  // comparable across modes. Off by default.
  bool normalize_byte_weight = false;
  std::uint64_t max_size_bytes = 1;  // divisor when normalize_byte_weight
  double initial_vartheta = 0.0;
  double initial_vartheta_s = 0.0;

  void validate(bool filtering) const;
  const TypeTargets& targets_for(int type_id) const;
};

// Per-arrival outcome surfaced to metrics and logs.
struct RequestOutcome {
  EventKind event = EventKind::Miss;
  bool hit = false;            // Y(l)
  double s_estimate = 0;       // s(l); NaN when the policy has no estimator
  double granted_ttl = 0;      // residency TTL granted to this arrival; NaN if n/a
  double theta = 0;            // post-update, requested type
  double theta_s = 0;
  double vartheta = 0;
  double vartheta_s = 0;
};

// Latent variables and derived TTLs for the adaptive controllers.
class ControllerState {
 public:
  ControllerState(const ControllerConfig& cfg, bool filtering);

  double vartheta(int type_id) const { return per_type_.at(type_id).vartheta; }
  double vartheta_s(int type_id) const { return per_type_.at(type_id).vartheta_s; }
  double theta(int type_id) const;
  double theta_s(int type_id) const;
  std::uint64_t arrivals() const { return arrivals_; }

  // Latent update for the hit-rate variable at arrival l (1-based):
  // vartheta += eta(l) * w_hat * (h* - Y), clamped to [0,1].
  void update_hit_latent(int type_id, std::uint64_t l, double weight, bool hit);
  // Latent update for the size variable: vartheta_s += eta_s(l)*w*(s* - s).
  void update_size_latent(int type_id, std::uint64_t l, double size_weight,
                          double s_estimate);
  void observe_size(double size_bytes);      // feeds the w_avg running mean
  void refresh_size_scale();                 // window boundary hook
  std::uint64_t bump_arrivals() { return ++arrivals_; }

  double hit_weight(const Request& r) const;

 private:
  struct PerType {
    double vartheta = 0;
    double vartheta_s = 0;
  };
  const ControllerConfig& cfg_;
  bool filtering_;
  std::map<int, PerType> per_type_;
  std::uint64_t arrivals_ = 0;
  double size_sum_ = 0;
  std::uint64_t size_count_ = 0;
  double effective_w_avg_ = 1.0;
};

// s(l): online estimate of the arrival's contribution to the normalized size,
// from pre-update TTL values.
double estimate_s(const Classification& c, double theta_pre, double theta_s_pre);

}  // namespace ttlsim
