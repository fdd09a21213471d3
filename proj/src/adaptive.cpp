#include "ttlsim/adaptive.hpp"

#include <algorithm>

#include "ttlsim/errors.hpp"

namespace ttlsim {

void StepSchedule::validate(bool) const {
  if (kind == Kind::Constant) {
    if (value < 0) throw ConfigError("constant step must be >= 0");
    return;
  }
  if (eta0 <= 0) throw ConfigError("eta0 must be positive");
  if (alpha <= 0.5 || alpha > 1.0)
    throw ConfigError("decay exponent must be in (0.5, 1]");
}

double gamma_threshold(double x, double y, double epsilon) {
  if (x >= 1.0 - epsilon / 2.0) return 1.0;
  if (x <= 1.0 - 1.5 * epsilon) return y;
  double a = x - 1.0 + 1.5 * epsilon;  // positive here
  double b = 1.0 - epsilon / 2.0 - x;  // positive here
  double a4 = a * a * a * a;
  double b4 = b * b * b * b;
  double denom = a4 + b4;
  double ratio = denom == 0 ? 1.0 : a4 / denom;
  return y + (1.0 - y) * ratio;
}

void ControllerConfig::validate(bool filtering) const {
  if (targets.empty()) throw ConfigError("controller needs at least one type target");
  for (const auto& [t, tt] : targets) {
    if (tt.hit_rate <= 0 || tt.hit_rate >= 1)
      throw ConfigError("target hit rate for type " + std::to_string(t) +
                        " must be in (0, 1)");
    if (tt.ttl_bound <= 0)
      throw ConfigError("TTL bound for type " + std::to_string(t) +
                        " must be positive");
    if (filtering && tt.normalized_size < 0)
      throw ConfigError("target normalized size must be >= 0");
  }
  if (filtering && (epsilon <= 0 || epsilon >= 2.0 / 3.0))
    throw ConfigError("epsilon must be in (0, 2/3)");
  eta.validate(false);
  if (filtering) eta_s.validate(true);
  if (initial_vartheta < 0 || initial_vartheta > 1 || initial_vartheta_s < 0 ||
      initial_vartheta_s > 1)
    throw ConfigError("initial latent variables must be in [0, 1]");
  if (normalize_byte_weight && max_size_bytes == 0)
    throw ConfigError("max_size_bytes must be positive");
}

const TypeTargets& ControllerConfig::targets_for(int type_id) const {
  auto it = targets.find(type_id);
  if (it == targets.end())
    throw ConfigError("no controller target for type " + std::to_string(type_id));
  return it->second;
}

ControllerState::ControllerState(const ControllerConfig& cfg, bool filtering)
    : cfg_(cfg), filtering_(filtering) {
  cfg.validate(filtering);
  for (const auto& [t, _] : cfg.targets) {
    per_type_[t] = {cfg.initial_vartheta, cfg.initial_vartheta_s};
  }
}

double ControllerState::theta(int type_id) const {
  return cfg_.targets_for(type_id).ttl_bound * per_type_.at(type_id).vartheta;
}

double ControllerState::theta_s(int type_id) const {
  const PerType& p = per_type_.at(type_id);
  return cfg_.targets_for(type_id).ttl_bound * p.vartheta *
         gamma_threshold(p.vartheta, p.vartheta_s, cfg_.epsilon);
}

double ControllerState::hit_weight(const Request& r) const {
  if (cfg_.mode == HitRateMode::ObjectHitRate) return 1.0;
  double w = static_cast<double>(r.size_bytes);
  if (cfg_.normalize_byte_weight) w /= static_cast<double>(cfg_.max_size_bytes);
  return w;
}

void ControllerState::update_hit_latent(int type_id, std::uint64_t l,
                                        double weight, bool hit) {
  PerType& p = per_type_[type_id];
  double h_star = cfg_.targets_for(type_id).hit_rate;
  double y = hit ? 1.0 : 0.0;
  p.vartheta = std::clamp(p.vartheta + cfg_.eta.at(l) * weight * (h_star - y),
                          0.0, 1.0);
}

void ControllerState::update_size_latent(int type_id, std::uint64_t l,
                                         double size_weight, double s_estimate) {
  PerType& p = per_type_[type_id];
  const TypeTargets& tt = cfg_.targets_for(type_id);
  double step = cfg_.eta_s.at(l);
  if (cfg_.scale_size_step && cfg_.eta_s.kind == StepSchedule::Kind::Constant &&
      tt.normalized_size > 0 && effective_w_avg_ > 0) {
    step /= tt.normalized_size * effective_w_avg_;
  }
  p.vartheta_s = std::clamp(
      p.vartheta_s + step * size_weight * (tt.normalized_size - s_estimate), 0.0,
      1.0);
}

void ControllerState::observe_size(double size_bytes) {
  size_sum_ += size_bytes;
  ++size_count_;
  if (size_count_ == 1) effective_w_avg_ = size_bytes;
}

void ControllerState::refresh_size_scale() {
  if (size_count_ > 0)
    effective_w_avg_ = size_sum_ / static_cast<double>(size_count_);
}

double estimate_s(const Classification& c, double theta_pre, double theta_s_pre) {
  switch (c.kind) {
    case EventKind::DeepHit:
    case EventKind::ShallowHit:
      return theta_pre - c.remaining;
    case EventKind::VirtualHit:
      return theta_pre;
    case EventKind::Miss:
      return theta_s_pre;
  }
  return 0;
}

}  // namespace ttlsim
