#include "ttlsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "ttlsim/errors.hpp"

namespace ttlsim {

namespace {
constexpr double kProbabilityTolerance = 1e-9;
}

std::vector<RecurrentObject> expand_zipf(int type_id, const ZipfParams& z) {
  if (z.object_count == 0) throw ConfigError("zipf: object_count must be >= 1");
  if (z.exponent < 0) throw ConfigError("zipf: exponent must be >= 0");
  if (z.recurrent_mass <= 0 || z.recurrent_mass > 1)
    throw ConfigError("zipf: recurrent mass must be in (0, 1]");
  double norm = 0;
  for (std::size_t k = 1; k <= z.object_count; ++k)
    norm += std::pow(static_cast<double>(k), -z.exponent);
  std::vector<RecurrentObject> out;
  out.reserve(z.object_count);
  for (std::size_t k = 1; k <= z.object_count; ++k) {
    RecurrentObject o;
    o.id = "o:" + std::to_string(type_id) + ":" + std::to_string(k);
    o.probability =
        z.recurrent_mass * std::pow(static_cast<double>(k), -z.exponent) / norm;
    o.size_bytes = z.object_size_bytes;
    out.push_back(std::move(o));
  }
  return out;
}

void PopularitySpec::validate() const {
  if (total_rate <= 0) throw ConfigError("total_rate must be positive");
  if (types.empty()) throw ConfigError("at least one type is required");
  double mass = 0;
  for (const auto& t : types) {
    if (t.rare_fraction < 0 || t.rare_fraction >= 1)
      throw ConfigError("rare_fraction must be in [0, 1)");
    if (t.rare_fraction > 0 && t.rare_size_bytes == 0)
      throw ConfigError("rare_size_bytes must be positive");
    mass += t.rare_fraction;
    for (const auto& o : t.objects) {
      if (o.probability < 0) throw ConfigError("object probability must be >= 0");
      if (o.size_bytes == 0) throw ConfigError("object size must be positive");
      if (o.id.empty()) throw ConfigError("object id must be non-empty");
      mass += o.probability;
    }
    if (t.objects.empty() && t.rare_fraction == 0)
      throw ConfigError("type " + std::to_string(t.type_id) + " has no traffic");
  }
  if (std::abs(mass - 1.0) > kProbabilityTolerance)
    throw ConfigError("label probabilities sum to " + std::to_string(mass) +
                      ", expected 1");
}

std::uint64_t PopularitySpec::max_size_bytes() const {
  std::uint64_t m = 0;
  for (const auto& t : types) {
    if (t.rare_fraction > 0) m = std::max(m, t.rare_size_bytes);
    for (const auto& o : t.objects) m = std::max(m, o.size_bytes);
  }
  return m;
}

void InterArrival::validate() const {
  if (rate <= 0) throw ConfigError("arrival rate must be positive");
  switch (family) {
    case Family::Exponential:
      break;
    case Family::Weibull:
      if (weibull_shape <= 0) throw ConfigError("weibull shape must be positive");
      break;
    case Family::HyperExp2:
      if (hyper_p <= 0 || hyper_p >= 1)
        throw ConfigError("hyperexp phase probability must be in (0, 1)");
      if (hyper_mean_ratio <= 0)
        throw ConfigError("hyperexp mean ratio must be positive");
      break;
  }
}

double InterArrival::sample(Rng& rng) const {
  switch (family) {
    case Family::Exponential:
      return rng.exponential(rate);
    case Family::Weibull: {
      // scale chosen so E[X] = scale * Gamma(1 + 1/k) = 1/rate
      double scale = 1.0 / (rate * std::tgamma(1.0 + 1.0 / weibull_shape));
      return scale * std::pow(-std::log1p(-rng.uniform()), 1.0 / weibull_shape);
    }
    case Family::HyperExp2: {
      // phase means solve p*m1 + (1-p)*m2 = 1/rate with m1 = ratio*m2
      double m2 = 1.0 / (rate * (hyper_p * hyper_mean_ratio + (1.0 - hyper_p)));
      double m1 = hyper_mean_ratio * m2;
      double mean = rng.uniform() < hyper_p ? m1 : m2;
      return -std::log1p(-rng.uniform()) * mean;
    }
  }
  return 0;
}

void MarkovLabelSpec::validate() const {
  inter_arrival.validate();
  const std::size_t n = state_count();
  if (n == 0) throw ConfigError("markov spec has no states");
  if (transition.size() != n)
    throw ConfigError("transition matrix must have one row per state");
  for (std::size_t i = 0; i < n; ++i) {
    if (transition[i].size() != n)
      throw ConfigError("transition matrix must be square");
    double row = 0;
    for (double p : transition[i]) {
      if (p < 0) throw ConfigError("transition probabilities must be >= 0");
      row += p;
    }
    if (std::abs(row - 1.0) > kProbabilityTolerance)
      throw ConfigError("transition row " + std::to_string(i) +
                        " sums to " + std::to_string(row));
    if (n > 1 && transition[i][i] <= 0)
      throw ConfigError("transition diagonal entries must be positive");
  }
  for (int t : rare_state_types)
    if (rare_size_bytes.find(t) == rare_size_bytes.end())
      throw ConfigError("missing rare size for type " + std::to_string(t));
  // Irreducibility: strong connectivity over positive entries.
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        double p = forward ? transition[u][v] : transition[v][u];
        if (p > 0 && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  if (!reach(true) || !reach(false))
    throw ConfigError("transition matrix is reducible");
}

void RareMode::validate() const {
  if (kind == Kind::FlashCrowds) {
    if (burst_size < 2) throw ConfigError("flash crowd burst_size must be >= 2");
    if (budget_coefficient <= 0)
      throw ConfigError("flash crowd budget_coefficient must be positive");
    if (budget_exponent <= 0 || budget_exponent > 1)
      throw ConfigError("flash crowd budget_exponent must be in (0, 1]");
    if (rarity_window <= 0)
      throw ConfigError("flash crowd rarity_window must be positive");
  }
}

std::string RareIssuer::fresh_id(int type_id) {
  std::uint64_t n = ++counters_[type_id];
  return "rare:" + std::to_string(type_id) + ":" + std::to_string(n);
}

std::string RareIssuer::label(int type_id, double now, std::uint64_t index,
                              Rng& rng) {
  if (mode_.kind == RareMode::Kind::OneHitWonders) return fresh_id(type_id);
  // A burst start is admitted while the follower count stays within the
  // sqrt-type budget; otherwise fall back to a one-hit id.
  const std::uint64_t followers = static_cast<std::uint64_t>(mode_.burst_size) - 1;
  double budget = mode_.budget_coefficient *
                  std::pow(static_cast<double>(index), mode_.budget_exponent);
  if (static_cast<double>(bursty_issued_ + followers) > budget)
    return fresh_id(type_id);
  std::string id = fresh_id(type_id);
  bursty_issued_ += followers;
  double t = now;
  double gap_hi = mode_.rarity_window / (2.0 * mode_.burst_size);
  std::uint64_t size = rare_sizes_.count(type_id) ? rare_sizes_[type_id] : 1;
  for (std::uint64_t i = 0; i < followers; ++i) {
    t += rng.uniform(0.0, gap_hi);
    Request r;
    r.arrival_time = t;
    r.object_id = id;
    r.type_id = type_id;
    r.size_bytes = size;
    pending_.push(Scheduled{std::move(r), schedule_seq_++});
  }
  return id;
}

Request RareIssuer::pop_pending() {
  Request r = pending_.top().request;
  pending_.pop();
  return r;
}

PoissonGenerator::PoissonGenerator(PopularitySpec spec, RareMode rare,
                                   std::uint64_t seed, std::uint64_t count)
    : spec_(std::move(spec)), rng_(seed), remaining_(count), issuer_(rare) {
  spec_.validate();
  rare.validate();
  if (count == 0) throw ConfigError("request count must be >= 1");
  std::vector<double> weights;
  for (const auto& t : spec_.types) {
    for (const auto& o : t.objects) {
      weights.push_back(o.probability);
      labels_.push_back({false, t.type_id, o.id, o.size_bytes});
    }
    if (t.rare_fraction > 0) {
      weights.push_back(t.rare_fraction);
      labels_.push_back({true, t.type_id, {}, t.rare_size_bytes});
      issuer_.set_rare_size(t.type_id, t.rare_size_bytes);
    }
  }
  label_sampler_ = std::make_unique<DiscreteSampler>(weights);
}

void PoissonGenerator::draw_base() {
  clock_ += rng_.exponential(spec_.total_rate);
  base_label_ = label_sampler_->sample(rng_);
  Request r;
  r.arrival_time = clock_;
  base_ = std::move(r);
}

bool PoissonGenerator::next(Request& out) {
  if (remaining_ == 0) return false;
  if (!base_) draw_base();
  const Request* burst = issuer_.pending();
  if (burst && burst->arrival_time <= base_->arrival_time) {
    out = issuer_.pop_pending();
  } else {
    const Label& lab = labels_[base_label_];
    out = *base_;
    out.type_id = lab.type_id;
    out.size_bytes = lab.size_bytes;
    out.object_id = lab.rare
                        ? issuer_.label(lab.type_id, out.arrival_time, index_ + 1, rng_)
                        : lab.id;
    base_.reset();
  }
  ++index_;
  --remaining_;
  return true;
}

MarkovGenerator::MarkovGenerator(MarkovLabelSpec spec, RareMode rare,
                                 std::uint64_t seed, std::uint64_t count)
    : spec_(std::move(spec)), rng_(seed), remaining_(count), issuer_(rare) {
  spec_.validate();
  rare.validate();
  if (count == 0) throw ConfigError("request count must be >= 1");
  for (const auto& row : spec_.transition) row_samplers_.emplace_back(row);
  for (auto& [t, s] : spec_.rare_size_bytes) issuer_.set_rare_size(t, s);
  state_ = 0;  // deterministic initial state
}

void MarkovGenerator::draw_base() {
  clock_ += spec_.inter_arrival.sample(rng_);
  state_ = row_samplers_[state_].sample(rng_);
  base_state_ = state_;
  Request r;
  r.arrival_time = clock_;
  base_ = std::move(r);
}

bool MarkovGenerator::next(Request& out) {
  if (remaining_ == 0) return false;
  if (!base_) draw_base();
  const Request* burst = issuer_.pending();
  if (burst && burst->arrival_time <= base_->arrival_time) {
    out = issuer_.pop_pending();
  } else {
    const std::size_t k = spec_.recurrent_states.size();
    out = *base_;
    if (base_state_ < k) {
      const MarkovState& s = spec_.recurrent_states[base_state_];
      out.object_id = s.id;
      out.type_id = s.type_id;
      out.size_bytes = s.size_bytes;
    } else {
      int type_id = spec_.rare_state_types[base_state_ - k];
      out.type_id = type_id;
      out.size_bytes = spec_.rare_size_bytes.at(type_id);
      out.object_id = issuer_.label(type_id, out.arrival_time, index_ + 1, rng_);
    }
    base_.reset();
  }
  ++index_;
  --remaining_;
  return true;
}

std::vector<Request> drain(RequestSource& source, std::size_t limit) {
  std::vector<Request> out;
  Request r;
  while (out.size() < limit && source.next(r)) out.push_back(r);
  return out;
}

RarityAudit audit_rarity(RequestSource& source, double r_seconds,
                         double window_exponent) {
  if (r_seconds <= 0) throw ConfigError("rarity window R must be positive");
  if (window_exponent <= 0.5 || window_exponent > 1)
    throw ConfigError("window exponent must be in (0.5, 1]");
  RarityAudit audit;
  std::unordered_map<std::string, double> last_seen;
  std::map<int, std::uint64_t> window_counts;
  std::uint64_t window_start = 1;
  std::uint64_t window_len = 1;  // ceil(1^e) = 1
  std::uint64_t in_window = 0;
  std::map<int, bool> seen_type;

  auto flush_window = [&]() {
    for (auto& [t, _] : seen_type) {
      RarityWindow w;
      w.start_index = window_start;
      w.length = window_len;
      w.bursty = window_counts.count(t) ? window_counts[t] : 0;
      w.fraction = static_cast<double>(w.bursty) / static_cast<double>(window_len);
      audit.per_type[t].push_back(w);
    }
    window_counts.clear();
    window_start += window_len;
    window_len = static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<double>(window_start), window_exponent)));
    in_window = 0;
  };

  Request r;
  std::uint64_t index = 0;
  while (source.next(r)) {
    ++index;
    seen_type[r.type_id] = true;
    bool bursty = false;
    if (is_rare_id(r.object_id)) {
      auto it = last_seen.find(r.object_id);
      bursty = it != last_seen.end() && (r.arrival_time - it->second) < r_seconds;
      last_seen[r.object_id] = r.arrival_time;
    } else {
      // recurrent objects never count toward the bursty indicator
    }
    if (bursty) {
      ++window_counts[r.type_id];
      ++audit.cumulative_bursty[r.type_id];
    }
    ++in_window;
    if (in_window == window_len) flush_window();
  }
  audit.total_requests = index;
  for (auto& [t, _] : seen_type)
    if (!audit.cumulative_bursty.count(t)) audit.cumulative_bursty[t] = 0;
  // trailing partial window is dropped; fractions are only reported for
  // complete windows
  return audit;
}

}  // namespace ttlsim
