#pragma once

#include <queue>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttlsim/request.hpp"
#include "ttlsim/rng.hpp"

namespace ttlsim {

struct RecurrentObject {
  std::string id;
  double probability = 0.0;  // stationary request probability pi_c
  std::uint64_t size_bytes = 1;
};

struct ZipfParams {
  std::size_t object_count = 0;   // K_t
  double exponent = 1.0;          // beta_t
  double recurrent_mass = 1.0;    // q_t, total probability of the type's recurrent set
  std::uint64_t object_size_bytes = 1;
};

// pi(c_k) = q * k^-beta / sum_{j<=K} j^-beta
std::vector<RecurrentObject> expand_zipf(int type_id, const ZipfParams& z);

struct TypeSpec {
  int type_id = 1;
  std::vector<RecurrentObject> objects;
  double rare_fraction = 0.0;        // alpha_t
  std::uint64_t rare_size_bytes = 1; // shared size of the type's rare objects
};

// Stationary content universe for independent labeling over exponential
// inter-arrivals. Probabilities over recurrent objects plus per-type rare
// fractions must sum to 1.
struct PopularitySpec {
  double total_rate = 1.0;  // requests/second
  std::vector<TypeSpec> types;

  void validate() const;  // throws ConfigError
  std::uint64_t max_size_bytes() const;
};

struct InterArrival {
  enum class Family { Exponential, Weibull, HyperExp2 };
  Family family = Family::Exponential;
  double rate = 1.0;        // 1/mean, all families normalized to this mean
  double weibull_shape = 1.0;
  double hyper_p = 0.5;     // probability of the first phase
  double hyper_mean_ratio = 1.0;  // mean(phase1)/mean(phase2)

  void validate() const;
  double sample(Rng& rng) const;
  double mean() const { return 1.0 / rate; }
};

// Markov-modulated labeling: states 1..K emit the corresponding recurrent
// object, states K+1..K+T emit a rare object of the corresponding type.
struct MarkovState {
  std::string id;  // recurrent object id (empty for rare states)
  int type_id = 1;
  std::uint64_t size_bytes = 1;
};

struct MarkovLabelSpec {
  std::vector<MarkovState> recurrent_states;            // states 1..K
  std::vector<int> rare_state_types;                    // states K+1..K+T
  std::map<int, std::uint64_t> rare_size_bytes;         // per type
  std::vector<std::vector<double>> transition;          // (K+T)x(K+T)
  InterArrival inter_arrival;

  std::size_t state_count() const {
    return recurrent_states.size() + rare_state_types.size();
  }
  void validate() const;  // rows sum to 1, diagonal > 0, irreducible
};

struct RareMode {
  enum class Kind { OneHitWonders, FlashCrowds };
  Kind kind = Kind::OneHitWonders;
  // Flash crowds: each admitted burst reuses one fresh id for burst_size
  // arrivals; intra-burst gaps are U(0, rarity_window/(2*burst_size)).
  // Burst starts are admitted while the cumulative count of bursty arrivals
  // stays within budget_coefficient * l^budget_exponent.
  int burst_size = 5;
  double budget_coefficient = 1.0;
  double budget_exponent = 0.5;
  double rarity_window = 60.0;  // seconds

  void validate() const;
};

// Issues rare object ids and schedules flash-crowd bursts. Bursts may
// overlap; followers merge into the stream by arrival time.
class RareIssuer {
 public:
  explicit RareIssuer(RareMode mode) : mode_(mode) {}

  // Called when the labeling process picks a rare object of `type_id` for the
  // arrival at `now` with stream index `index` (1-based). Returns the id for
  // this arrival; burst followers, if any, are queued internally.
  std::string label(int type_id, double now, std::uint64_t index, Rng& rng);

  // Earliest pending burst arrival, if any.
  const Request* pending() const {
    return pending_.empty() ? nullptr : &pending_.top().request;
  }
  Request pop_pending();

  std::uint64_t bursty_issued() const { return bursty_issued_; }
  void set_rare_size(int type_id, std::uint64_t bytes) { rare_sizes_[type_id] = bytes; }

 private:
  std::string fresh_id(int type_id);

  struct Scheduled {
    Request request;
    std::uint64_t seq;
    bool operator>(const Scheduled& o) const {
      if (request.arrival_time != o.request.arrival_time)
        return request.arrival_time > o.request.arrival_time;
      return seq > o.seq;
    }
  };

  RareMode mode_;
  std::map<int, std::uint64_t> counters_;
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<Scheduled>>
      pending_;
  std::uint64_t schedule_seq_ = 0;
  std::uint64_t bursty_issued_ = 0;  // budget counter
  std::map<int, std::uint64_t> rare_sizes_;
};

// Poisson arrivals with independent labeling.
class PoissonGenerator : public RequestSource {
 public:
  PoissonGenerator(PopularitySpec spec, RareMode rare, std::uint64_t seed,
                   std::uint64_t count);
  bool next(Request& out) override;

 private:
  void draw_base();

  PopularitySpec spec_;
  Rng rng_;
  std::uint64_t remaining_;
  std::uint64_t index_ = 0;
  double clock_ = 0.0;
  std::unique_ptr<DiscreteSampler> label_sampler_;
  struct Label {
    bool rare;
    int type_id;
    std::string id;            // recurrent only
    std::uint64_t size_bytes;  // recurrent only
  };
  std::vector<Label> labels_;
  RareIssuer issuer_;
  std::optional<Request> base_;  // next base-process arrival, label pending rare resolution
  std::size_t base_label_ = 0;
};

// Markov renewal arrivals: labels evolve by the transition matrix, inter
// arrivals are i.i.d. from the configured family.
class MarkovGenerator : public RequestSource {
 public:
  MarkovGenerator(MarkovLabelSpec spec, RareMode rare, std::uint64_t seed,
                  std::uint64_t count);
  bool next(Request& out) override;

 private:
  void draw_base();

  MarkovLabelSpec spec_;
  Rng rng_;
  std::uint64_t remaining_;
  std::uint64_t index_ = 0;
  double clock_ = 0.0;
  std::size_t state_ = 0;
  std::vector<DiscreteSampler> row_samplers_;
  RareIssuer issuer_;
  std::optional<Request> base_;
  std::size_t base_state_ = 0;
};

// Caps another source at a fixed number of requests.
class LimitSource : public RequestSource {
 public:
  LimitSource(std::unique_ptr<RequestSource> inner, std::uint64_t limit)
      : inner_(std::move(inner)), remaining_(limit) {}
  bool next(Request& out) override {
    if (remaining_ == 0 || !inner_->next(out)) return false;
    --remaining_;
    return true;
  }

 private:
  std::unique_ptr<RequestSource> inner_;
  std::uint64_t remaining_;
};

// Replays a materialized stream.
class VectorSource : public RequestSource {
 public:
  explicit VectorSource(std::vector<Request> requests)
      : requests_(std::move(requests)) {}
  bool next(Request& out) override {
    if (pos_ >= requests_.size()) return false;
    out = requests_[pos_++];
    return true;
  }

 private:
  std::vector<Request> requests_;
  std::size_t pos_ = 0;
};

std::vector<Request> drain(RequestSource& source, std::size_t limit = SIZE_MAX);

// Bursty-arrival audit per the R-rarity condition: a request is bursty when
// it is rare-of-type-t and the previous request of the same object arrived
// strictly less than R seconds earlier. Windows are consecutive: the window
// starting at index m spans ceil(m^window_exponent) requests.
struct RarityWindow {
  std::uint64_t start_index = 0;  // 1-based request index
  std::uint64_t length = 0;
  std::uint64_t bursty = 0;       // per-type count within the window
  double fraction = 0.0;          // bursty / length
};

struct RarityAudit {
  std::map<int, std::vector<RarityWindow>> per_type;
  std::map<int, std::uint64_t> cumulative_bursty;  // over the whole stream
  std::uint64_t total_requests = 0;
};

RarityAudit audit_rarity(RequestSource& source, double r_seconds,
                         double window_exponent);

}  // namespace ttlsim
