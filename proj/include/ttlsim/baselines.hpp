#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttlsim/adaptive.hpp"
#include "ttlsim/request.hpp"

namespace ttlsim {

// Empirical per-object arrival rates over an estimation horizon.
struct RateEstimate {
  struct PerObject {
    std::string id;
    double rate = 0;       // requests/second
    double mean_size = 0;  // bytes
    std::uint64_t count = 0;
  };
  std::vector<PerObject> objects;  // first-seen order
  double horizon = 0;
  double total_rate = 0;
  double total_byte_rate = 0;
};

// lambda_c = count_c / horizon; an object seen once gets 1/horizon.
RateEstimate estimate_rates_from_trace(const std::vector<Request>& stream,
                                       double horizon);
RateEstimate estimate_rates_from_source(RequestSource& source, double horizon,
                                        std::size_t limit = SIZE_MAX);

enum class CheSizeMode { ObjectCount, Bytes };

// Characteristic time: solves sum_c w_c (1 - e^{-lambda_c T}) = capacity by
// bisection (w_c = 1 in object-count mode). The left side is strictly
// increasing in T.
double che_characteristic_time(const RateEstimate& rates, double capacity,
                               CheSizeMode mode = CheSizeMode::ObjectCount);

struct CheSolution {
  double ttl = 0;                  // characteristic time, seconds
  double expected_size_bytes = 0;  // sum_c w_c (1 - e^{-lambda_c T})
  double expected_size_objects = 0;
  double predicted_hit_rate = 0;
};

// Inverts h(T) = sum_c w^_c lambda_c (1-e^{-lambda_c T}) / sum_c w^_c lambda_c
// for the target (w^_c = 1 for OHR, mean size for BHR).
CheSolution che_ttl_for_target_hitrate(const RateEstimate& rates, double target,
                                       HitRateMode mode);

// Predicted hit rate at a given TTL under the same model.
double che_hit_rate_at(const RateEstimate& rates, double ttl, HitRateMode mode);
double che_expected_size_at(const RateEstimate& rates, double ttl, CheSizeMode mode);

}  // namespace ttlsim
