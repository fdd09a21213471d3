#pragma once

#include <cstdint>
#include <string>

namespace ttlsim {

// One arrival event. object_id is opaque; ids issued for rare objects by the
// built-in generators carry a "rare:<type>:<counter>" prefix.
struct Request {
  double arrival_time = 0.0;  // seconds, non-decreasing within a stream
  std::string object_id;
  int type_id = 1;
  std::uint64_t size_bytes = 1;
};

// Pull-based stream of requests; returns false when exhausted.
class RequestSource {
 public:
  virtual ~RequestSource() = default;
  virtual bool next(Request& out) = 0;
};

inline bool is_rare_id(const std::string& id) {
  return id.rfind("rare:", 0) == 0;
}

}  // namespace ttlsim
