#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "ttlsim/request.hpp"

namespace ttlsim {

// Headered CSV: arrival_time_s,object_id,type_id,size_bytes
inline constexpr const char* kTraceHeader = "arrival_time_s,object_id,type_id,size_bytes";

void write_trace(RequestSource& source, std::ostream& out);
void write_trace_file(RequestSource& source, const std::string& path);

// Streaming reader; throws ParseError (with line number) on malformed lines
// and ValidationError on decreasing timestamps.
class TraceReader : public RequestSource {
 public:
  explicit TraceReader(const std::string& path);
  ~TraceReader() override;
  bool next(Request& out) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace ttlsim
