#include "ttlsim/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "ttlsim/errors.hpp"

namespace ttlsim {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace(RequestSource& source, std::ostream& out) {
  out << kTraceHeader << '\n';
  Request r;
  while (source.next(r)) {
    if (r.object_id.find(',') != std::string::npos ||
        r.object_id.find('\n') != std::string::npos)
      throw ValidationError("object id contains a delimiter: " + r.object_id);
    out << format_double(r.arrival_time) << ',' << r.object_id << ','
        << r.type_id << ',' << r.size_bytes << '\n';
  }
}

void write_trace_file(RequestSource& source, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_trace(source, f);
}

struct TraceReader::Impl {
  std::ifstream file;
  std::size_t line_number = 0;
  double last_time = 0;
  bool first = true;
};

TraceReader::TraceReader(const std::string& path) : impl_(new Impl) {
  impl_->file.open(path);
  if (!impl_->file) throw ConfigError("cannot open trace: " + path);
  // Leading '#' comment lines (e.g. a config-hash stamp) are skipped.
  std::string header;
  for (;;) {
    if (!std::getline(impl_->file, header))
      throw ParseError("missing header", impl_->line_number + 1);
    ++impl_->line_number;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header.rfind('#', 0) != 0) break;
  }
  if (header != kTraceHeader)
    throw ParseError("unexpected header '" + header + "'", impl_->line_number);
}

TraceReader::~TraceReader() = default;

bool TraceReader::next(Request& out) {
  std::string line;
  for (;;) {
    if (!std::getline(impl_->file, line)) return false;
    ++impl_->line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  const std::size_t ln = impl_->line_number;
  std::size_t p1 = line.find(',');
  std::size_t p3 = line.rfind(',');
  if (p1 == std::string::npos || p3 == p1)
    throw ParseError("expected 4 comma-separated fields", ln);
  std::size_t p2 = line.rfind(',', p3 - 1);
  if (p2 == std::string::npos || p2 <= p1)
    throw ParseError("expected 4 comma-separated fields", ln);

  auto time_sv = std::string_view(line).substr(0, p1);
  auto id = line.substr(p1 + 1, p2 - p1 - 1);
  auto type_sv = std::string_view(line).substr(p2 + 1, p3 - p2 - 1);
  auto size_sv = std::string_view(line).substr(p3 + 1);

  double t;
  auto [tp, terr] = std::from_chars(time_sv.data(), time_sv.data() + time_sv.size(), t);
  if (terr != std::errc{} || tp != time_sv.data() + time_sv.size())
    throw ParseError("bad arrival_time_s '" + std::string(time_sv) + "'", ln);
  int type_id;
  auto [yp, yerr] = std::from_chars(type_sv.data(), type_sv.data() + type_sv.size(), type_id);
  if (yerr != std::errc{} || yp != type_sv.data() + type_sv.size())
    throw ParseError("bad type_id '" + std::string(type_sv) + "'", ln);
  std::uint64_t size;
  auto [sp, serr] = std::from_chars(size_sv.data(), size_sv.data() + size_sv.size(), size);
  if (serr != std::errc{} || sp != size_sv.data() + size_sv.size())
    throw ParseError("bad size_bytes '" + std::string(size_sv) + "'", ln);
  if (id.empty()) throw ParseError("empty object_id", ln);
  if (size == 0) throw ParseError("size_bytes must be positive", ln);
  if (t < 0) throw ParseError("negative arrival time", ln);
  if (!impl_->first && t < impl_->last_time)
    throw ValidationError("decreasing timestamp at line " + std::to_string(ln));
  impl_->first = false;
  impl_->last_time = t;

  out.arrival_time = t;
  out.object_id = std::move(id);
  out.type_id = type_id;
  out.size_bytes = size;
  return true;
}

}  // namespace ttlsim
