#pragma once
#include <cstdio>
#include <ostream>
#include <string>

namespace flatmc {

// 17 significant digits: round-trips any double exactly
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  CsvWriter& field(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }
  CsvWriter& field(double v) { return field(fmt_double(v)); }
  CsvWriter& field(long long v) { return field(std::to_string(v)); }
  CsvWriter& field(int v) { return field(std::to_string(v)); }
  CsvWriter& field(unsigned long long v) { return field(std::to_string(v)); }
  CsvWriter& field(bool v) { return field(std::string(v ? "true" : "false")); }
  void endrow() {
    os_ << '\n';
    first_ = true;
  }

 private:
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace flatmc
