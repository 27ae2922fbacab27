#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mklab {

// Locale-free rendering with 17 significant digits (round-trip safe).
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Minimal CSV emitter: fixed column set, '.' decimal point, no quoting (none
// of the emitted fields contain commas).
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path), n_cols_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  CsvWriter& field(double v) { return raw(format_real(v)); }
  CsvWriter& field(int v) { return raw(std::to_string(v)); }
  CsvWriter& field(long long v) { return raw(std::to_string(v)); }
  CsvWriter& field(const std::string& v) { return raw(v); }

  void end_row() {
    if (col_ != n_cols_) throw std::logic_error("csv row has wrong arity");
    out_ << '\n';
    col_ = 0;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    if (col_) out_ << ',';
    out_ << s;
    ++col_;
    return *this;
  }

  std::ofstream out_;
  std::size_t n_cols_;
  std::size_t col_ = 0;
};

}  // namespace mklab
