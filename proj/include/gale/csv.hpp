#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gale/common.hpp"

namespace gale::csv {

/// Shortest round-trip decimal form of a double (bit-stable across runs).
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline void split(const std::string& line, char delim, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Minimal header-driven delimited reader. No quoting rules: fields are taken
/// verbatim between delimiters, which matches the raw station exports and
/// every file this project writes.
class Reader {
 public:
  explicit Reader(const std::string& path, char delim = ',') : in_(path), delim_(delim), path_(path) {
    if (!in_) throw data_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in_, line)) throw data_error("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    split(line, delim_, header_);
    line_no_ = 1;
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::string& path() const { return path_; }
  std::size_t line_number() const { return line_no_; }

  /// Index of a named column, or -1 if absent.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return static_cast<int>(i);
    return -1;
  }

  int require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw data_error(path_ + ": missing required column '" + name + "'");
    return c;
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      split(line, delim_, fields);
      return true;
    }
    return false;
  }

 private:
  std::ifstream in_;
  char delim_;
  std::string path_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

/// Parse a double; returns false for empty or non-numeric fields.
inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc()) return false;
  while (ptr < e && (*ptr == ' ' || *ptr == '\t')) ++ptr;
  return ptr == e;
}

inline bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace gale::csv
