// Copyright 2026 The ionphoton Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ionphoton {

/// Numbers in every CSV and report: 12 significant digits, "nan"/"inf" spelled out.
inline std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Flat "key: value" report (valid YAML), one entry per line in insertion order.
class Report {
 public:
  Report& add(const std::string& key, double v) { return raw(key, fmt12(v)); }
  Report& add(const std::string& key, std::optional<double> v) { return raw(key, v ? fmt12(*v) : "null"); }
  Report& add(const std::string& key, std::uint64_t v) { return raw(key, std::to_string(v)); }
  Report& add(const std::string& key, int v) { return raw(key, std::to_string(v)); }
  Report& add(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
  Report& add(const std::string& key, const char* v) { return add(key, std::string(v)); }
  Report& add(const std::string& key, const std::string& v) {
    std::string q = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') q += '\\';
      q += c == '\n' ? ' ' : c;
    }
    return raw(key, q + "\"");
  }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << ": " << v << '\n';
  }

 private:
  Report& raw(const std::string& key, std::string value) {
    entries_.emplace_back(key, std::move(value));
    return *this;
  }
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace ionphoton
