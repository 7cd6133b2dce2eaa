#pragma once

#include <string>
#include <vector>

namespace detcolor {

// Violations are data, not failures: validators collect everything they find
// and leave the decision to the caller.
struct Violation {
  std::string code;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  void add(std::string code, std::string detail) {
    violations.push_back({std::move(code), std::move(detail)});
  }

  void merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }

  std::size_t count(const std::string& code) const {
    std::size_t n = 0;
    for (const auto& v : violations)
      if (v.code == code) ++n;
    return n;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& v : violations) {
      out += v.code;
      out += ": ";
      out += v.detail;
      out += '\n';
    }
    return out;
  }
};

}  // namespace detcolor
