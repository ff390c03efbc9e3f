#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace toposkit {

struct RunConfig {
  std::uint64_t seed = 42;
  std::map<std::string, double> tolerance_overrides;  // check name -> tolerance
  int verbosity = 0;
  std::string out_path;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  double elapsed_ms = 0.0;  // diagnostics only; never part of the emitted report
};

// Machine-readable run report. The CSV form is deterministic for a given
// seed: rows sorted by check name, timing excluded.
struct Report {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  std::string to_csv() const {
    std::vector<CheckResult> sorted = checks;
    std::sort(sorted.begin(), sorted.end(),
              [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
    std::ostringstream os;
    os.precision(17);
    os << "check,status,deviation,tolerance\n";
    for (const auto& c : sorted)
      os << c.name << "," << (c.pass ? "pass" : "fail") << "," << c.deviation << ","
         << c.tolerance << "\n";
    return os.str();
  }

  static Report from_csv(const std::string& text) {
    Report rep;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "check,status,deviation,tolerance")
      throw std::invalid_argument("report: bad header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      CheckResult c;
      std::istringstream row(line);
      std::string status, dev, tol;
      if (!std::getline(row, c.name, ',') || !std::getline(row, status, ',') ||
          !std::getline(row, dev, ',') || !std::getline(row, tol))
        throw std::invalid_argument("report: malformed row '" + line + "'");
      if (status != "pass" && status != "fail")
        throw std::invalid_argument("report: bad status '" + status + "'");
      c.pass = status == "pass";
      c.deviation = std::stod(dev);
      c.tolerance = std::stod(tol);
      rep.checks.push_back(std::move(c));
    }
    return rep;
  }
};

}  // namespace toposkit
