#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace hf {

inline constexpr int kReportVersion = 1;

enum class CheckStatus { Pass, Fail, Refused, Skipped };

inline const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Refused: return "refused";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

inline CheckStatus status_from_name(const std::string& s) {
  if (s == "pass") return CheckStatus::Pass;
  if (s == "fail") return CheckStatus::Fail;
  if (s == "refused") return CheckStatus::Refused;
  if (s == "skipped") return CheckStatus::Skipped;
  throw std::invalid_argument("unknown check status '" + s + "'");
}

struct CheckRecord {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double residual = 0;
  double tol = 0;
  double ms = 0;
  std::string note;  // reason for refused/skipped records
};

/// Suite result.  Refused records (violated theorem hypotheses) and skipped
/// records (exhausted resampling) do not fail the suite.
struct CheckReport {
  std::string suite;
  std::vector<CheckRecord> records;

  void add(CheckRecord r) { records.push_back(std::move(r)); }
  void add(std::string name, double residual, double tol, double ms) {
    records.push_back({std::move(name),
                       residual <= tol ? CheckStatus::Pass : CheckStatus::Fail,
                       residual, tol, ms, ""});
  }

  bool passed() const {
    return std::none_of(records.begin(), records.end(), [](const CheckRecord& r) {
      return r.status == CheckStatus::Fail;
    });
  }
  int exit_code() const { return passed() ? 0 : 1; }

  /// Records sorted by name: report assembly is order-independent.
  std::vector<CheckRecord> sorted() const {
    std::vector<CheckRecord> v = records;
    std::sort(v.begin(), v.end(),
              [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
    return v;
  }

  nlohmann::json to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& r : sorted()) {
      nlohmann::json c{{"name", r.name},
                       {"status", status_name(r.status)},
                       {"residual", r.residual},
                       {"tol", r.tol},
                       {"ms", r.ms}};
      if (!r.note.empty()) c["note"] = r.note;
      checks.push_back(std::move(c));
    }
    return nlohmann::json{{"suite", suite},
                          {"version", kReportVersion},
                          {"checks", std::move(checks)},
                          {"verdict", passed() ? "pass" : "fail"}};
  }

  std::string text() const {
    std::ostringstream os;
    os << "suite: " << suite << "\n";
    for (const auto& r : sorted()) {
      os << "  [" << status_name(r.status) << "] " << r.name;
      if (r.status == CheckStatus::Pass || r.status == CheckStatus::Fail)
        os << "  residual=" << r.residual << " tol=" << r.tol;
      if (!r.note.empty()) os << "  (" << r.note << ")";
      os << "  [" << static_cast<long>(r.ms) << " ms]\n";
    }
    os << "verdict: " << (passed() ? "pass" : "fail") << "\n";
    return os.str();
  }
};

inline CheckReport report_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kReportVersion)
    throw std::invalid_argument("unsupported report version");
  CheckReport rep;
  rep.suite = j.at("suite").get<std::string>();
  for (const auto& c : j.at("checks")) {
    CheckRecord r;
    r.name = c.at("name").get<std::string>();
    r.status = status_from_name(c.at("status").get<std::string>());
    r.residual = c.at("residual").get<double>();
    r.tol = c.at("tol").get<double>();
    r.ms = c.at("ms").get<double>();
    if (c.contains("note")) r.note = c.at("note").get<std::string>();
    rep.records.push_back(std::move(r));
  }
  return rep;
}

}  // namespace hf
