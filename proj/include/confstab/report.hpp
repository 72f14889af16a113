// Machine-readable run reports: JSON with 17-significant-digit numbers, CSV
// tables, and a determinism fingerprint over every emitted number.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace confstab {

// Serialize a JSON document with doubles printed via %.17g; key order is the
// insertion order of the ordered_json values, so identical content yields
// identical bytes.
std::string dump_json_17(const nlohmann::ordered_json& j, int indent = 2);

class Report {
 public:
  Report(nlohmann::ordered_json config_echo, std::string version);

  void add_check(const std::string& name, const std::string& verdict,
                 nlohmann::ordered_json record);
  void set_timing(double total_seconds,
                  std::vector<std::pair<std::string, double>> per_check_seconds);

  // True when no check carries a "fail" verdict (skips do not fail a run).
  bool all_passed() const;
  const nlohmann::ordered_json& body() const { return body_; }

  // FNV-1a over the canonical serialization of the body; timing never
  // participates.
  std::string fingerprint() const;

  std::string to_json_text() const;
  void write_json(const std::string& path) const;
  // One CSV file per table (node traces, pinching samples, verdict margins)
  // for whichever checks ran.
  void write_csv_tables(const std::string& dir) const;

 private:
  nlohmann::ordered_json body_;
  nlohmann::ordered_json timing_;
};

}  // namespace confstab
