#include "confstab/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "confstab/errors.hpp"

namespace confstab {

namespace {

using json = nlohmann::ordered_json;

std::string format_double_17(double v) {
  if (!std::isfinite(v)) return "null";  // JSON has no NaN/inf
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_rec(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump_rec(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_rec(item, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double_17(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write to '" + path + "'");
  out << content;
}

}  // namespace

std::string dump_json_17(const json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += "\n";
  return out;
}

Report::Report(json config_echo, std::string version) {
  body_["toolkit"] = {{"name", "confstab"}, {"version", std::move(version)}};
  body_["config"] = std::move(config_echo);
  body_["checks"] = json::array();
}

void Report::add_check(const std::string& name, const std::string& verdict, json record) {
  json entry;
  entry["name"] = name;
  entry["verdict"] = verdict;
  entry["record"] = std::move(record);
  body_["checks"].push_back(std::move(entry));
}

void Report::set_timing(double total_seconds,
                        std::vector<std::pair<std::string, double>> per_check) {
  timing_ = json::object();
  timing_["total_seconds"] = total_seconds;
  json per = json::object();
  for (auto& [name, secs] : per_check) per[name] = secs;
  timing_["per_check_seconds"] = std::move(per);
}

bool Report::all_passed() const {
  for (const auto& entry : body_.at("checks"))
    if (entry.at("verdict").get<std::string>() == "fail") return false;
  return true;
}

std::string Report::fingerprint() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(dump_json_17(body_, 0))));
  return buf;
}

std::string Report::to_json_text() const {
  json doc = body_;
  doc["fingerprint"] = fingerprint();
  doc["timing"] = timing_.is_null() ? json::object() : timing_;
  return dump_json_17(doc);
}

void Report::write_json(const std::string& path) const { write_file(path, to_json_text()); }

void Report::write_csv_tables(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto cell = [](const json& v) -> std::string {
    if (v.is_number_float()) return format_double_17(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };

  for (const auto& entry : body_.at("checks")) {
    const std::string name = entry.at("name").get<std::string>();
    const json& rec = entry.at("record");
    if (name == "trace" && rec.contains("nodes")) {
      std::string csv = "index,tr_V_q,tr_Vtilde_qtilde,rhs_curvature_form,rhs_H_form,"
                        "K_sigma_normal,H_norm_sq,f_value\n";
      const json& nodes = rec.at("nodes");
      const auto& col = [&](const char* key, std::size_t i) {
        return cell(nodes.at(key).at(i));
      };
      const std::size_t count = nodes.at("tr_V_q").size();
      for (std::size_t i = 0; i < count; ++i) {
        csv += std::to_string(i) + "," + col("tr_V_q", i) + "," + col("tr_Vtilde_qtilde", i) +
               "," + col("rhs_curvature_form", i) + "," + col("rhs_H_form", i) + "," +
               col("K_sigma_normal", i) + "," + col("H_norm_sq", i) + "," + col("f_value", i) +
               "\n";
      }
      write_file((fs::path(dir) / "node_traces.csv").string(), csv);
    }
    if (name == "pinching" && rec.contains("per_point")) {
      std::string csv = "index,min_K,max_K\n";
      for (const auto& row : rec.at("per_point"))
        csv += cell(row.at("index")) + "," + cell(row.at("min_K")) + "," +
               cell(row.at("max_K")) + "\n";
      write_file((fs::path(dir) / "pinching_samples.csv").string(), csv);
    }
    if (name == "check_theorem" && rec.contains("inequalities")) {
      std::string csv = "name,lhs,rhs,margin,strict,holds\n";
      for (const auto& row : rec.at("inequalities"))
        csv += cell(row.at("name")) + "," + cell(row.at("lhs")) + "," + cell(row.at("rhs")) +
               "," + cell(row.at("margin")) + "," + cell(row.at("strict")) + "," +
               cell(row.at("holds")) + "\n";
      write_file((fs::path(dir) / "verdict_margins.csv").string(), csv);
    }
  }
}

}  // namespace confstab
