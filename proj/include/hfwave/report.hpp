#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfwave/catalog.hpp"
#include "hfwave/config.hpp"

namespace hfwave {

struct ReportRow {
  std::string name;
  double value = 0;
  std::string target;  // human-readable target or window; empty = informational
  bool pass = true;
  bool gated = true;  // gated rows decide the exit code
};

/// Collected results of one command: machine CSV/JSON plus a human summary.
/// The exit-code contract: 0 iff every gated row passes.
class RunReport {
public:
  RunReport(std::string title, ExperimentConfig cfg) : title_(std::move(title)), cfg_(std::move(cfg)) {}

  void add(const std::string& name, double value, const std::string& target = "", bool pass = true,
           bool gated = false) {
    rows_.push_back({name, value, target, pass, gated});
  }
  void note(const std::string& text) { notes_.push_back(text); }
  void attach(const std::string& key, const nlohmann::json& j) { extra_[key] = j; }

  bool all_pass() const {
    for (const auto& r : rows_)
      if (r.gated && !r.pass) return false;
    return true;
  }

  /// Writes results.csv, report.json and summary.txt under dir; returns the
  /// process exit code.
  int emit(const std::string& dir, bool cached = false) const {
    std::filesystem::create_directories(dir);
    {
      std::ofstream csv(dir + "/results.csv");
      if (!csv) throw std::runtime_error("report: cannot write to " + dir);
      csv.precision(17);
      csv << "name,value,target,pass,gated\n";
      for (const auto& r : rows_)
        csv << r.name << "," << r.value << "," << r.target << "," << (r.pass ? 1 : 0) << ","
            << (r.gated ? 1 : 0) << "\n";
    }
    {
      nlohmann::json j;
      j["title"] = title_;
      j["cached"] = cached;
      j["config"] = cfg_.canonical();
      j["config_hash"] = content_hash(cfg_.canonical());
      j["pass"] = all_pass();
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : rows_)
        rows.push_back({{"name", r.name},
                        {"value", r.value},
                        {"target", r.target},
                        {"pass", r.pass},
                        {"gated", r.gated}});
      j["rows"] = rows;
      j["notes"] = notes_;
      for (const auto& [k, v] : extra_.items()) j[k] = v;
      std::ofstream js(dir + "/report.json");
      js << j.dump(2) << "\n";
    }
    {
      std::ofstream sum(dir + "/summary.txt");
      sum << title_ << (cached ? "  [cached]" : "") << "\n";
      sum.precision(10);
      for (const auto& r : rows_) {
        sum << "  " << (r.gated ? (r.pass ? "[pass] " : "[FAIL] ") : "       ") << r.name << " = "
            << r.value;
        if (!r.target.empty()) sum << "   (target " << r.target << ")";
        sum << "\n";
      }
      for (const auto& n : notes_) sum << "  note: " << n << "\n";
      sum << (all_pass() ? "ALL CHECKS PASS\n" : "CHECKS FAILED\n");
    }
    return all_pass() ? 0 : 1;
  }

  std::string summary_text() const {
    std::ostringstream sum;
    sum.precision(10);
    sum << title_ << "\n";
    for (const auto& r : rows_) {
      sum << "  " << (r.gated ? (r.pass ? "[pass] " : "[FAIL] ") : "       ") << r.name << " = "
          << r.value;
      if (!r.target.empty()) sum << "   (target " << r.target << ")";
      sum << "\n";
    }
    for (const auto& n : notes_) sum << "  note: " << n << "\n";
    return sum.str();
  }

private:
  std::string title_;
  ExperimentConfig cfg_;
  std::vector<ReportRow> rows_;
  std::vector<std::string> notes_;
  nlohmann::json extra_ = nlohmann::json::object();
};

/// Two-column plot data for external plotting.
inline void emit_plot(const std::string& path, const std::vector<std::pair<double, double>>& xy) {
  std::ofstream os(path);
  os.precision(17);
  os << "x,y\n";
  for (const auto& [x, y] : xy) os << x << "," << y << "\n";
}

}  // namespace hfwave
