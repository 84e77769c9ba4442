#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kschemo/harness/config.hpp"

namespace kschemo::harness {

/// Fixed-width text table; columns sized to their widest cell.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }
  bool empty() const { return rows_.empty(); }
  void render(std::ostream& out) const {
    std::vector<std::size_t> w(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) {
      w[c] = header_[c].size();
      for (const auto& r : rows_) w[c] = std::max(w[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        out << r[c];
        if (c + 1 < r.size()) out << std::string(w[c] - r[c].size() + 2, ' ');
        else out << "\n";
      }
    };
    line(header_);
    std::size_t total = 0;
    for (auto x : w) total += x + 2;
    out << std::string(total - 2, '-') << "\n";
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string short_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

struct TraceSummary {
  std::size_t rows = 0;
  double t_last = 0.0;
  double sup_last = 0.0;
  double mass_drift = 0.0;
};

/// Row count, final time, final sup-norm and max relative mass drift of a
/// stored trace CSV.
inline TraceSummary summarize_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = detail::split(line, ',');
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ct = col("t"), cm = col("mass"), cs = col("u_Linf");
  TraceSummary s;
  double m0 = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    const double t = std::stod(cells[ct]), m = std::stod(cells[cm]), sup = std::stod(cells[cs]);
    if (s.rows == 0) m0 = m;
    if (m0 != 0.0) s.mass_drift = std::max(s.mass_drift, std::abs(m - m0) / std::abs(m0));
    s.t_last = t;
    s.sup_last = sup;
    ++s.rows;
  }
  return s;
}

/// Plain-text overview of every run sidecar and verification report in dir.
inline void render_report(const std::filesystem::path& dir, std::ostream& out) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("report: no such directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  TextTable runs({"run", "regime", "status", "steps", "rows", "t_final", "max_sup", "plateau", "mass_drift"});
  TextTable suites({"suite", "result", "checks", "worst"});
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception&) {
      out << "skipping unreadable " << f.filename().string() << "\n";
      continue;
    }
    if (j.contains("suite")) {
      int passed = 0, total = 0;
      std::string worst;
      for (const auto& c : j.value("checks", nlohmann::json::array())) {
        ++total;
        if (c.value("pass", false)) ++passed;
        else if (worst.empty()) worst = c.value("name", std::string());
      }
      suites.add({j["suite"].get<std::string>(), j.value("pass", false) ? "PASS" : "FAIL",
                  std::to_string(passed) + "/" + std::to_string(total), worst.empty() ? "-" : worst});
      continue;
    }
    if (!j.contains("status")) continue;
    fs::path csv = f;
    csv.replace_extension(".csv");
    std::string rows = "-", t_final = "-", drift = "-";
    if (fs::exists(csv)) {
      const TraceSummary s = summarize_trace_csv(csv);
      rows = std::to_string(s.rows);
      t_final = short_real(s.t_last);
      drift = short_real(s.mass_drift);
    }
    std::string status = j["status"].get<std::string>();
    if (j.contains("blowup_time") && j["blowup_time"].is_number())
      status += " @ t=" + short_real(j["blowup_time"].get<double>());
    runs.add({f.stem().string(), j["regime"].value("tag", std::string("?")), status,
              std::to_string(j.value("steps", 0L)), rows, t_final, short_real(j.value("max_sup", 0.0)),
              short_real(j.value("plateau_ratio", 0.0)), drift});
  }
  if (!runs.empty()) runs.render(out);
  if (!suites.empty()) {
    if (!runs.empty()) out << "\n";
    suites.render(out);
  }
  if (fs::exists(dir / "sweep_summary.csv")) out << "\nsweep summary: " << (dir / "sweep_summary.csv").string() << "\n";
  if (runs.empty() && suites.empty()) out << "no runs or reports in " << dir.string() << "\n";
}

}  // namespace kschemo::harness
