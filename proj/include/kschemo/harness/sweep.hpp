#pragma once

// Parameter sweeps. A config file may carry a [sweep] block:
//
//   [sweep]
//   params.l = 0.5, 1.5         one axis per numeric key, comma separated
//   params.m = 2
//   expected = Uncovered, BoundedA   optional, one tag per point
//
// Points are the Cartesian product of the axes in file order, the first
// axis varying slowest.

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kschemo/harness/config.hpp"
#include "kschemo/harness/scenario.hpp"

namespace kschemo::harness {

inline constexpr double kPlateauTolerance = 1.05;

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct SweepSpec {
  SimConfig base;
  std::vector<SweepAxis> axes;
  std::vector<RegimeTag> expected;  // empty or one per point

  std::size_t point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }

  /// Axis values of point i.
  std::vector<std::string> point_values(std::size_t i) const {
    std::vector<std::string> out(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      out[a] = axes[a].values[i % axes[a].values.size()];
      i /= axes[a].values.size();
    }
    return out;
  }

  SimConfig point_config(std::size_t i) const {
    SimConfig cfg = base;
    const auto vals = point_values(i);
    for (std::size_t a = 0; a < axes.size(); ++a) apply_setting(cfg, axes[a].key, vals[a]);
    validate(cfg);
    cfg.output.path = base.output.path + "_" + std::to_string(i);
    return cfg;
  }
};

/// Parse base config plus [sweep] block, and validate every point up front.
inline SweepSpec parse_sweep(const std::string& text) {
  SweepSpec spec;
  spec.base = parse_config(text, {"sweep"});
  std::vector<std::string> expected_raw;
  for (const auto& e : read_ini(text)) {
    if (e.path.rfind("sweep.", 0) != 0) continue;
    const std::string key = e.path.substr(6);
    const std::string where = " (line " + std::to_string(e.line) + ")";
    if (key == "expected") {
      for (const auto& s : detail::split(e.value, ',')) expected_raw.push_back(detail::trim(s));
      continue;
    }
    if (!key_table().count(key)) throw ConfigError("sweep: unknown axis '" + key + "'" + where);
    if (!is_numeric_key(key)) throw ConfigError("sweep: axis '" + key + "' is not numeric" + where);
    SweepAxis axis{key, {}};
    for (const auto& s : detail::split(e.value, ',')) {
      const std::string v = detail::trim(s);
      (void)detail::parse_real(key, v);
      axis.values.push_back(v);
    }
    if (axis.values.empty()) throw ConfigError("sweep: axis '" + key + "' has no values" + where);
    spec.axes.push_back(std::move(axis));
  }
  for (const auto& s : expected_raw) {
    try {
      spec.expected.push_back(regime_from_string(s));
    } catch (const std::invalid_argument&) {
      throw ConfigError("sweep.expected: unknown regime tag '" + s + "'");
    }
  }
  if (!spec.expected.empty() && spec.expected.size() != spec.point_count())
    throw ConfigError("sweep.expected: " + std::to_string(spec.expected.size()) + " tags for " +
                      std::to_string(spec.point_count()) + " points");
  for (std::size_t i = 0; i < spec.point_count(); ++i) {
    try {
      (void)spec.point_config(i);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("sweep point " + std::to_string(i) + ": " + e.what());
    }
  }
  return spec;
}

struct SweepRow {
  std::size_t index = 0;
  std::vector<std::string> values;
  std::string regime;
  std::string status;  // StatusKind name, or "Error"
  std::string error;
  long steps = 0;
  double final_time = 0.0;
  double max_sup = 0.0;
  double plateau = 0.0;
  std::optional<RegimeTag> expected;
  bool match = true;
};

struct SweepSummary {
  std::vector<std::string> axis_keys;
  std::vector<SweepRow> rows;  // sorted by index

  bool all_matched() const {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.match; });
  }
  bool any_error() const {
    return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == "Error"; });
  }
};

/// An expected Bounded* tag also demands a completed run whose norms plateau.
inline bool row_matches(const SweepRow& r) {
  if (!r.expected) return true;
  if (r.regime != to_string(*r.expected)) return false;
  if (*r.expected == RegimeTag::Uncovered) return true;
  return r.status == to_string(StatusKind::Completed) && r.plateau <= kPlateauTolerance;
}

inline SweepRow run_sweep_point(const SweepSpec& spec, std::size_t i, const std::filesystem::path& out) {
  SweepRow row;
  row.index = i;
  row.values = spec.point_values(i);
  if (!spec.expected.empty()) row.expected = spec.expected[i];
  try {
    const SimConfig cfg = spec.point_config(i);
    row.regime = to_string(classify_regime(cfg.params).tag);
    const ScenarioResult res = run_scenario(cfg, out);
    row.status = to_string(res.sim.trace.status.kind);
    row.steps = res.sim.steps;
    row.final_time = res.sim.final_time;
    row.max_sup = res.max_sup;
    row.plateau = res.plateau;
  } catch (const std::exception& e) {
    row.status = "Error";
    row.error = e.what();
  }
  row.match = row_matches(row);
  return row;
}

/// Blocking FIFO used to hand finished rows to the aggregator.
template <class T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }
  T receive() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T v = std::move(queue_.front());
    queue_.pop_front();
    return v;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

inline void write_sweep_summary(const SweepSummary& s, std::ostream& out) {
  out << "index";
  for (const auto& k : s.axis_keys) out << ',' << k;
  out << ",regime,expected,status,steps,final_time,max_sup,plateau_ratio,match,error\n";
  for (const auto& r : s.rows) {
    out << r.index;
    for (const auto& v : r.values) out << ',' << v;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << r.regime << ',' << (r.expected ? to_string(*r.expected) : "") << ',' << r.status
        << ',' << r.steps << ',' << format_real(r.final_time) << ',' << format_real(r.max_sup) << ','
        << format_real(r.plateau) << ',' << (r.match ? "yes" : "no") << ',' << err << "\n";
  }
}

/// Run every point on up to `parallelism` workers; traces go to out_dir and
/// the summary to out_dir/sweep_summary.csv (skipped if out_dir is empty).
inline SweepSummary run_sweep(const SweepSpec& spec, int parallelism, const std::filesystem::path& out_dir) {
  const std::size_t count = spec.point_count();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, parallelism))));
  Channel<SweepRow> channel;
  std::mutex next_mutex;
  std::size_t next = 0;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(next_mutex);
          if (next == count) return;
          i = next++;
        }
        channel.send(run_sweep_point(spec, i, out_dir));
      }
    });
  }
  SweepSummary summary;
  for (const auto& a : spec.axes) summary.axis_keys.push_back(a.key);
  for (std::size_t k = 0; k < count; ++k) summary.rows.push_back(channel.receive());
  for (auto& t : pool) t.join();
  std::sort(summary.rows.begin(), summary.rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.index < b.index; });
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir / "sweep_summary.csv");
    if (!f) throw std::runtime_error("cannot write " + (out_dir / "sweep_summary.csv").string());
    write_sweep_summary(summary, f);
  }
  return summary;
}

}  // namespace kschemo::harness
