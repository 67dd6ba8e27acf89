#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfront {

/// Config mistakes are user errors with their own exit code; every message
/// names the offending key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value configuration. Lines are `key = value`, blank, or
/// #-comments; keys are single tokens, values run to end of line.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value);

  /// 16-hex-digit digest over the sorted key/value pairs, so the value is
  /// independent of the order keys were written in.
  std::string digest() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// Rejects any key outside `allowed`, naming the first offender.
  void restrict_keys(const std::vector<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> kv_;
};

/// One completed seed: the observable vector matches the run's column list.
struct ExperimentRecord {
  uint64_t seed = 0;
  std::vector<double> values;
  double wall_seconds = 0.0;  // kept out of records.csv (not reproducible)
};

struct RunSummary {
  std::string experiment;
  std::string digest;
  std::string dir;
  std::vector<std::string> columns;
  size_t seeds_done = 0;
  size_t seeds_skipped = 0;  // already on disk from an earlier invocation
  bool truncated = false;    // a budget cap cut the range short
  std::map<std::string, double> stats;
};

/// Experiment-specific summary scalars (tail fits, rate exponents, event
/// frequencies) recomputed from the record table; run and report both go
/// through this single entry point.
std::map<std::string, double> summarize_records(
    const Config& cfg, const std::vector<std::string>& columns,
    const std::vector<uint64_t>& seeds,
    const std::vector<std::vector<double>>& rows);

/// Executes the configured experiment over the half-open seed range with a
/// worker pool. Records stream to <out>/<experiment>-<digest>/records.csv in
/// ascending seed order (append + flush per seed; a final atomic rewrite
/// keeps the table sorted so split ranges merge to the one-shot bytes).
/// Seeds already on disk are skipped; config.txt, summary.txt, and plots are
/// rewritten last. Observables depend only on (config, seed), never on the
/// worker count.
RunSummary run_experiment(const Config& cfg, const std::string& out_dir,
                          uint64_t seed_begin, uint64_t seed_end, int workers);

/// Rebuilds the summary table for every run directory under results_dir and
/// returns the report text (also written to results_dir/report.txt along
/// with refreshed plots). Throws when the directory holds no runs or a
/// records table lacks an expected column.
std::string build_report(const std::string& results_dir);

/// Scatter points plus an optional fitted polyline, written as a small
/// self-contained SVG.
struct PlotSeries {
  std::vector<double> x, y;
};
void write_scatter_svg(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       const PlotSeries& points, const PlotSeries& line = {});

}  // namespace gfront
