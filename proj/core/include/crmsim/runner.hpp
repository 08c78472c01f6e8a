#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crmsim/metrics.hpp"
#include "crmsim/scenario.hpp"

namespace crmsim {

struct RunRow {
  Variant variant = Variant::ftkn_crm;
  std::optional<double> sweep_value;
  std::uint64_t seed = 0;
  MetricsReport report;
  std::string error;  // non-empty when the run failed

  bool ok() const { return error.empty(); }
};

struct AggregateRow {
  Variant variant = Variant::ftkn_crm;
  std::optional<double> sweep_value;
  std::uint32_t seed_count = 0;
  double throughput_mean = 0.0;
  double throughput_std = 0.0;
  std::optional<double> delay_mean_us;
  std::optional<double> delay_std_us;
  double energy_mean_mJ = 0.0;
  double energy_std_mJ = 0.0;
  double collisions_mean = 0.0;
  double drops_mean = 0.0;
};

struct MatrixResult {
  std::string scenario_name;
  std::vector<RunRow> runs;          // one per (variant, sweep value, seed)
  std::vector<AggregateRow> points;  // one per (variant, sweep value)

  bool any_error() const;
  const AggregateRow* find(Variant v, std::optional<double> sweep_value = std::nullopt) const;
};

struct RunnerOptions {
  unsigned workers = 0;         // 0: CRMSIM_WORKERS env or hardware concurrency
  std::string trace_dir;        // non-empty: write one trace file per run
};

// Executes every (variant, sweep point, seed) cell; cells run in parallel,
// results merge by key, and one failed cell never aborts the matrix.
MatrixResult run_matrix(const ScenarioConfig& config, const RunnerOptions& options = {});

void write_summary_csv(const MatrixResult& result, std::ostream& out);
void write_runs_csv(const MatrixResult& result, std::ostream& out);
void write_summary_table(const MatrixResult& result, std::ostream& out);

// Writes summary.csv and runs.csv under `dir` (created if needed).
void write_outputs(const MatrixResult& result, const std::string& dir);

}  // namespace crmsim
