#include "crmsim/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "crmsim/simulation.hpp"
#include "crmsim/trace.hpp"

namespace crmsim {

namespace {

struct Cell {
  std::size_t variant_idx;
  std::size_t sweep_idx;  // npos when no sweep
  std::size_t seed_idx;
};

constexpr std::size_t kNoSweep = static_cast<std::size_t>(-1);

unsigned resolve_workers(unsigned requested, std::size_t cells) {
  unsigned workers = requested;
  if (workers == 0) {
    if (const char* env = std::getenv("CRMSIM_WORKERS")) {
      const long parsed = std::strtol(env, nullptr, 10);
      if (parsed > 0) workers = static_cast<unsigned>(parsed);
    }
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, cells)));
}

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t n = 0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  r.n = xs.size();
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

}  // namespace

bool MatrixResult::any_error() const {
  for (const RunRow& r : runs) {
    if (!r.ok()) return true;
  }
  return false;
}

const AggregateRow* MatrixResult::find(Variant v, std::optional<double> sweep_value) const {
  for (const AggregateRow& row : points) {
    if (row.variant != v) continue;
    if (sweep_value.has_value() != row.sweep_value.has_value()) continue;
    if (sweep_value && *sweep_value != *row.sweep_value) continue;
    return &row;
  }
  return nullptr;
}

MatrixResult run_matrix(const ScenarioConfig& config, const RunnerOptions& options) {
  MatrixResult result;
  result.scenario_name = config.name;

  const std::size_t sweep_points = config.sweep_key.empty() ? 1 : config.sweep_values.size();
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < config.variants.size(); ++v) {
    for (std::size_t s = 0; s < sweep_points; ++s) {
      for (std::size_t k = 0; k < config.seeds.size(); ++k) {
        cells.push_back({v, config.sweep_key.empty() ? kNoSweep : s, k});
      }
    }
  }
  result.runs.resize(cells.size());

  if (!options.trace_dir.empty()) std::filesystem::create_directories(options.trace_dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      RunRow& row = result.runs[i];
      row.variant = config.variants[cell.variant_idx];
      row.seed = config.seeds[cell.seed_idx];
      if (cell.sweep_idx != kNoSweep) row.sweep_value = config.sweep_values[cell.sweep_idx];
      try {
        ScenarioConfig point = config;
        if (row.sweep_value) apply_sweep_value(point, config.sweep_key, *row.sweep_value);
        const ScenarioWorld world = build_world(point, row.seed);
        RunOutput out = run_simulation(world, row.variant, point.params, point.duration_us(),
                                       row.seed);
        row.report = out.report;
        if (!options.trace_dir.empty()) {
          std::ostringstream name;
          name << config.name << '_' << variant_name(row.variant);
          if (row.sweep_value) name << '_' << format_double(*row.sweep_value);
          name << "_s" << row.seed << ".trace";
          std::ofstream f(std::filesystem::path(options.trace_dir) / name.str());
          out.trace.serialize(f);
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  const unsigned workers = resolve_workers(options.workers, cells.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Aggregate per (variant, sweep value), in declaration order.
  for (std::size_t v = 0; v < config.variants.size(); ++v) {
    for (std::size_t s = 0; s < sweep_points; ++s) {
      AggregateRow agg;
      agg.variant = config.variants[v];
      if (!config.sweep_key.empty()) agg.sweep_value = config.sweep_values[s];
      std::vector<double> tput, delay, energy, collisions, drops;
      for (const RunRow& row : result.runs) {
        if (row.variant != agg.variant || row.sweep_value != agg.sweep_value || !row.ok())
          continue;
        tput.push_back(row.report.end_to_end_throughput_bits_per_s);
        if (row.report.mean_end_to_end_delay_us)
          delay.push_back(*row.report.mean_end_to_end_delay_us);
        energy.push_back(row.report.mean_node_energy_mJ());
        collisions.push_back(static_cast<double>(row.report.collisions));
        drops.push_back(static_cast<double>(row.report.drops_buffer + row.report.drops_retry));
      }
      const MeanStd t = mean_std(tput);
      agg.seed_count = static_cast<std::uint32_t>(t.n);
      agg.throughput_mean = t.mean;
      agg.throughput_std = t.std_dev;
      const MeanStd d = mean_std(delay);
      if (d.n > 0) {
        agg.delay_mean_us = d.mean;
        agg.delay_std_us = d.std_dev;
      }
      const MeanStd e = mean_std(energy);
      agg.energy_mean_mJ = e.mean;
      agg.energy_std_mJ = e.std_dev;
      agg.collisions_mean = mean_std(collisions).mean;
      agg.drops_mean = mean_std(drops).mean;
      result.points.push_back(agg);
    }
  }
  return result;
}

void write_summary_csv(const MatrixResult& result, std::ostream& out) {
  out << "scenario,variant,sweep_value,seed_count,throughput_mean,throughput_std,"
         "delay_mean_us,delay_std_us,energy_mean_mJ,energy_std_mJ,collisions,drops\n";
  for (const AggregateRow& row : result.points) {
    out << result.scenario_name << ',' << variant_name(row.variant) << ','
        << opt_str(row.sweep_value) << ',' << row.seed_count << ','
        << format_double(row.throughput_mean) << ',' << format_double(row.throughput_std) << ','
        << opt_str(row.delay_mean_us) << ',' << opt_str(row.delay_std_us) << ','
        << format_double(row.energy_mean_mJ) << ',' << format_double(row.energy_std_mJ) << ','
        << format_double(row.collisions_mean) << ',' << format_double(row.drops_mean) << '\n';
  }
}

void write_runs_csv(const MatrixResult& result, std::ostream& out) {
  out << "scenario,variant,sweep_value,seed,throughput_bits_per_s,delay_mean_us,"
         "energy_mean_mJ,collisions,drops_buffer,drops_retry,reservation_utilization,"
         "conservation_ok,soundness_violations,trace_hash,error\n";
  for (const RunRow& row : result.runs) {
    out << result.scenario_name << ',' << variant_name(row.variant) << ','
        << opt_str(row.sweep_value) << ',' << row.seed << ',';
    if (row.ok()) {
      const MetricsReport& r = row.report;
      out << format_double(r.end_to_end_throughput_bits_per_s) << ','
          << (r.mean_end_to_end_delay_us ? format_double(*r.mean_end_to_end_delay_us)
                                         : std::string{})
          << ',' << format_double(r.mean_node_energy_mJ()) << ',' << r.collisions << ','
          << r.drops_buffer << ',' << r.drops_retry << ','
          << format_double(r.reservation_utilization) << ',' << (r.conservation_ok ? 1 : 0)
          << ',' << r.soundness_violations << ',' << r.trace_hash << ",\n";
    } else {
      std::string msg = row.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out << ",,,,,,,,," << msg << '\n';
    }
  }
}

void write_summary_table(const MatrixResult& result, std::ostream& out) {
  out << "scenario: " << result.scenario_name << '\n';
  out << std::left << std::setw(20) << "variant" << std::setw(14) << "sweep" << std::setw(10)
      << "seeds" << std::setw(18) << "tput[bit/s]" << std::setw(16) << "delay[us]"
      << std::setw(16) << "energy[mJ]" << std::setw(12) << "collisions" << "drops" << '\n';
  for (const AggregateRow& row : result.points) {
    out << std::left << std::setw(20) << variant_name(row.variant) << std::setw(14)
        << (row.sweep_value ? format_double(*row.sweep_value) : std::string{"-"}) << std::setw(10)
        << row.seed_count << std::setw(18) << format_double(row.throughput_mean) << std::setw(16)
        << (row.delay_mean_us ? format_double(*row.delay_mean_us) : std::string{"-"})
        << std::setw(16) << format_double(row.energy_mean_mJ) << std::setw(12)
        << format_double(row.collisions_mean) << format_double(row.drops_mean) << '\n';
  }
}

void write_outputs(const MatrixResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(std::filesystem::path(dir) / "summary.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "/summary.csv");
    write_summary_csv(result, f);
  }
  {
    std::ofstream f(std::filesystem::path(dir) / "runs.csv");
    if (!f) throw std::runtime_error("cannot write " + dir + "/runs.csv");
    write_runs_csv(result, f);
  }
}

}  // namespace crmsim
