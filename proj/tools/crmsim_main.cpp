#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "crmsim/runner.hpp"
#include "crmsim/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// "key=v1,v2,v3" -> (key, values)
std::pair<std::string, std::vector<double>> parse_sweep_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw crmsim::ValidationError("sweep", "expected key=v1,v2,...");
  std::pair<std::string, std::vector<double>> out;
  out.first = spec.substr(0, eq);
  std::stringstream values(spec.substr(eq + 1));
  std::string item;
  while (std::getline(values, item, ',')) {
    if (item.empty()) continue;
    out.second.push_back(std::stod(item));
  }
  if (out.second.empty()) throw crmsim::ValidationError("sweep", "no sweep values given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for reservation-based ad hoc MAC protocols"};
  app.require_subcommand(1);

  std::string config_path;
  int seeds_override = 0;
  std::string variants_csv;
  std::string sweep_spec;
  std::string out_dir = "out";
  bool write_traces = false;
  double duration_override = 0.0;

  CLI::App* sim = app.add_subcommand("simulate", "Run the scenario matrix from a config file");
  sim->add_option("config", config_path, "Scenario config file (JSON)")->required();
  sim->add_option("--seeds", seeds_override, "Replicate with seeds 1..N (overrides config)");
  sim->add_option("--variant", variants_csv,
                  "Comma-separated variants to run (overrides config)");
  sim->add_option("--sweep", sweep_spec, "Sweep spec key=v1,v2,... (overrides config)");
  sim->add_option("--out", out_dir, "Output directory for summary.csv and runs.csv");
  sim->add_flag("--trace", write_traces, "Write one event-trace file per run");
  sim->add_option("--duration", duration_override, "Simulated seconds per run (override)");

  CLI11_PARSE(app, argc, argv);

  try {
    crmsim::ScenarioConfig config = crmsim::parse_scenario(read_file(config_path));

    if (seeds_override > 0) {
      config.seeds.clear();
      for (int i = 1; i <= seeds_override; ++i)
        config.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (!variants_csv.empty()) {
      config.variants.clear();
      std::stringstream ss(variants_csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto v = crmsim::variant_from_name(item);
        if (!v) throw crmsim::ValidationError("variants", "unknown variant " + item);
        config.variants.push_back(*v);
      }
      if (config.variants.empty())
        throw crmsim::ValidationError("variants", "no variants given");
    }
    if (!sweep_spec.empty()) {
      auto [key, values] = parse_sweep_spec(sweep_spec);
      crmsim::apply_sweep_value(config, key, values.front());  // key check
      config.sweep_key = key;
      config.sweep_values = values;
    }
    if (duration_override > 0.0) config.duration_s = duration_override;

    crmsim::RunnerOptions options;
    if (write_traces) options.trace_dir = out_dir + "/traces";

    const crmsim::MatrixResult result = crmsim::run_matrix(config, options);
    crmsim::write_summary_table(result, std::cout);
    crmsim::write_outputs(result, out_dir);
    std::cout << "wrote " << out_dir << "/summary.csv and " << out_dir << "/runs.csv\n";

    for (const crmsim::RunRow& row : result.runs) {
      if (!row.ok()) {
        std::cerr << "run failed: " << crmsim::variant_name(row.variant) << " seed " << row.seed
                  << ": " << row.error << '\n';
      }
    }
    return result.any_error() ? 1 : 0;
  } catch (const crmsim::ValidationError& e) {
    std::cerr << "config validation error: " << e.what() << '\n';
    return 2;
  } catch (const crmsim::ParseError& e) {
    std::cerr << "config parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
