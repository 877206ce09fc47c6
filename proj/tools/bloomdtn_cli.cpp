// bloomdtn: command-line front end for the simulator.
//
//   bloomdtn run                [--preset paper|desk] [--config F] [--set k=v]...
//   bloomdtn sweep-beacon       [--delays 0.1,0.5,1,2,5]
//   bloomdtn compare-strategies
//   bloomdtn sweep-filter-size  [--sizes 25,50,100,200]
//   bloomdtn taxi               --traces DIR
//   bloomdtn make-traces        --out DIR [--cabs 20]
//
// Exit status: 0 ok, 1 configuration error, 2 runtime error.

#include <CLI11.hpp>

#include <charconv>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "bloomdtn/config.hpp"
#include "bloomdtn/simengine.hpp"

namespace fs = std::filesystem;
using namespace bloomdtn;

namespace {

struct CommonArgs {
  std::string preset = "paper";
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_preset = true) {
  if (with_preset) cmd->add_option("--preset", a.preset, "base scenario")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--config", a.config, "key=value scenario file");
  cmd->add_option("--set", a.sets, "override one key (repeatable)");
  cmd->add_option("--seed", a.seed, "global seed");
  cmd->add_option("--duration", a.duration, "simulated seconds");
  cmd->add_option("--out", a.out, "output directory");
}

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ScenarioConfig resolve(ScenarioConfig base, const CommonArgs& a) {
  Settings s;
  if (!a.config.empty()) {
    if (!fs::exists(a.config)) throw ConfigError("config", "file not found: " + a.config);
    s = read_settings(fs::path(a.config));
  }
  for (const auto& kv : a.sets) s.push_back(split_setting(kv));
  if (a.seed) s.emplace_back("seed", std::to_string(*a.seed));
  if (a.duration) s.emplace_back("duration", num(*a.duration));
  if (!a.out.empty()) s.emplace_back("output.dir", a.out);
  return apply_settings(std::move(base), s);
}

ScenarioConfig preset(const std::string& name) {
  return name == "desk" ? desk_scenario() : paper_scenario();
}

// Writes through a temporary so a reader never sees a partial file.
void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_report(const fs::path& dir, const MetricsReport& r, const std::string& suffix = "") {
  write_file(dir / ("summary" + suffix + ".json"), r.to_json().dump(2) + "\n");
  write_file(dir / ("timeseries" + suffix + ".csv"), r.timeseries_csv());
}

std::string digest(const MetricsReport& r) {
  const auto& c = r.counters;
  const auto md = r.mean_delay();
  std::ostringstream o;
  o << "strategy=" << to_char(r.config.strategy.kind) << " seed=" << r.config.seed
    << " generated=" << c.generated << " delivered=" << c.delivered
    << " ratio=" << num(r.delivery_ratio()) << " forwarded=" << c.forwarded
    << " received=" << c.received << " redundant=" << c.redundant
    << " efficiency=" << num(r.efficiency()) << " overhead=" << num(r.overhead_fraction())
    << " mean_delay=" << (md ? num(*md) : std::string("n/a"));
  return o.str();
}

std::string sweep_csv(const char* column, const std::vector<SweepRow>& rows) {
  std::ostringstream o;
  o << column << ",generated,delivered,forwarded,received,redundant,efficiency,delivery_ratio,"
                 "overhead_fraction,mean_delay\n";
  for (const auto& row : rows) {
    const auto& c = row.report.counters;
    const auto md = row.report.mean_delay();
    o << num(row.value) << ',' << c.generated << ',' << c.delivered << ',' << c.forwarded << ','
      << c.received << ',' << c.redundant << ',' << num(row.report.efficiency()) << ','
      << num(row.report.delivery_ratio()) << ',' << num(row.report.overhead_fraction()) << ','
      << (md ? num(*md) : std::string()) << '\n';
  }
  return o.str();
}

void emit_sweep(const fs::path& dir, const char* column, const std::vector<SweepRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : rows) {
    auto item = row.report.to_json();
    item[column] = row.value;
    j.push_back(std::move(item));
    write_file(dir / ("timeseries_" + std::string(column) + "_" + num(row.value) + ".csv"),
               row.report.timeseries_csv());
  }
  write_file(dir / "summary.json", nlohmann::json{{"sweep", column}, {"runs", j}}.dump(2) + "\n");
  write_file(dir / "sweep.csv", sweep_csv(column, rows));
  for (const auto& row : rows) std::cout << column << "=" << num(row.value) << " " << digest(row.report) << "\n";
}

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloom-filter epidemic forwarding simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, beacon_args, compare_args, size_args, taxi_args;
  std::vector<double> delays{0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<std::uint32_t> sizes{25, 50, 100, 200};
  std::string trace_dir;
  std::string synth_out;
  SyntheticCabConfig synth;

  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  add_common(run_cmd, run_args);
  auto* beacon_cmd = app.add_subcommand("sweep-beacon", "efficiency against beacon delay");
  add_common(beacon_cmd, beacon_args);
  beacon_cmd->add_option("--delays", delays, "ascending beacon delays in seconds")->delimiter(',');
  auto* compare_cmd = app.add_subcommand("compare-strategies", "strategies A, B, C on one scenario");
  add_common(compare_cmd, compare_args);
  auto* size_cmd = app.add_subcommand("sweep-filter-size", "vary the main window capacity");
  add_common(size_cmd, size_args);
  size_cmd->add_option("--sizes", sizes, "window capacities")->delimiter(',');
  auto* taxi_cmd = app.add_subcommand("taxi", "trace-driven scenario with Poisson sources");
  add_common(taxi_cmd, taxi_args, false);
  taxi_cmd->add_option("--traces", trace_dir, "directory of cab trace files")->required();
  auto* synth_cmd = app.add_subcommand("make-traces", "write synthetic cab trace files");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--cabs", synth.cabs, "number of cabs");
  synth_cmd->add_option("--duration", synth.duration, "seconds of trace");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*run_cmd) {
    return guarded([&] {
      const auto cfg = resolve(preset(run_args.preset), run_args);
      const auto r = run(cfg);
      write_report(cfg.output_dir, r);
      std::cout << "run " << digest(r) << "\n";
    });
  }
  if (*beacon_cmd) {
    return guarded([&] {
      const auto cfg = resolve(preset(beacon_args.preset), beacon_args);
      emit_sweep(cfg.output_dir, "beacon_interval", efficiency_sweep(cfg, delays));
    });
  }
  if (*size_cmd) {
    return guarded([&] {
      const auto cfg = resolve(preset(size_args.preset), size_args);
      std::vector<SweepRow> rows = filter_size_sweep(cfg, sizes);
      emit_sweep(cfg.output_dir, "window_n", rows);
    });
  }
  if (*compare_cmd) {
    return guarded([&] {
      const auto cfg = resolve(preset(compare_args.preset), compare_args);
      const auto reports = strategy_compare(cfg);
      nlohmann::json j;
      for (const auto& r : reports) {
        const std::string k(1, to_char(r.config.strategy.kind));
        j[k] = r.to_json();
        write_file(cfg.output_dir / ("timeseries_" + k + ".csv"), r.timeseries_csv());
        std::cout << "compare " << digest(r) << "\n";
      }
      write_file(cfg.output_dir / "summary.json", j.dump(2) + "\n");
    });
  }
  if (*taxi_cmd) {
    return guarded([&] {
      const auto cfg = resolve(taxi_scenario(trace_dir), taxi_args);
      const auto r = run(cfg);
      write_report(cfg.output_dir, r);
      std::cout << "taxi " << digest(r) << "\n";
    });
  }
  if (*synth_cmd) {
    return guarded([&] {
      const auto files = write_synthetic_cab_traces(synth_out, synth);
      std::cout << "make-traces wrote " << files.size() << " files to " << synth_out << "\n";
    });
  }
  return 1;
}
