// surgeflow command line: synthetic data generation, forecast training,
// network simulation and reporting, composed through files.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <span>
#include <thread>

#include "surgeflow/charts.hpp"
#include "surgeflow/errors.hpp"
#include "surgeflow/forecast.hpp"
#include "surgeflow/io.hpp"
#include "surgeflow/model_io.hpp"
#include "surgeflow/numfmt.hpp"
#include "surgeflow/queueing.hpp"
#include "surgeflow/scenario.hpp"
#include "surgeflow/simulation.hpp"

namespace fs = std::filesystem;
using namespace surgeflow;

namespace {

constexpr const char* kVersion = "surgeflow 1.0.0";

struct SynthArgs {
  int days = 31;
  std::uint64_t seed = 42;
  std::string out;
  double base_low = 50.0;
  double base_high = 60.0;
  double noise_sd = 1.0;
  double weekend_scale = 0.9;
  std::vector<int> trough_hours{3, 4, 5};
  std::vector<int> peak_hours{10, 16, 17};
};

int run_synth(const SynthArgs& args) {
  io::SyntheticSpec spec;
  spec.days = args.days;
  spec.seed = args.seed;
  spec.base_low = args.base_low;
  spec.base_high = args.base_high;
  spec.noise_sd = args.noise_sd;
  spec.weekend_scale = args.weekend_scale;
  spec.trough_hours = {args.trough_hours.begin(), args.trough_hours.end()};
  spec.peak_hours = {args.peak_hours.begin(), args.peak_hours.end()};
  ArrivalSeries series = io::generate_synthetic(spec);
  io::write_series_csv(series, args.out);
  std::cout << "wrote " << series.values.size() << " hours to " << args.out << "\n";
  return 0;
}

struct ForecastArgs {
  std::string input;
  std::string model_out = "model.json";
  std::string history_out = "history.csv";
  std::string predict_out = "forecast.csv";
  int epochs = 100;
  std::uint64_t seed = 42;
  bool predict = false;
  bool charts = false;
};

int run_forecast(const ForecastArgs& args) {
  ArrivalSeries series = io::load_series(args.input);
  forecast::TrainConfig config;
  config.epochs = args.epochs;
  config.seed = args.seed;
  forecast::TrainResult result = forecast::train(series, config);

  forecast::save_model(result.model, args.model_out);
  forecast::save_history(result.report, args.history_out);
  std::cout << "model: " << args.model_out << "\n"
            << "history: " << args.history_out << " (" << args.epochs << " epochs)\n"
            << "final train loss: " << fmt_double(result.report.train_loss.back())
            << ", val loss: " << fmt_double(result.report.val_loss.back()) << "\n";

  if (args.charts) {
    fs::path dir = fs::path(args.history_out).parent_path();
    if (dir.empty()) dir = ".";
    io::ChartResult chart = io::render_loss_chart(result.report, dir);
    for (const std::string& f : chart.files) std::cout << "chart: " << (dir / f).string() << "\n";
  }

  if (args.predict) {
    std::span<const double> tail(series.values.data() + series.values.size() - 24, 24);
    auto next = forecast::predict_next_24(result.model, tail);
    ArrivalSeries out;
    out.values.assign(next.begin(), next.end());
    io::write_series_csv(out, args.predict_out);
    std::cout << "forecast: " << args.predict_out << "\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  std::string arrivals;
  std::string forecast_path;
  std::string out = "metrics";
  bool event_log = false;
  bool assignments = false;
  int sweep = 1;
  int jobs = 1;
};

ArrivalSeries resolve_arrivals(const sim::ScenarioConfig& config, const fs::path& scenario_dir,
                               const SimulateArgs& args) {
  if (!args.arrivals.empty()) return io::load_series(args.arrivals);
  if (!args.forecast_path.empty()) return io::load_series(args.forecast_path);
  switch (config.arrival_source.kind) {
    case sim::ArrivalSource::Kind::Synthetic:
      return io::generate_synthetic(config.arrival_source.params);
    case sim::ArrivalSource::Kind::Csv:
    case sim::ArrivalSource::Kind::Forecast: {
      fs::path p = config.arrival_source.path;
      if (p.is_relative() && !fs::exists(p) && fs::exists(scenario_dir / p))
        p = scenario_dir / p;
      return io::load_series(p);
    }
  }
  throw ValidationError("arrival_source.kind: unknown");
}

int run_simulate(const SimulateArgs& args) {
  sim::ScenarioConfig config = sim::load_scenario(args.scenario);
  const fs::path scenario_dir = fs::path(args.scenario).parent_path();
  ArrivalSeries arrivals = resolve_arrivals(config, scenario_dir, args);

  io::ExportOptions options;
  options.event_log = args.event_log;
  options.assignments = args.assignments || args.event_log;

  auto run_one = [&](std::uint64_t seed, const fs::path& out_dir) {
    sim::ScenarioConfig local = config;
    local.seed = seed;
    sim::SimulationMetrics metrics = sim::run(local, arrivals);
    io::export_metrics(metrics, local.hospitals, sim::scenario_hash(local), out_dir, options);
    return metrics.total_cost();
  };

  if (args.sweep <= 1) {
    double cost = run_one(config.seed, args.out);
    std::cout << "metrics: " << args.out << " (total cost " << fmt_double(cost) << ")\n";
    return 0;
  }

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(args.sweep));
  for (int k = 0; k < args.sweep; ++k) seeds[k] = config.seed + static_cast<std::uint64_t>(k);
  const int jobs = std::max(1, args.jobs);
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        std::size_t k = cursor.fetch_add(1);
        if (k >= seeds.size()) return;
        run_one(seeds[k], fs::path(args.out) / ("seed_" + std::to_string(seeds[k])));
      }
    });
  }
  for (std::thread& t : workers) t.join();
  std::cout << "metrics: " << args.out << " (" << args.sweep << " seeds)\n";
  return 0;
}

struct ReportArgs {
  std::string metrics;
  bool charts = false;
  std::vector<double> wq_lambda;
  double wq_mu = 0.0;
};

double cell_to_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

// Closed-form M/M/1 waiting times as CSV rows.
void print_wq_table(const ReportArgs& args) {
  std::printf("lambda,mu,wq_hours\n");
  for (double lambda : args.wq_lambda) {
    double wq = queueing::expected_wait({lambda, args.wq_mu});
    std::printf("%s,%s,%s\n", fmt_double(lambda).c_str(), fmt_double(args.wq_mu).c_str(),
                fmt_double(wq).c_str());
  }
}

int run_report(const ReportArgs& args) {
  if (!args.wq_lambda.empty()) {
    print_wq_table(args);
    if (args.metrics.empty()) return 0;
  }
  if (args.metrics.empty()) throw ValidationError("--metrics: required");

  const fs::path dir = args.metrics;
  io::Manifest manifest = io::load_manifest(dir);  // throws if missing

  auto dist = io::read_csv(dir / "distribution.csv");
  auto cost = io::read_csv(dir / "cost.csv");
  auto acuity = io::read_csv(dir / "acuity.csv");
  auto relocations = io::read_csv(dir / "relocations.csv");

  sim::SimulationMetrics metrics;
  for (std::size_t r = 1; r < dist.size(); ++r) {
    metrics.hospital_ids.push_back(dist[r][0]);
    metrics.served_per_hospital[dist[r][0]] = static_cast<int>(cell_to_double(dist[r][1]));
  }
  for (std::size_t r = 1; r < cost.size(); ++r)
    metrics.cumulative_cost_series.push_back(cell_to_double(cost[r][1]));
  for (std::size_t r = 1; r < acuity.size() && r <= 3; ++r)
    metrics.acuity_counts_relocated[r - 1] = static_cast<int>(cell_to_double(acuity[r][1]));
  for (std::size_t r = 1; r < relocations.size(); ++r)
    metrics.relocations_per_hour.push_back(static_cast<int>(cell_to_double(relocations[r][1])));

  std::printf("%-10s %10s\n", "hospital", "served");
  long total_served = 0;
  for (const std::string& id : metrics.hospital_ids) {
    std::printf("%-10s %10d\n", id.c_str(), metrics.served_per_hospital[id]);
    total_served += metrics.served_per_hospital[id];
  }
  std::printf("%-10s %10ld\n", "total", total_served);
  std::printf("total cost: %s\n", fmt_double(metrics.total_cost()).c_str());

  // Capacity-based figures come from the manifest summary block.
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  nlohmann::json doc;
  in >> doc;
  if (doc.contains("summary")) {
    const auto& summary = doc["summary"];
    std::printf("overflow: %d\n", summary.value("overflow_count", 0));
    // equity spread across the receivers (entries after the front line)
    double lo = 0.0, hi = 0.0;
    bool first = true;
    bool front = true;
    for (const auto& h : summary.value("hospitals", nlohmann::json::array())) {
      if (front) {
        front = false;
        continue;
      }
      double u = h.value("utilization", 0.0);
      lo = first ? u : std::min(lo, u);
      hi = first ? u : std::max(hi, u);
      first = false;
    }
    std::printf("utilization spread: %s\n", fmt_double(hi - lo).c_str());
  }

  if (args.charts) {
    io::ChartResult chart = io::render_metric_charts(metrics, dir);
    io::append_to_manifest(dir, chart.files, chart.warnings);
    for (const std::string& f : chart.files) std::printf("chart: %s\n", (dir / f).string().c_str());
    for (const std::string& w : chart.warnings) std::printf("warning: %s\n", w.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hospital surge forecasting and patient relocation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic hourly arrival series");
  synth->set_version_flag("--version", kVersion);
  synth->add_option("--days", synth_args.days, "days to generate (24 hours each)");
  synth->add_option("--seed", synth_args.seed, "noise seed");
  synth->add_option("--out", synth_args.out, "output CSV path")->required();
  synth->add_option("--base-low", synth_args.base_low, "trough-hour arrival rate");
  synth->add_option("--base-high", synth_args.base_high, "peak-hour arrival rate");
  synth->add_option("--noise-sd", synth_args.noise_sd, "gaussian noise sd");
  synth->add_option("--weekend-scale", synth_args.weekend_scale, "weekend damping factor");
  synth->add_option("--trough-hours", synth_args.trough_hours, "low hours of day")
      ->delimiter(',');
  synth->add_option("--peak-hours", synth_args.peak_hours, "high hours of day")->delimiter(',');

  ForecastArgs forecast_args;
  CLI::App* fc = app.add_subcommand("forecast", "train the arrival forecaster");
  fc->set_version_flag("--version", kVersion);
  fc->add_option("--input", forecast_args.input, "arrivals CSV")->required();
  fc->add_option("--model-out", forecast_args.model_out, "model JSON path");
  fc->add_option("--history-out", forecast_args.history_out, "loss history CSV path");
  fc->add_option("--epochs", forecast_args.epochs, "training epochs");
  fc->add_option("--seed", forecast_args.seed, "shuffle/init seed");
  fc->add_flag("--predict", forecast_args.predict, "also forecast the next 24 hours");
  fc->add_option("--predict-out", forecast_args.predict_out, "forecast CSV path");
  fc->add_flag("--charts", forecast_args.charts, "write the loss-per-epoch SVG");

  SimulateArgs simulate_args;
  CLI::App* simc = app.add_subcommand("simulate", "run the relocation simulation");
  simc->set_version_flag("--version", kVersion);
  simc->add_option("--scenario", simulate_args.scenario, "scenario JSON")->required();
  CLI::Option* arrivals_opt =
      simc->add_option("--arrivals", simulate_args.arrivals, "arrivals CSV override");
  simc->add_option("--forecast", simulate_args.forecast_path, "forecast CSV override")
      ->excludes(arrivals_opt);
  simc->add_option("--out", simulate_args.out, "metrics output directory");
  simc->add_flag("--event-log", simulate_args.event_log, "also export the audit event log");
  simc->add_flag("--assignments", simulate_args.assignments, "also export assignments.csv");
  simc->add_option("--sweep", simulate_args.sweep, "run N consecutive seeds");
  simc->add_option("--jobs", simulate_args.jobs, "parallel workers for --sweep");

  ReportArgs report_args;
  CLI::App* rep = app.add_subcommand("report", "summarize exported metrics");
  rep->set_version_flag("--version", kVersion);
  rep->add_option("--metrics", report_args.metrics, "metrics directory");
  rep->add_flag("--charts", report_args.charts, "write SVG charts next to the metrics");
  rep->add_option("--wq-lambda", report_args.wq_lambda,
                  "arrival rates for an M/M/1 waiting-time table")
      ->delimiter(',');
  rep->add_option("--wq-mu", report_args.wq_mu, "service rate for the waiting-time table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (fc->parsed()) return run_forecast(forecast_args);
    if (simc->parsed()) return run_simulate(simulate_args);
    if (rep->parsed()) return run_report(report_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
