// Command-line front end: run experiments, rescore saved traces, and emit
// synthetic streams.
#include <CLI11.hpp>

#include <gpad/harness.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

int run_command(const std::string& config_path, const std::string& output_dir,
                const std::optional<std::uint64_t>& seed,
                const std::string& detector) {
  gpad::ExperimentConfig config =
      gpad::load_experiment_config(config_path);
  if (!output_dir.empty()) {
    config.output_dir = output_dir;
  }
  if (seed.has_value()) {
    config.seed = *seed;
  }
  if (!detector.empty()) {
    config.detector.kind = gpad::detector_kind_from_string(detector);
  }

  const gpad::ExperimentResult result = gpad::run_experiment(config);
  for (const gpad::RepeatResult& repeat : result.repeats) {
    if (!repeat.ok) {
      std::printf("repeat %d seed %llu: FAILED: %s\n", repeat.repeat,
                  static_cast<unsigned long long>(repeat.seed),
                  repeat.error.c_str());
      continue;
    }
    std::printf("repeat %d seed %llu: f1=%.4f precision=%.4f recall=%.4f",
                repeat.repeat, static_cast<unsigned long long>(repeat.seed),
                repeat.report.f1, repeat.report.precision,
                repeat.report.recall);
    if (repeat.selected_epsilon_p.has_value()) {
      std::printf(" epsilon_p=%g", *repeat.selected_epsilon_p);
    }
    std::printf("\n");
  }
  if (result.aggregate.has_value()) {
    const gpad::RunAggregate& agg = *result.aggregate;
    std::printf(
        "aggregate over %zu run(s): mean_f1=%.4f std_f1=%.4f "
        "mean_precision=%.4f mean_recall=%.4f\n",
        agg.runs, agg.mean_f1, agg.std_f1, agg.mean_precision,
        agg.mean_recall);
  } else {
    std::printf("aggregate unavailable: no repeat succeeded\n");
  }
  std::printf("summary written to %s\n", result.summary_path.string().c_str());
  return result.all_ok() ? 0 : 1;
}

int score_command(const std::string& trace_path, const std::string& labels_path,
                  const std::string& output_path) {
  const auto outcomes = gpad::read_trace_csv(trace_path);
  const auto labels = gpad::read_labels_csv(labels_path);
  const gpad::EvalReport report = gpad::score(outcomes, labels);
  const json payload = {
      {"true_positives", report.true_positives},
      {"false_positives", report.false_positives},
      {"false_negatives", report.false_negatives},
      {"precision", report.precision},
      {"recall", report.recall},
      {"f1", report.f1},
  };
  const std::string text = payload.dump(2) + "\n";
  if (output_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    gpad::atomic_write_file(output_path, text);
    std::printf("report written to %s\n", output_path.c_str());
  }
  return 0;
}

int synth_command(const std::string& config_path, const std::string& output,
                  std::uint64_t seed) {
  std::ifstream in(config_path);
  if (!in) {
    throw std::runtime_error("cannot open synth config: " + config_path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("cannot parse " + config_path + ": " + e.what());
  }
  const gpad::SynthSpec spec = gpad::parse_synth_spec(j);
  const gpad::TimeSeries series = gpad::synth_stream(spec, seed);
  const auto timestamps =
      gpad::synth_timestamps(spec.length, spec.points_per_day);

  const std::filesystem::path series_path = output;
  gpad::write_series_csv(series_path, series, timestamps);
  std::printf("series written to %s (%zu points)\n",
              series_path.string().c_str(), series.size());
  if (series.labels.has_value()) {
    std::filesystem::path labels_path = series_path;
    labels_path.replace_filename(series_path.stem().string() + "_labels" +
                                 series_path.extension().string());
    gpad::write_labels_csv(labels_path, *series.labels);
    std::printf("labels written to %s\n", labels_path.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming Gaussian-process anomaly detection"};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_output;
  std::uint64_t run_seed = 0;
  std::string run_detector;
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("--config", run_config, "Experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--output", run_output,
                  "Override the configured output directory");
  CLI::Option* seed_opt =
      run->add_option("--seed", run_seed, "Override the base seed");
  run->add_option("--detector", run_detector,
                  "Override the detector: gpr-ad, gpr-adam, gpr-iadam, sgp-q");

  std::string score_trace;
  std::string score_labels;
  std::string score_output;
  CLI::App* score =
      app.add_subcommand("score", "Score a saved trace against labels");
  score->add_option("trace", score_trace, "Trace CSV from a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("labels", score_labels, "Label CSV (one 0/1 per row)")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--output", score_output,
                    "Write the JSON report here instead of stdout");

  std::string synth_config;
  std::string synth_output;
  std::uint64_t synth_seed = 0;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a synthetic stream as CSV");
  synth->add_option("--config", synth_config, "Synthetic stream spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  synth->add_option("--output", synth_output, "Series CSV destination")
      ->required();
  synth->add_option("--seed", synth_seed, "Noise seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) {
        seed = run_seed;
      }
      return run_command(run_config, run_output, seed, run_detector);
    }
    if (score->parsed()) {
      return score_command(score_trace, score_labels, score_output);
    }
    if (synth->parsed()) {
      return synth_command(synth_config, synth_output, synth_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
