#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gpad/data_io.hpp"
#include "gpad/detectors.hpp"
#include "gpad/evaluation.hpp"
#include "gpad/kernels.hpp"
#include "gpad/training.hpp"

namespace gpad {

// ---------------------------------------------------------------------------
// Kernel descriptions: a kernel tree whose numeric fields may be left open.
// Open fields are filled from the training data (variance of the targets,
// one tenth of the input range, full input range for the period) when the
// description is materialized.

struct KernelDescription;

struct RbfDescription {
  std::optional<double> variance;
  std::optional<double> lengthscale;
};

struct LinearDescription {
  std::optional<std::vector<double>> variances;
};

struct PeriodicDescription {
  std::optional<double> variance;
  std::optional<std::vector<double>> lengthscales;
  std::optional<double> period;
};

struct SumDescription {
  std::vector<KernelDescription> children;
};

struct KernelDescription {
  std::variant<RbfDescription, LinearDescription, PeriodicDescription,
               SumDescription>
      node = RbfDescription{};
};

namespace detail {

inline KernelSpec materialize_node(const KernelDescription& desc,
                                   const ScaleDefaults& defaults,
                                   double input_range, Eigen::Index dim) {
  if (const auto* rbf = std::get_if<RbfDescription>(&desc.node)) {
    return RbfKernel{rbf->variance.value_or(defaults.variance),
                     rbf->lengthscale.value_or(defaults.lengthscale)};
  }
  if (const auto* linear = std::get_if<LinearDescription>(&desc.node)) {
    std::vector<double> variances = linear->variances.value_or(
        std::vector<double>(static_cast<std::size_t>(dim), defaults.variance));
    return LinearKernel{Eigen::Map<const Eigen::VectorXd>(
        variances.data(), static_cast<Eigen::Index>(variances.size()))};
  }
  if (const auto* periodic = std::get_if<PeriodicDescription>(&desc.node)) {
    std::vector<double> lengthscales = periodic->lengthscales.value_or(
        std::vector<double>(static_cast<std::size_t>(dim),
                            defaults.lengthscale));
    return PeriodicKernel{
        periodic->variance.value_or(defaults.variance),
        Eigen::Map<const Eigen::VectorXd>(
            lengthscales.data(), static_cast<Eigen::Index>(lengthscales.size())),
        periodic->period.value_or(input_range)};
  }
  const auto& sum = std::get<SumDescription>(desc.node);
  SumKernel out;
  out.children.reserve(sum.children.size());
  for (const KernelDescription& child : sum.children) {
    out.children.push_back(
        materialize_node(child, defaults, input_range, dim));
  }
  return out;
}

}  // namespace detail

// Resolves every open field against the training data and validates the
// resulting kernel.
inline KernelSpec materialize_kernel(const KernelDescription& desc,
                                     const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& y) {
  if (x.rows() == 0) {
    throw std::invalid_argument("cannot materialize a kernel without data");
  }
  const ScaleDefaults defaults = scale_defaults(x, y);
  double input_range = x.col(0).maxCoeff() - x.col(0).minCoeff();
  if (!(input_range > 0.0)) input_range = 1.0;
  KernelSpec kernel = detail::materialize_node(desc, defaults, input_range,
                                               x.cols());
  validate_kernel(kernel);
  return kernel;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct DatasetSpec {
  std::optional<std::filesystem::path> path;  // NAB-style CSV
  std::string value_column = "value";
  std::optional<std::filesystem::path> labels;  // side file for path datasets
  std::optional<SynthSpec> synth;
};

// Slice of the full labeled series used to pick the sgp-q likelihood
// threshold; the slice is jittered per repeat so selection is not a rerun of
// the evaluation stream.
struct ValidationSpec {
  std::size_t begin = 0;
  std::size_t end = 0;
  double noise_scale = 0.0;
  std::size_t train_len = 0;  // prefix of the slice seeding the window
  std::vector<double> grid = default_threshold_grid();
};

struct ExperimentConfig {
  DatasetSpec dataset;
  DetectorConfig detector;
  OptimizerConfig optimizer;
  KernelDescription kernel;
  std::optional<double> noise_variance;  // default: 0.1 * var(y)
  SplitSpec split;
  std::optional<ValidationSpec> validation;
  int repeats = 5;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
  // Standard deviation of the per-repeat log-space perturbation applied to
  // the initial hyperparameters.  This is the sole source of run-to-run
  // variance on fixed datasets, standing in for otherwise-unspecified
  // initialization randomness.
  double init_perturbation_sd = 0.05;
};

namespace detail {

inline void check_keys(const nlohmann::json& object, const std::string& context,
                       std::initializer_list<const char*> allowed) {
  if (!object.is_object()) {
    throw std::invalid_argument(context + " must be a JSON object");
  }
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " +
                                  context);
    }
  }
}

template <typename T>
void assign_if_present(const nlohmann::json& object, const char* key, T& out) {
  if (object.contains(key)) {
    out = object.at(key).get<T>();
  }
}

template <typename T>
void assign_if_present(const nlohmann::json& object, const char* key,
                       std::optional<T>& out) {
  if (object.contains(key)) {
    out = object.at(key).get<T>();
  }
}

}  // namespace detail

inline KernelDescription parse_kernel_description(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) {
    throw std::invalid_argument("kernel config needs a 'type' field");
  }
  const std::string type = j.at("type").get<std::string>();
  KernelDescription desc;
  if (type == "rbf") {
    detail::check_keys(j, "rbf kernel", {"type", "variance", "lengthscale"});
    RbfDescription rbf;
    detail::assign_if_present(j, "variance", rbf.variance);
    detail::assign_if_present(j, "lengthscale", rbf.lengthscale);
    desc.node = rbf;
  } else if (type == "linear") {
    detail::check_keys(j, "linear kernel", {"type", "variances"});
    LinearDescription linear;
    detail::assign_if_present(j, "variances", linear.variances);
    desc.node = linear;
  } else if (type == "periodic") {
    detail::check_keys(j, "periodic kernel",
                       {"type", "variance", "lengthscales", "period"});
    PeriodicDescription periodic;
    detail::assign_if_present(j, "variance", periodic.variance);
    detail::assign_if_present(j, "lengthscales", periodic.lengthscales);
    detail::assign_if_present(j, "period", periodic.period);
    desc.node = periodic;
  } else if (type == "sum") {
    detail::check_keys(j, "sum kernel", {"type", "children"});
    if (!j.contains("children") || !j.at("children").is_array()) {
      throw std::invalid_argument("sum kernel needs a 'children' array");
    }
    SumDescription sum;
    for (const nlohmann::json& child : j.at("children")) {
      sum.children.push_back(parse_kernel_description(child));
    }
    desc.node = sum;
  } else {
    throw std::invalid_argument("unknown kernel type '" + type + "'");
  }
  return desc;
}

inline SynthSpec parse_synth_spec(const nlohmann::json& j) {
  detail::check_keys(j, "synth spec",
                     {"kind", "length", "points_per_day", "amplitude",
                      "noise_sd", "anomaly_start", "anomaly_span", "magnitude",
                      "spike_indices"});
  SynthSpec spec;
  if (j.contains("kind")) {
    spec.kind = synth_kind_from_string(j.at("kind").get<std::string>());
  }
  detail::assign_if_present(j, "length", spec.length);
  detail::assign_if_present(j, "points_per_day", spec.points_per_day);
  detail::assign_if_present(j, "amplitude", spec.amplitude);
  detail::assign_if_present(j, "noise_sd", spec.noise_sd);
  detail::assign_if_present(j, "anomaly_start", spec.anomaly_start);
  detail::assign_if_present(j, "anomaly_span", spec.anomaly_span);
  detail::assign_if_present(j, "magnitude", spec.magnitude);
  detail::assign_if_present(j, "spike_indices", spec.spike_indices);
  return spec;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  detail::check_keys(j, "experiment config",
                     {"dataset", "detector", "optimizer", "kernel",
                      "noise_variance", "split", "validation", "repeats",
                      "seed", "output_dir", "init_perturbation_sd"});
  ExperimentConfig config;

  if (!j.contains("dataset")) {
    throw std::invalid_argument("experiment config needs a 'dataset'");
  }
  const nlohmann::json& dataset = j.at("dataset");
  detail::check_keys(dataset, "dataset",
                     {"path", "value_column", "labels", "synth"});
  if (dataset.contains("path")) {
    config.dataset.path = dataset.at("path").get<std::string>();
  }
  detail::assign_if_present(dataset, "value_column",
                            config.dataset.value_column);
  if (dataset.contains("labels")) {
    config.dataset.labels = dataset.at("labels").get<std::string>();
  }
  if (dataset.contains("synth")) {
    config.dataset.synth = parse_synth_spec(dataset.at("synth"));
  }
  if (config.dataset.path.has_value() == config.dataset.synth.has_value()) {
    throw std::invalid_argument(
        "dataset must specify exactly one of 'path' or 'synth'");
  }

  if (j.contains("detector")) {
    const nlohmann::json& detector = j.at("detector");
    detail::check_keys(detector, "detector",
                       {"kind", "q", "beta_max", "epsilon_e", "epsilon_l",
                        "epsilon_p", "W", "W_short", "M"});
    if (detector.contains("kind")) {
      config.detector.kind =
          detector_kind_from_string(detector.at("kind").get<std::string>());
    }
    detail::assign_if_present(detector, "q", config.detector.q);
    detail::assign_if_present(detector, "beta_max", config.detector.beta_max);
    detail::assign_if_present(detector, "epsilon_e", config.detector.epsilon_e);
    detail::assign_if_present(detector, "epsilon_l", config.detector.epsilon_l);
    detail::assign_if_present(detector, "epsilon_p", config.detector.epsilon_p);
    detail::assign_if_present(detector, "W", config.detector.drift_window);
    detail::assign_if_present(detector, "W_short",
                              config.detector.drift_short_window);
    if (detector.contains("M")) {
      config.detector.inducing_count = detector.at("M").get<Eigen::Index>();
    }
  }

  if (j.contains("optimizer")) {
    const nlohmann::json& optimizer = j.at("optimizer");
    detail::check_keys(optimizer, "optimizer",
                       {"initial_iterations", "warm_iterations", "step_size",
                        "beta1", "beta2", "epsilon"});
    detail::assign_if_present(optimizer, "initial_iterations",
                              config.optimizer.initial_iterations);
    detail::assign_if_present(optimizer, "warm_iterations",
                              config.optimizer.warm_iterations);
    detail::assign_if_present(optimizer, "step_size",
                              config.optimizer.step_size);
    detail::assign_if_present(optimizer, "beta1", config.optimizer.beta1);
    detail::assign_if_present(optimizer, "beta2", config.optimizer.beta2);
    detail::assign_if_present(optimizer, "epsilon", config.optimizer.epsilon);
  }

  if (j.contains("kernel")) {
    config.kernel = parse_kernel_description(j.at("kernel"));
  }
  if (j.contains("noise_variance")) {
    config.noise_variance = j.at("noise_variance").get<double>();
  }
  if (j.contains("split")) {
    detail::check_keys(j.at("split"), "split", {"initial_train_len"});
    detail::assign_if_present(j.at("split"), "initial_train_len",
                              config.split.initial_train_len);
  }
  if (j.contains("validation")) {
    const nlohmann::json& validation = j.at("validation");
    detail::check_keys(validation, "validation",
                       {"begin", "end", "noise_scale", "train_len", "grid"});
    ValidationSpec spec;
    detail::assign_if_present(validation, "begin", spec.begin);
    detail::assign_if_present(validation, "end", spec.end);
    detail::assign_if_present(validation, "noise_scale", spec.noise_scale);
    detail::assign_if_present(validation, "train_len", spec.train_len);
    detail::assign_if_present(validation, "grid", spec.grid);
    config.validation = std::move(spec);
  }
  detail::assign_if_present(j, "repeats", config.repeats);
  detail::assign_if_present(j, "seed", config.seed);
  if (j.contains("output_dir")) {
    config.output_dir = j.at("output_dir").get<std::string>();
  }
  detail::assign_if_present(j, "init_perturbation_sd",
                            config.init_perturbation_sd);

  if (config.repeats < 1) {
    throw std::invalid_argument("repeats must be at least 1");
  }
  if (!(config.init_perturbation_sd >= 0.0)) {
    throw std::invalid_argument("init_perturbation_sd must be non-negative");
  }
  return config;
}

inline ExperimentConfig load_experiment_config(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_experiment_config(j);
}

// ---------------------------------------------------------------------------
// Trace files

namespace detail {

inline std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace detail

inline constexpr const char* kTraceHeader =
    "step,t,y,mean,variance,is_anomaly,score,window_action,qe,ql";

inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<DetectionOutcome>& outcomes) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  for (const DetectionOutcome& o : outcomes) {
    out << o.step_index << ',' << detail::format_double(o.t) << ','
        << detail::format_double(o.y) << ','
        << detail::format_double(o.predicted_mean) << ','
        << detail::format_double(o.predicted_variance) << ','
        << (o.is_anomaly ? 1 : 0) << ',' << detail::format_double(o.score)
        << ',' << to_string(o.window_action) << ','
        << (o.qe ? detail::format_double(*o.qe) : std::string()) << ','
        << (o.ql ? detail::format_double(*o.ql) : std::string()) << '\n';
  }
  atomic_write_file(path, out.str());
}

inline std::vector<DetectionOutcome> read_trace_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty trace file " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw std::runtime_error("unexpected trace header in " + path.string());
  }
  std::vector<DetectionOutcome> outcomes;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream split(line);
    while (std::getline(split, field, ',')) fields.push_back(field);
    // A trailing empty ql field is swallowed by getline; restore it.
    while (fields.size() < 10) fields.emplace_back();
    if (fields.size() != 10) {
      throw std::runtime_error("row " + std::to_string(row) + " of " +
                               path.string() + " has " +
                               std::to_string(fields.size()) + " fields");
    }
    try {
      DetectionOutcome o;
      o.step_index = static_cast<std::size_t>(std::stoull(fields[0]));
      o.t = std::stod(fields[1]);
      o.y = std::stod(fields[2]);
      o.predicted_mean = std::stod(fields[3]);
      o.predicted_variance = std::stod(fields[4]);
      o.is_anomaly = fields[5] == "1";
      o.score = std::stod(fields[6]);
      o.window_action = window_action_from_string(fields[7]);
      if (!fields[8].empty()) o.qe = std::stod(fields[8]);
      if (!fields[9].empty()) o.ql = std::stod(fields[9]);
      outcomes.push_back(o);
    } catch (const std::exception& e) {
      throw std::runtime_error("row " + std::to_string(row) + " of " +
                               path.string() + ": " + e.what());
    }
  }
  return outcomes;
}

// Reads a 0/1 column written by write_labels_csv.
inline std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open labels file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty labels file " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "label") {
    throw std::runtime_error("unexpected labels header in " + path.string());
  }
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line != "0" && line != "1") {
      throw std::runtime_error("row " + std::to_string(row) + " of " +
                               path.string() + ": labels must be 0 or 1");
    }
    labels.push_back(line == "1" ? 1 : 0);
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Experiment driver

struct RepeatResult {
  int repeat = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  EvalReport report;
  std::optional<double> selected_epsilon_p;  // sgp-q with validation only
  double initial_objective = std::numeric_limits<double>::quiet_NaN();
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  std::string trace_file;   // bare file name inside output_dir
  std::string labels_file;  // empty when the dataset carries no labels
};

struct ExperimentResult {
  std::vector<RepeatResult> repeats;
  std::optional<RunAggregate> aggregate;  // over successful repeats
  std::filesystem::path summary_path;

  bool all_ok() const {
    for (const RepeatResult& r : repeats) {
      if (!r.ok) return false;
    }
    return !repeats.empty();
  }
};

namespace detail {

// Distinct generator streams per purpose; the tags keep a repeat's synth
// noise, validation jitter, and initialization draws uncorrelated even
// though they share one base seed.
inline constexpr std::uint64_t kValidationSeedTag = 0x9e3779b97f4a7c15ull;
inline constexpr std::uint64_t kInitSeedTag = 0xbf58476d1ce4e5b9ull;

inline Eigen::MatrixXd series_inputs(const TimeSeries& series) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(series.size()), 1);
  for (std::size_t i = 0; i < series.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = series.time[i];
  }
  return x;
}

inline Eigen::VectorXd series_targets(const TimeSeries& series) {
  return Eigen::Map<const Eigen::VectorXd>(
      series.value.data(), static_cast<Eigen::Index>(series.size()));
}

inline nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

inline TimeSeries load_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.synth) {
    return synth_stream(*spec.synth, seed);
  }
  TimeSeries series = load_series_csv(*spec.path, spec.value_column);
  if (spec.labels) {
    series = attach_labels_from_file(std::move(series), *spec.labels);
  }
  return series;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.repeats < 1) {
    throw std::invalid_argument("repeats must be at least 1");
  }
  std::filesystem::create_directories(config.output_dir);

  ExperimentResult result;
  for (int r = 0; r < config.repeats; ++r) {
    RepeatResult repeat;
    repeat.repeat = r;
    repeat.seed = config.seed + static_cast<std::uint64_t>(r);
    try {
      const TimeSeries series = load_dataset(config.dataset, repeat.seed);
      auto [train, test] = initial_split(series, config.split);

      const Eigen::MatrixXd x_train = detail::series_inputs(train);
      const Eigen::VectorXd y_train = detail::series_targets(train);
      KernelSpec kernel = materialize_kernel(config.kernel, x_train, y_train);
      double noise_variance = config.noise_variance.value_or(
          scale_defaults(x_train, y_train).noise_variance);

      if (config.init_perturbation_sd > 0.0) {
        std::mt19937_64 rng(repeat.seed ^ detail::kInitSeedTag);
        std::normal_distribution<double> jitter(0.0,
                                                config.init_perturbation_sd);
        Eigen::VectorXd u = pack_kernel(kernel);
        for (Eigen::Index i = 0; i < u.size(); ++i) u(i) += jitter(rng);
        kernel = unpack_kernel(kernel, u);
        noise_variance = std::exp(std::log(noise_variance) + jitter(rng));
      }

      DetectorConfig detector_config = config.detector;
      if (detector_config.kind == DetectorKind::sgp_q && config.validation) {
        const ValidationSpec& v = *config.validation;
        const TimeSeries validation =
            make_validation(series, v.begin, v.end, v.noise_scale,
                            repeat.seed ^ detail::kValidationSeedTag);
        detector_config.epsilon_p =
            select_threshold(validation, v.grid, detector_config,
                             config.optimizer, kernel, noise_variance,
                             v.train_len);
        repeat.selected_epsilon_p = detector_config.epsilon_p;
      }

      Detector detector(detector_config, config.optimizer, kernel,
                        noise_variance);
      const StreamResult stream = run_stream(detector, train, test);
      repeat.initial_objective = stream.initial_fit.initial_objective;
      repeat.final_objective = stream.initial_fit.final_objective;

      const std::string tag = to_string(detector_config.kind) + "_seed" +
                              std::to_string(repeat.seed);
      repeat.trace_file = "trace_" + tag + ".csv";
      write_trace_csv(config.output_dir / repeat.trace_file, stream.outcomes);
      if (test.labels) {
        repeat.labels_file = "labels_" + tag + ".csv";
        write_labels_csv(config.output_dir / repeat.labels_file, *test.labels);
      }

      if (!stream.ok()) {
        repeat.error = *stream.error;
      } else {
        const std::vector<int> labels =
            test.labels ? *test.labels : std::vector<int>(test.size(), 0);
        repeat.report = score(stream.outcomes, labels);
        repeat.ok = true;
      }
    } catch (const std::exception& e) {
      repeat.error = e.what();
    }
    result.repeats.push_back(std::move(repeat));
  }

  std::vector<EvalReport> successful;
  for (const RepeatResult& repeat : result.repeats) {
    if (repeat.ok) successful.push_back(repeat.report);
  }
  if (!successful.empty()) {
    result.aggregate = aggregate_runs(successful);
  }

  nlohmann::json summary;
  summary["detector"] = to_string(config.detector.kind);
  summary["repeats"] = config.repeats;
  summary["seed"] = config.seed;
  if (result.aggregate) {
    summary["aggregate"] = {
        {"runs", result.aggregate->runs},
        {"mean_f1", result.aggregate->mean_f1},
        {"std_f1", result.aggregate->std_f1},
        {"mean_precision", result.aggregate->mean_precision},
        {"mean_recall", result.aggregate->mean_recall},
    };
  } else {
    summary["aggregate"] = nullptr;
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const RepeatResult& repeat : result.repeats) {
    nlohmann::json run;
    run["repeat"] = repeat.repeat;
    run["seed"] = repeat.seed;
    run["ok"] = repeat.ok;
    run["error"] = repeat.error;
    run["true_positives"] = repeat.report.true_positives;
    run["false_positives"] = repeat.report.false_positives;
    run["false_negatives"] = repeat.report.false_negatives;
    run["precision"] = repeat.report.precision;
    run["recall"] = repeat.report.recall;
    run["f1"] = repeat.report.f1;
    run["epsilon_p"] = repeat.selected_epsilon_p
                           ? nlohmann::json(*repeat.selected_epsilon_p)
                           : nlohmann::json(nullptr);
    run["initial_objective"] = detail::finite_or_null(repeat.initial_objective);
    run["final_objective"] = detail::finite_or_null(repeat.final_objective);
    run["trace_file"] = repeat.trace_file;
    run["labels_file"] = repeat.labels_file;
    runs.push_back(std::move(run));
  }
  summary["runs"] = std::move(runs);

  result.summary_path = config.output_dir / "summary.json";
  atomic_write_file(result.summary_path, summary.dump(2) + "\n");
  return result;
}

}  // namespace gpad
