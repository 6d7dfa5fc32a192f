#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gpad/data_io.hpp"
#include "gpad/evaluation.hpp"
#include "gpad/exact_gp.hpp"
#include "gpad/kernels.hpp"
#include "gpad/numerics.hpp"
#include "gpad/sparse_gp.hpp"
#include "gpad/training.hpp"

namespace gpad {

// Half-width of the symmetric 95% predictive interval in standard deviations.
inline constexpr double kIntervalZ = 1.96;

// Floor applied to the long-window variance in the drift statistics so a
// constant history cannot divide by zero.
inline constexpr double kDriftVarianceFloor = 1e-12;

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Density of N(mean, variance) evaluated at y.
inline double gaussian_likelihood(double y, double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("gaussian_likelihood requires positive finite variance");
  }
  const double z = (y - mean) * (y - mean) / (2.0 * variance);
  return std::exp(-z) / std::sqrt(2.0 * M_PI * variance);
}

// Probability that a fresh draw from N(mean, sd^2) lands at least as close to
// the interval edge as y does: Phi(z - |mean - y| / sd).  Values near 1 mean
// y is comfortably inside the interval; values near 0 mean a gross outlier.
inline double beta_score(double y, double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw std::invalid_argument("beta_score requires positive finite standard deviation");
  }
  return normal_cdf(kIntervalZ - std::abs(mean - y) / sd);
}

// Smooth, even score that maps a standardized shift to (0, 2/3]; small values
// indicate the short-window statistic has moved far from the long-window one.
inline double modified_q(double x) {
  const double x2 = x * x;
  return std::exp(-x2 / 4.0) / 6.0 + std::exp(-x2 / 3.0) / 2.0;
}

struct QScores {
  double extended = 0.0;  // from the absolute-error stream
  double local = 0.0;     // from the likelihood stream
};

// Rolling history of absolute prediction errors and predictive likelihoods.
// Both streams share one length: update() appends to each and evicts the
// oldest pair once the long window is full.
class DriftStats {
 public:
  DriftStats(std::size_t window, std::size_t short_window)
      : window_(window), short_window_(short_window) {
    if (window_ == 0 || short_window_ == 0) {
      throw std::invalid_argument("drift windows must be positive");
    }
    if (short_window_ > window_) {
      throw std::invalid_argument("short drift window exceeds long window");
    }
  }

  void update(double error, double likelihood) {
    if (!std::isfinite(error) || !std::isfinite(likelihood) || error < 0.0 ||
        likelihood < 0.0) {
      throw std::invalid_argument("drift statistics require finite non-negative entries");
    }
    errors_.push_back(error);
    likelihoods_.push_back(likelihood);
    if (errors_.size() > window_) {
      errors_.pop_front();
      likelihoods_.pop_front();
    }
  }

  std::size_t size() const { return errors_.size(); }
  std::size_t window() const { return window_; }
  std::size_t short_window() const { return short_window_; }

  QScores q_scores() const {
    if (size() < 2) {
      throw std::logic_error("drift q-scores need at least two entries");
    }
    return QScores{modified_q(standardized_shift(errors_)),
                   modified_q(standardized_shift(likelihoods_))};
  }

 private:
  // (short-window mean - long-window mean) / long-window variance.  The
  // denominator is deliberately the variance, not the standard deviation.
  double standardized_shift(const std::deque<double>& stream) const {
    const std::size_t n = stream.size();
    double long_sum = 0.0;
    for (double v : stream) long_sum += v;
    const double long_mean = long_sum / static_cast<double>(n);

    double ss = 0.0;
    for (double v : stream) ss += (v - long_mean) * (v - long_mean);
    const double long_var =
        std::max(ss / static_cast<double>(n - 1), kDriftVarianceFloor);

    const std::size_t m = std::min(short_window_, n);
    double short_sum = 0.0;
    for (std::size_t i = n - m; i < n; ++i) short_sum += stream[i];
    const double short_mean = short_sum / static_cast<double>(m);

    return (short_mean - long_mean) / long_var;
  }

  std::size_t window_;
  std::size_t short_window_;
  std::deque<double> errors_;
  std::deque<double> likelihoods_;
};

// Fixed-capacity FIFO of (time, value) pairs backing the online models.  The
// generation counter ticks on every mutation so model caches can tell whether
// they still describe the current contents.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 2) {
      throw std::invalid_argument("sliding window capacity must be at least 2");
    }
  }

  void append(double t, double y) {
    points_.emplace_back(t, y);
    if (points_.size() > capacity_) points_.pop_front();
    ++generation_;
  }

  std::size_t size() const { return points_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return points_.size() == capacity_; }
  std::uint64_t generation() const { return generation_; }
  const std::deque<std::pair<double, double>>& points() const { return points_; }

  Eigen::MatrixXd inputs() const {
    Eigen::MatrixXd x(points_.size(), 1);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      x(static_cast<Eigen::Index>(i), 0) = points_[i].first;
    }
    return x;
  }

  Eigen::VectorXd targets() const {
    Eigen::VectorXd y(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      y(static_cast<Eigen::Index>(i)) = points_[i].second;
    }
    return y;
  }

 private:
  std::size_t capacity_;
  std::deque<std::pair<double, double>> points_;
  std::uint64_t generation_ = 0;
};

enum class DetectorKind { gpr_ad, gpr_adam, gpr_iadam, sgp_q };

inline std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::gpr_ad: return "gpr-ad";
    case DetectorKind::gpr_adam: return "gpr-adam";
    case DetectorKind::gpr_iadam: return "gpr-iadam";
    case DetectorKind::sgp_q: return "sgp-q";
  }
  throw std::logic_error("unknown detector kind");
}

inline DetectorKind detector_kind_from_string(const std::string& name) {
  if (name == "gpr-ad") return DetectorKind::gpr_ad;
  if (name == "gpr-adam") return DetectorKind::gpr_adam;
  if (name == "gpr-iadam") return DetectorKind::gpr_iadam;
  if (name == "sgp-q") return DetectorKind::sgp_q;
  throw std::invalid_argument("unknown detector kind: " + name);
}

struct DetectorConfig {
  DetectorKind kind = DetectorKind::sgp_q;
  std::size_t q = 1000;          // sliding-window capacity
  double beta_max = 0.05;        // gpr-iadam substitution cutoff
  double epsilon_e = 0.3;        // sgp-q error-drift cutoff
  double epsilon_l = 0.3;        // sgp-q likelihood-drift cutoff
  double epsilon_p = 0.01;       // sgp-q likelihood threshold
  std::size_t drift_window = 500;       // W
  std::size_t drift_short_window = 10;  // W'
  Eigen::Index inducing_count = 100;    // sgp-q inducing points (M)
};

enum class WindowAction { observed_value_added, prediction_mean_added };

inline std::string to_string(WindowAction action) {
  return action == WindowAction::observed_value_added ? "observed_value_added"
                                                      : "prediction_mean_added";
}

inline WindowAction window_action_from_string(const std::string& name) {
  if (name == "observed_value_added") return WindowAction::observed_value_added;
  if (name == "prediction_mean_added") return WindowAction::prediction_mean_added;
  throw std::invalid_argument("unknown window action: " + name);
}

struct DetectionOutcome {
  std::size_t step_index = 0;
  double t = 0.0;
  double y = 0.0;
  double predicted_mean = 0.0;
  double predicted_variance = 0.0;
  bool is_anomaly = false;
  double score = 0.0;
  WindowAction window_action = WindowAction::observed_value_added;
  std::optional<double> qe;  // sgp-q only, when the drift test ran
  std::optional<double> ql;
};

// Online anomaly detector over a single scalar stream.  All four variants
// share the same skeleton per step: predict at the incoming time from the
// model fitted to the current window, classify, append either the observed
// value or the predicted mean, then retrain with the warm budget.  A step
// either completes fully or leaves the detector untouched.
class Detector {
 public:
  Detector(DetectorConfig config, OptimizerConfig optimizer, KernelSpec kernel,
           double noise_variance)
      : config_(std::move(config)),
        optimizer_(optimizer),
        kernel_(std::move(kernel)),
        noise_variance_(noise_variance),
        window_(config_.q),
        drift_(config_.drift_window, config_.drift_short_window) {
    validate_kernel(kernel_);
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
      throw std::invalid_argument("noise variance must be positive and finite");
    }
    if (config_.kind == DetectorKind::sgp_q && config_.inducing_count < 1) {
      throw std::invalid_argument("sgp-q needs at least one inducing point");
    }
  }

  // Seeds the window with the training segment and fits with the initial
  // budget.  Must be called exactly once before stepping.
  FitResult initialize(const TimeSeries& train) {
    if (initialized_) {
      throw std::logic_error("detector already initialized");
    }
    if (train.size() < 2) {
      throw std::invalid_argument("initial segment needs at least two points");
    }
    if (train.size() > config_.q) {
      throw std::invalid_argument("initial segment exceeds window capacity");
    }
    for (std::size_t i = 0; i < train.size(); ++i) {
      window_.append(train.time[i], train.value[i]);
    }
    const Eigen::MatrixXd x = window_.inputs();
    const Eigen::VectorXd y = window_.targets();
    if (config_.kind == DetectorKind::sgp_q) {
      const Eigen::Index m =
          std::min<Eigen::Index>(config_.inducing_count, x.rows());
      model_.emplace(std::in_place_type<SparseGp>, kernel_, noise_variance_,
                     init_inducing(x, m));
    } else {
      model_.emplace(std::in_place_type<ExactGp>, kernel_, noise_variance_);
    }
    FitResult fit_result = std::visit(
        [&](auto& model) {
          return fit(model, x, y, optimizer_, FitBudget::initial);
        },
        *model_);
    refresh_cache(x, y);
    initialized_ = true;
    return fit_result;
  }

  bool initialized() const { return initialized_; }
  const DetectorConfig& config() const { return config_; }
  const SlidingWindow& window() const { return window_; }
  const DriftStats& drift() const { return drift_; }

  Eigen::VectorXd model_parameters() const {
    require_model();
    return std::visit([](const auto& model) { return model.parameters(); },
                      *model_);
  }

  DetectionOutcome step(double t, double y) {
    require_model();
    if (!initialized_) {
      throw std::logic_error("detector used before initialize()");
    }
    if (!std::isfinite(t) || !std::isfinite(y)) {
      throw std::invalid_argument("detector step requires finite time and value");
    }

    // Snapshot everything a failed step could have touched.  The model's
    // factor cache is derived data: restoring parameters is enough, the next
    // predict call rebuilds it.
    const SlidingWindow window_snapshot = window_;
    const DriftStats drift_snapshot = drift_;
    const Eigen::VectorXd parameter_snapshot = model_parameters();
    try {
      DetectionOutcome outcome = step_impl(t, y);
      outcome.step_index = step_count_++;
      return outcome;
    } catch (...) {
      window_ = window_snapshot;
      drift_ = drift_snapshot;
      std::visit([&](auto& model) { model.set_parameters(parameter_snapshot); },
                 *model_);
      throw;
    }
  }

 private:
  void require_model() const {
    if (!model_.has_value()) {
      throw std::logic_error("detector used before initialize()");
    }
  }

  void refresh_cache(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    std::visit([&](auto& model) { model.refit(x, y, window_.generation()); },
               *model_);
  }

  PredictiveDistribution predict_at(double t) {
    Eigen::RowVectorXd x_star(1);
    x_star(0) = t;
    const Eigen::MatrixXd x = window_.inputs();
    const Eigen::VectorXd y = window_.targets();
    return std::visit(
        [&](auto& model) {
          return model.predict(x, y, x_star, window_.generation());
        },
        *model_);
  }

  DetectionOutcome step_impl(double t, double y) {
    const PredictiveDistribution pred = predict_at(t);
    const double sd = std::sqrt(pred.variance);
    const double deviation = std::abs(y - pred.mean);

    DetectionOutcome outcome;
    outcome.t = t;
    outcome.y = y;
    outcome.predicted_mean = pred.mean;
    outcome.predicted_variance = pred.variance;

    bool substitute = false;
    switch (config_.kind) {
      case DetectorKind::gpr_ad:
      case DetectorKind::gpr_adam: {
        outcome.is_anomaly = deviation > kIntervalZ * sd;
        outcome.score = deviation - kIntervalZ * sd;
        substitute =
            outcome.is_anomaly && config_.kind == DetectorKind::gpr_adam;
        break;
      }
      case DetectorKind::gpr_iadam: {
        outcome.is_anomaly = deviation > kIntervalZ * sd;
        outcome.score = beta_score(y, pred.mean, sd);
        substitute = outcome.is_anomaly && outcome.score <= config_.beta_max;
        break;
      }
      case DetectorKind::sgp_q: {
        const double likelihood = gaussian_likelihood(y, pred.mean, pred.variance);
        outcome.is_anomaly = likelihood < config_.epsilon_p;
        outcome.score = likelihood;
        // Every point feeds the drift history, anomalous or not, and does so
        // before the drift test below looks at it.
        drift_.update(deviation, likelihood);
        if (outcome.is_anomaly) {
          if (drift_.size() >= 2) {
            const QScores scores = drift_.q_scores();
            outcome.qe = scores.extended;
            outcome.ql = scores.local;
            substitute = scores.extended <= config_.epsilon_e ||
                         scores.local <= config_.epsilon_l;
          } else {
            // Too little history to tell drift from an isolated artifact;
            // protect the window.
            substitute = true;
          }
        }
        break;
      }
    }

    outcome.window_action = substitute ? WindowAction::prediction_mean_added
                                       : WindowAction::observed_value_added;
    window_.append(t, substitute ? pred.mean : y);

    const Eigen::MatrixXd x = window_.inputs();
    const Eigen::VectorXd targets = window_.targets();
    std::visit(
        [&](auto& model) {
          fit(model, x, targets, optimizer_, FitBudget::warm);
        },
        *model_);
    refresh_cache(x, targets);
    return outcome;
  }

  DetectorConfig config_;
  OptimizerConfig optimizer_;
  KernelSpec kernel_;
  double noise_variance_;
  SlidingWindow window_;
  DriftStats drift_;
  std::optional<std::variant<ExactGp, SparseGp>> model_;
  bool initialized_ = false;
  std::size_t step_count_ = 0;
};

struct StreamResult {
  std::vector<DetectionOutcome> outcomes;
  FitResult initial_fit;
  std::optional<std::string> error;  // set when the stream stopped early

  bool ok() const { return !error.has_value(); }
};

// Drives a detector over a test series point by point.  On failure the
// outcomes gathered so far are returned together with the error text.
inline StreamResult run_stream(Detector& detector, const TimeSeries& train,
                               const TimeSeries& test) {
  StreamResult result;
  try {
    result.initial_fit = detector.initialize(train);
  } catch (const std::exception& e) {
    result.error = std::string("initial fit failed: ") + e.what();
    return result;
  }
  result.outcomes.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    try {
      result.outcomes.push_back(detector.step(test.time[i], test.value[i]));
    } catch (const std::exception& e) {
      result.error = "step " + std::to_string(i) + " failed: " + e.what();
      break;
    }
  }
  return result;
}

inline EvalReport score(const std::vector<DetectionOutcome>& outcomes,
                        const std::vector<int>& labels) {
  std::vector<int> predicted;
  predicted.reserve(outcomes.size());
  for (const DetectionOutcome& o : outcomes) {
    predicted.push_back(o.is_anomaly ? 1 : 0);
  }
  return score(predicted, labels);
}

inline const std::vector<double>& default_threshold_grid() {
  static const std::vector<double> grid = {1e-6, 1e-5, 1e-4, 1e-3,
                                           1e-2, 0.05, 0.1,  0.2};
  return grid;
}

// Picks the likelihood threshold for sgp-q by running the full pipeline on a
// labeled validation series once per candidate and keeping the value with the
// best pointwise F1.  Ties resolve to the smallest candidate.  The first
// train_len points seed the window; the rest are streamed and scored.
inline double select_threshold(const TimeSeries& validation,
                               const std::vector<double>& grid,
                               const DetectorConfig& config,
                               const OptimizerConfig& optimizer,
                               const KernelSpec& kernel, double noise_variance,
                               std::size_t train_len) {
  if (grid.empty()) {
    throw std::invalid_argument("threshold grid is empty");
  }
  if (!validation.labels.has_value()) {
    throw std::invalid_argument("threshold selection needs a labeled series");
  }
  auto [train, test] = initial_split(validation, SplitSpec{train_len});
  const std::vector<int>& test_labels = *test.labels;

  std::vector<double> candidates = grid;
  std::sort(candidates.begin(), candidates.end());
  double best_threshold = candidates.front();
  double best_f1 = -1.0;
  for (double threshold : candidates) {
    DetectorConfig trial = config;
    trial.kind = DetectorKind::sgp_q;
    trial.epsilon_p = threshold;
    Detector detector(trial, optimizer, kernel, noise_variance);
    const StreamResult result = run_stream(detector, train, test);
    double f1 = 0.0;
    if (result.ok()) {
      f1 = score(result.outcomes, test_labels).f1;
    }
    if (f1 > best_f1) {
      best_f1 = f1;
      best_threshold = threshold;
    }
  }
  return best_threshold;
}

}  // namespace gpad
