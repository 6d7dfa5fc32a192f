// Acceptance gate: ten numbered end-to-end checks, one PASS/FAIL line each.
//
//   acceptance            runs every criterion
//   acceptance --only N   runs criterion N (repeatable)
//
// Exit status is the number of failed criteria (0 on full success).  Heavy
// criteria (7, 8, 10) write their experiment artifacts under
// ./acceptance_artifacts (override with GPAD_ACCEPTANCE_DIR) so the
// determinism check can compare byte-for-byte against a fresh rerun.

#include <gpad/harness.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace gpad;
using Clock = std::chrono::steady_clock;

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
  char buffer[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  va_end(args);
  return buffer;
}

std::filesystem::path artifact_root() {
  if (const char* dir = std::getenv("GPAD_ACCEPTANCE_DIR")) {
    return dir;
  }
  return "acceptance_artifacts";
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// ---------------------------------------------------------------------------
// Random small regression instances shared by criteria 1-3.

struct Instance {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  KernelSpec kernel;
  double noise_variance = 0.1;
};

// Input grid pitch.  Points sit anywhere in the first 60% of their slot, so
// random instances keep a guaranteed minimum gap of 0.4 * kGridPitch; with
// the short lengthscales below, covariance matrices stay well enough
// conditioned that results are trustworthy at the criterion tolerances.
constexpr double kGridPitch = 0.25;

KernelSpec random_rbf_linear(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RbfKernel rbf{0.5 + 1.5 * unit(rng), 0.15 + 0.2 * unit(rng)};
  LinearKernel linear{Eigen::VectorXd::Constant(1, 0.1 + 0.9 * unit(rng))};
  SumKernel sum;
  sum.children.push_back(KernelSpec{rbf});
  sum.children.push_back(KernelSpec{linear});
  return KernelSpec{sum};
}

Instance random_instance(std::mt19937_64& rng, int max_n, int min_n = 5) {
  std::uniform_int_distribution<int> size(min_n, max_n);
  std::uniform_real_distribution<double> slot(0.0, 0.6);
  std::normal_distribution<double> noise(0.0, 0.2);
  Instance inst;
  const int n = size(rng);
  inst.x.resize(n, 1);
  inst.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = (i + slot(rng)) * kGridPitch;
    inst.x(i, 0) = t;
    inst.y(i) = std::sin(1.7 * t) + 0.3 * t + noise(rng);
  }
  inst.kernel = random_rbf_linear(rng);
  std::uniform_real_distribution<double> nv(0.02, 0.3);
  inst.noise_variance = nv(rng);
  return inst;
}

double input_span(const Instance& inst) {
  return inst.x.col(0).maxCoeff() - inst.x.col(0).minCoeff();
}

Eigen::MatrixXd random_inducing(std::mt19937_64& rng, int m, double span) {
  std::uniform_real_distribution<double> input(0.0, span);
  Eigen::MatrixXd z(m, 1);
  for (int i = 0; i < m; ++i) {
    z(i, 0) = input(rng);
  }
  return z;
}

// Inducing inputs on their own jittered grid, for the gradient check: a
// guaranteed separation keeps K_mm far from the conditioning guard, so the
// objective is smooth across the finite-difference stencil.
Eigen::MatrixXd spread_inducing(std::mt19937_64& rng, int m, double span) {
  std::uniform_real_distribution<double> slot(0.0, 0.6);
  Eigen::MatrixXd z(m, 1);
  for (int i = 0; i < m; ++i) {
    z(i, 0) = (i + slot(rng)) * span / m;
  }
  return z;
}

// ---------------------------------------------------------------------------
// Criterion 1: with Z = X the variational objective and predictions collapse
// to the exact GP.

CriterionResult criterion_equivalence() {
  std::mt19937_64 rng(101);
  const auto start = Clock::now();
  double worst_objective = 0.0;
  double worst_prediction = 0.0;
  for (int i = 0; i < 50; ++i) {
    Instance inst = random_instance(rng, 30);
    std::uniform_real_distribution<double> test_point(-0.5,
                                                      input_span(inst) + 0.5);
    ExactGp exact(inst.kernel, inst.noise_variance);
    SparseGp sparse(inst.kernel, inst.noise_variance, inst.x);

    const double lml = exact.objective(inst.x, inst.y);
    const double elbo = sparse.objective(inst.x, inst.y);
    worst_objective =
        std::max(worst_objective, std::abs(elbo - lml) / std::abs(lml));

    for (int p = 0; p < 5; ++p) {
      Eigen::RowVectorXd xs(1);
      xs << test_point(rng);
      const PredictiveDistribution a = exact.predict(inst.x, inst.y, xs);
      const PredictiveDistribution b = sparse.predict(inst.x, inst.y, xs);
      worst_prediction = std::max(
          worst_prediction,
          std::abs(a.mean - b.mean) / std::max(1.0, std::abs(a.mean)));
      worst_prediction = std::max(
          worst_prediction,
          std::abs(a.variance - b.variance) / std::max(1.0, a.variance));
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass =
      worst_objective < 1e-6 && worst_prediction < 1e-6 && elapsed < 5.0;
  return {pass,
          format("Z=X collapse over 50 instances: max objective rel diff "
                 "%.3g (< 1e-6), max prediction rel diff %.3g (< 1e-6), "
                 "%.2f s (< 5 s)",
                 worst_objective, worst_prediction, elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 2: the variational objective never exceeds the exact log marginal
// likelihood.

CriterionResult criterion_lower_bound() {
  std::mt19937_64 rng(202);
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    Instance inst = random_instance(rng, 40, 10);
    const int n = static_cast<int>(inst.x.rows());
    std::uniform_int_distribution<int> m_dist(2, n - 1);
    const Eigen::MatrixXd z =
        random_inducing(rng, m_dist(rng), input_span(inst));

    ExactGp exact(inst.kernel, inst.noise_variance);
    SparseGp sparse(inst.kernel, inst.noise_variance, z);
    const double gap =
        sparse.objective(inst.x, inst.y) - exact.objective(inst.x, inst.y);
    worst_gap = std::max(worst_gap, gap);
  }
  const bool pass = worst_gap <= 1e-8;
  return {pass, format("bound over 100 instances with M < N: max "
                       "(ELBO - LML) = %.3g (<= 1e-8)",
                       worst_gap)};
}

// ---------------------------------------------------------------------------
// Criterion 3: analytic gradients of both objectives agree with central
// finite differences, inducing coordinates included.

template <typename Model>
double max_gradient_error(Model& model, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y) {
  const auto [value, grad] = model.objective_with_gradient(x, y);
  (void)value;
  const Eigen::VectorXd u = model.parameters();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(u(j)));
    Eigen::VectorXd up = u, down = u;
    up(j) += h;
    down(j) -= h;
    model.set_parameters(up);
    const double f_up = model.objective(x, y);
    model.set_parameters(down);
    const double f_down = model.objective(x, y);
    model.set_parameters(u);
    const double fd = (f_up - f_down) / (2.0 * h);
    const double scale = std::max({std::abs(grad(j)), std::abs(fd), 1e-6});
    worst = std::max(worst, std::abs(grad(j) - fd) / scale);
  }
  return worst;
}

CriterionResult criterion_gradients() {
  std::mt19937_64 rng(303);
  double worst_exact = 0.0;
  double worst_sparse = 0.0;
  for (int i = 0; i < 20; ++i) {
    Instance inst = random_instance(rng, 20, 8);
    ExactGp exact(inst.kernel, inst.noise_variance);
    worst_exact =
        std::max(worst_exact, max_gradient_error(exact, inst.x, inst.y));

    std::uniform_int_distribution<int> m_dist(3, 7);
    SparseGp sparse(inst.kernel, inst.noise_variance,
                    spread_inducing(rng, m_dist(rng), input_span(inst)));
    worst_sparse =
        std::max(worst_sparse, max_gradient_error(sparse, inst.x, inst.y));
  }
  const bool pass = worst_exact < 1e-4 && worst_sparse < 1e-4;
  return {pass,
          format("central differences over 20 instances: max rel error "
                 "%.3g exact, %.3g variational incl. inducing coords "
                 "(< 1e-4)",
                 worst_exact, worst_sparse)};
}

// ---------------------------------------------------------------------------
// Criterion 4: two-exponential tail approximation identities.

CriterionResult criterion_q_function() {
  const double at_zero = std::abs(modified_q(0.0) - 2.0 / 3.0);
  if (at_zero > 1e-12) {
    return {false, format("Q(0) off by %.3g", at_zero)};
  }
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> sample(0.0, 10.0);
  double worst_even = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = sample(rng);
    worst_even = std::max(worst_even,
                          std::abs(modified_q(x) - modified_q(-x)));
  }
  bool decreasing = true;
  double previous = modified_q(0.0);
  for (int i = 1; i < 100; ++i) {
    const double current = modified_q(10.0 * i / 99.0);
    if (!(current < previous)) {
      decreasing = false;
      break;
    }
    previous = current;
  }
  const bool pass = worst_even <= 1e-12 && decreasing;
  return {pass, format("Q(0)=2/3 within %.3g, even within %.3g over 1000 "
                       "points, strictly decreasing on 100-point grid [0,10]: "
                       "%s",
                       at_zero, worst_even, decreasing ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// Criterion 5: score primitives against a high-precision oracle and fixed
// confusion examples.

long double oracle_beta(long double y, long double mean, long double sd) {
  const long double dev = fabsl(mean - y) / sd;
  const long double z = 1.96L - dev;
  return 0.5L * erfcl(-z / sqrtl(2.0L));
}

long double oracle_density(long double y, long double mean,
                           long double variance) {
  const long double two_pi = 6.283185307179586476925286766559L;
  const long double d = y - mean;
  return expl(-0.5L * d * d / variance) / sqrtl(two_pi * variance);
}

CriterionResult criterion_score_oracles() {
  // Spot values frozen from an arbitrary-precision evaluation.
  struct Spot {
    double got;
    double want;
  };
  const Spot spots[] = {
      {beta_score(1.0, 1.0, 0.5), 0.97500210485177957},
      {beta_score(2.5, 0.0, 1.0), 0.29459851621569803},
      {gaussian_likelihood(1.0, 1.0, 1.0), 0.39894228040143268},
      {gaussian_likelihood(2.0, 1.0, 1.0), 0.24197072451914335},
      {gaussian_likelihood(0.0, 3.0, 4.0), 0.064758797832945864},
  };
  double worst_spot = 0.0;
  for (const Spot& s : spots) {
    worst_spot = std::max(worst_spot, std::abs(s.got - s.want));
  }

  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> mean_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> offset(-4.0, 4.0);
  std::uniform_real_distribution<double> sd_dist(0.1, 2.0);
  std::uniform_real_distribution<double> var_dist(0.01, 4.0);
  double worst_beta = 0.0;
  double worst_density = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double mean = mean_dist(rng);
    const double sd = sd_dist(rng);
    const double y = mean + offset(rng) * sd;
    const double beta = beta_score(y, mean, sd);
    worst_beta = std::max(
        worst_beta,
        std::abs(beta - static_cast<double>(oracle_beta(y, mean, sd))));

    const double variance = var_dist(rng);
    const double lik = gaussian_likelihood(y, mean, variance);
    const long double ref = oracle_density(y, mean, variance);
    worst_density = std::max(
        worst_density, std::abs(lik - static_cast<double>(ref)) /
                           std::max(1.0, static_cast<double>(ref)));
  }

  // Hand-computed confusion examples must come out exact.  The ratio checks
  // use examples whose precision/recall/F1 are dyadic rationals, so the
  // hand-derived values are exactly representable.
  const EvalReport mixed =
      score(std::vector<int>{1, 1, 1, 0, 0, 0, 0, 0, 1, 0},
            std::vector<int>{1, 1, 1, 1, 1, 1, 1, 1, 0, 0});
  const bool confusion_ok =
      mixed.true_positives == 3 && mixed.false_positives == 1 &&
      mixed.false_negatives == 5 && mixed.precision == 0.75 &&
      mixed.recall == 0.375 && mixed.f1 == 0.5;
  const EvalReport perfect =
      score(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1});
  const bool perfect_ok = perfect.true_positives == 2 &&
                          perfect.precision == 1.0 && perfect.recall == 1.0 &&
                          perfect.f1 == 1.0;
  const EvalReport empty = score(std::vector<int>{0, 0}, std::vector<int>{0, 0});
  const bool degenerate_ok = perfect_ok && empty.precision == 0.0 &&
                             empty.recall == 0.0 && empty.f1 == 0.0;

  const bool pass = worst_spot <= 1e-12 && worst_beta <= 1e-10 &&
                    worst_density <= 1e-10 && confusion_ok && degenerate_ok;
  return {pass,
          format("1000 random inputs: beta within %.3g, density within %.3g "
                 "(<= 1e-10); frozen spot values within %.3g; confusion "
                 "examples %s",
                 worst_beta, worst_density, worst_spot,
                 confusion_ok && degenerate_ok ? "exact" : "WRONG")};
}

// ---------------------------------------------------------------------------
// Criterion 6: one warm fit+predict step at growing window sizes; the
// variational model's cost grows like N while the exact model grows like N^3.

double time_step(const std::function<void()>& body) {
  std::vector<double> samples;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = Clock::now();
    body();
    samples.push_back(seconds_since(start));
  }
  std::sort(samples.begin(), samples.end());
  return samples[1];
}

CriterionResult criterion_scaling() {
  const auto start = Clock::now();
  SynthSpec spec;
  spec.kind = SynthKind::spike;  // no spikes listed: a clean daily pattern
  spec.length = 1100;
  spec.points_per_day = 288;
  spec.amplitude = 1.0;
  spec.noise_sd = 0.05;
  const TimeSeries series = synth_stream(spec, 606);

  OptimizerConfig optimizer;
  optimizer.warm_iterations = 10;
  std::map<int, double> sgp_time, exact_time;
  for (const int q : {250, 500, 1000}) {
    Eigen::MatrixXd x(q, 1);
    Eigen::VectorXd y(q);
    for (int i = 0; i < q; ++i) {
      x(i, 0) = series.time[series.size() - q + i];
      y(i) = series.value[series.size() - q + i];
    }
    const KernelSpec kernel = materialize_kernel(KernelDescription{}, x, y);
    const double noise = scale_defaults(x, y).noise_variance;
    Eigen::RowVectorXd xs(1);
    xs << x(q - 1, 0) + 0.05;

    sgp_time[q] = time_step([&] {
      SparseGp model(kernel, noise, init_inducing(x, 100));
      fit(model, x, y, optimizer, FitBudget::warm);
      model.predict(x, y, xs);
    });
    exact_time[q] = time_step([&] {
      ExactGp model(kernel, noise);
      fit(model, x, y, optimizer, FitBudget::warm);
      model.predict(x, y, xs);
    });
  }
  const double sgp_ratio = sgp_time[1000] / sgp_time[250];
  const double exact_ratio = exact_time[1000] / exact_time[250];
  const double elapsed = seconds_since(start);
  const bool pass = sgp_ratio < 8.0 && exact_ratio > sgp_ratio &&
                    elapsed < 300.0;
  return {pass,
          format("M=100 warm step: variational %.0f/%.0f/%.0f ms, exact "
                 "%.0f/%.0f/%.0f ms at q=250/500/1000; ratios %.2f (< 8) vs "
                 "%.2f (must exceed), %.0f s (< 300 s)",
                 1e3 * sgp_time[250], 1e3 * sgp_time[500],
                 1e3 * sgp_time[1000], 1e3 * exact_time[250],
                 1e3 * exact_time[500], 1e3 * exact_time[1000], sgp_ratio,
                 exact_ratio, elapsed)};
}

// ---------------------------------------------------------------------------
// Experiment configs shared by criteria 7, 8, and 10.  The JSON text is the
// fingerprint stored next to each artifact so reruns can tell whether an
// existing artifact matches the current config.
//
// The level-shift stream pairs a strong daily pattern with small observation
// noise so both drift streams operate in their self-accepting regime: the
// 10-sample-std shift is ~20 in absolute units (absolute error scale >> 1)
// while predictive densities sit near 10 (likelihood scale >> 1).  576
// points/day keeps the 400-point window under one day, so the shift never
// collides with same-phase history inside the window.

constexpr const char* kLevelShiftSgpqConfig = R"({
  "dataset": {"synth": {"kind": "level_shift_drift", "length": 2000, "points_per_day": 576, "amplitude": 2.83, "noise_sd": 0.03, "magnitude": 10.0, "anomaly_start": 1200, "anomaly_span": 100}},
  "detector": {"kind": "sgp-q", "q": 400, "M": 50, "W": 200, "W_short": 10, "epsilon_p": 0.001},
  "optimizer": {"initial_iterations": 300, "warm_iterations": 10, "step_size": 0.1},
  "split": {"initial_train_len": 400},
  "repeats": 1,
  "seed": 123
})";

constexpr const char* kLevelShiftAdamConfig = R"({
  "dataset": {"synth": {"kind": "level_shift_drift", "length": 2000, "points_per_day": 576, "amplitude": 2.83, "noise_sd": 0.03, "magnitude": 10.0, "anomaly_start": 1200, "anomaly_span": 100}},
  "detector": {"kind": "gpr-adam", "q": 400},
  "optimizer": {"initial_iterations": 300, "warm_iterations": 10, "step_size": 0.1},
  "split": {"initial_train_len": 400},
  "repeats": 1,
  "seed": 123
})";

constexpr const char* kDailySpikesConfig = R"({
  "dataset": {"synth": {"kind": "spike", "length": 1440, "points_per_day": 288, "amplitude": 1.0, "noise_sd": 0.05, "magnitude": 8.0, "spike_indices": [480, 700, 900, 1100, 1300]}},
  "detector": {"kind": "sgp-q", "q": 288, "M": 64, "W": 288, "W_short": 10},
  "optimizer": {"initial_iterations": 300, "warm_iterations": 10, "step_size": 0.05},
  "split": {"initial_train_len": 288},
  "validation": {"begin": 400, "end": 520, "noise_scale": 0.1, "train_len": 60},
  "repeats": 5,
  "seed": 42
})";

// Both level-shift streams feed the detector from index 400 onward.
constexpr int kLevelShiftTrain = 400;

ExperimentResult run_config_into(const std::string& config_text,
                                 const std::filesystem::path& dir) {
  std::filesystem::remove_all(dir);
  ExperimentConfig config =
      parse_experiment_config(nlohmann::json::parse(config_text));
  config.output_dir = dir;
  const ExperimentResult result = run_experiment(config);
  atomic_write_file(dir / "config.json", config_text);
  return result;
}

// Reuse an existing artifact only when it was produced from this exact
// config text; otherwise run fresh.
void ensure_artifact(const std::string& config_text,
                     const std::filesystem::path& dir) {
  std::error_code ec;
  if (std::filesystem::exists(dir / "summary.json", ec) &&
      std::filesystem::exists(dir / "config.json", ec) &&
      slurp(dir / "config.json") == config_text) {
    return;
  }
  run_config_into(config_text, dir);
}

std::vector<bool> flags_by_series_index(const std::filesystem::path& trace,
                                        int train_len, int length) {
  std::vector<bool> flagged(length, false);
  for (const DetectionOutcome& outcome : read_trace_csv(trace)) {
    const int index = static_cast<int>(outcome.step_index) + train_len;
    if (index >= 0 && index < length) {
      flagged[index] = outcome.is_anomaly;
    }
  }
  return flagged;
}

// ---------------------------------------------------------------------------
// Criterion 7: after a persistent level shift the drift-gated detector stops
// flagging quickly while the always-substituting detector keeps flagging.

CriterionResult criterion_drift_adaptation() {
  const auto start = Clock::now();
  const std::filesystem::path root = artifact_root();
  const ExperimentResult sgpq =
      run_config_into(kLevelShiftSgpqConfig, root / "c7_sgpq_a");
  const ExperimentResult adam =
      run_config_into(kLevelShiftAdamConfig, root / "c7_adam_a");
  if (!sgpq.all_ok() || !adam.all_ok()) {
    return {false, "level-shift experiment failed: " +
                       (sgpq.all_ok() ? adam.repeats[0].error
                                      : sgpq.repeats[0].error)};
  }

  const std::vector<bool> sgpq_flags = flags_by_series_index(
      root / "c7_sgpq_a" / sgpq.repeats[0].trace_file, kLevelShiftTrain, 2000);
  const std::vector<bool> adam_flags = flags_by_series_index(
      root / "c7_adam_a" / adam.repeats[0].trace_file, kLevelShiftTrain, 2000);

  // "Stops flagging within 30 points": a full short-window length (10 points)
  // with no flags must begin at or before index 1230.
  int stop_at = -1;
  for (int a = 1200; a + 10 <= 2000; ++a) {
    bool clean = true;
    for (int i = a; i < a + 10; ++i) {
      clean = clean && !sgpq_flags[i];
    }
    if (clean) {
      stop_at = a;
      break;
    }
  }
  int sgpq_tail = 0, adam_tail = 0;
  for (int i = 1300; i < 2000; ++i) {
    sgpq_tail += sgpq_flags[i];
    adam_tail += adam_flags[i];
  }
  const double sgpq_rate = sgpq_tail / 700.0;
  const double adam_rate = adam_tail / 700.0;
  const double elapsed = seconds_since(start);

  const bool pass = stop_at >= 0 && stop_at <= 1230 && sgpq_rate < 0.05 &&
                    adam_rate >= 0.90 && elapsed < 600.0;
  return {pass,
          format("10-std shift at 1200: drift-gated detector stops at %d "
                 "(<= 1230) and flags %.1f%% of [1300,2000) (< 5%%); "
                 "substituting detector flags %.1f%% (>= 90%%); %.0f s "
                 "(< 600 s)",
                 stop_at, 100.0 * sgpq_rate, 100.0 * adam_rate, elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 8: five 8-sample-std spikes on a daily pattern, five seeded
// repeats, mean pointwise F1 at least 0.8.

CriterionResult criterion_spike_f1() {
  const auto start = Clock::now();
  const ExperimentResult result =
      run_config_into(kDailySpikesConfig, artifact_root() / "c8_a");
  std::size_t ok = 0;
  for (const RepeatResult& repeat : result.repeats) {
    ok += repeat.ok;
  }
  if (!result.aggregate.has_value()) {
    return {false, "no spike repeat succeeded"};
  }
  const double mean_f1 = result.aggregate->mean_f1;
  const double elapsed = seconds_since(start);
  const bool pass = ok == 5 && mean_f1 >= 0.8;
  return {pass, format("5 spikes of 8 sample std, 5 seeded repeats: %zu/5 "
                       "runs ok, mean F1 %.3f (>= 0.8), std %.3f, %.0f s",
                       ok, mean_f1, result.aggregate->std_f1, elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 9: optional benchmark-corpus comparison; non-binding by design.

CriterionResult criterion_benchmark_corpus() {
  std::filesystem::path corpus = "data/nab";
  if (const char* dir = std::getenv("GPAD_NAB_DIR")) {
    corpus = dir;
  }
  const std::filesystem::path series = corpus / "art_daily_jumpsup.csv";
  if (!std::filesystem::exists(series)) {
    return {true, "benchmark corpus not supplied (" + series.string() +
                      " absent); comparison skipped - non-binding"};
  }
  try {
    ExperimentConfig config =
        parse_experiment_config(nlohmann::json::parse(kDailySpikesConfig));
    config.dataset.synth.reset();
    config.dataset.path = series;
    const std::filesystem::path labels =
        corpus / "art_daily_jumpsup_labels.csv";
    if (std::filesystem::exists(labels)) {
      config.dataset.labels = labels;
    }
    config.validation.reset();
    config.repeats = 1;
    config.output_dir = artifact_root() / "c9_nab";
    const ExperimentResult result = run_experiment(config);
    if (!result.aggregate.has_value()) {
      return {true, "benchmark run failed (" + result.repeats[0].error +
                        "); reported, non-binding"};
    }
    return {true, format("benchmark F1 %.3f on art_daily_jumpsup "
                         "(reference 0.992); reported, non-binding",
                         result.aggregate->mean_f1)};
  } catch (const std::exception& e) {
    return {true, std::string("benchmark attempt raised: ") + e.what() +
                      "; reported, non-binding"};
  }
}

// ---------------------------------------------------------------------------
// Criterion 10: rerunning the criterion-7 and criterion-8 experiments with
// identical configs reproduces the summary files byte for byte.

CriterionResult criterion_determinism() {
  const std::filesystem::path root = artifact_root();
  struct Pair {
    const char* name;
    const char* config;
  };
  const Pair pairs[] = {
      {"c7_sgpq", kLevelShiftSgpqConfig},
      {"c7_adam", kLevelShiftAdamConfig},
      {"c8", kDailySpikesConfig},
  };
  bool summaries_ok = true;
  bool traces_ok = true;
  std::string mismatches;
  for (const Pair& pair : pairs) {
    const std::filesystem::path a = root / (std::string(pair.name) + "_a");
    const std::filesystem::path b = root / (std::string(pair.name) + "_b");
    ensure_artifact(pair.config, a);
    const ExperimentResult rerun = run_config_into(pair.config, b);
    if (slurp(a / "summary.json") != slurp(b / "summary.json")) {
      summaries_ok = false;
      mismatches += std::string(" ") + pair.name + ":summary";
    }
    for (const RepeatResult& repeat : rerun.repeats) {
      if (!repeat.trace_file.empty() &&
          slurp(a / repeat.trace_file) != slurp(b / repeat.trace_file)) {
        traces_ok = false;
        mismatches += std::string(" ") + pair.name + ":" + repeat.trace_file;
      }
    }
  }
  if (summaries_ok && traces_ok) {
    return {true, "level-shift and spike experiments rerun: summaries and "
                  "traces byte-identical"};
  }
  if (summaries_ok) {
    return {false, "summaries byte-identical but traces differ:" + mismatches};
  }
  return {false, "rerun produced different bytes:" + mismatches};
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  CriterionResult (*run)();
};

const Criterion kCriteria[] = {
    {1, criterion_equivalence},   {2, criterion_lower_bound},
    {3, criterion_gradients},     {4, criterion_q_function},
    {5, criterion_score_oracles}, {6, criterion_scaling},
    {7, criterion_drift_adaptation}, {8, criterion_spike_f1},
    {9, criterion_benchmark_corpus}, {10, criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--only N]...\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& criterion : kCriteria) {
    if (!only.empty() && only.count(criterion.id) == 0) {
      continue;
    }
    CriterionResult result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result = {false, std::string("unexpected exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s\n", result.pass ? "PASS" : "FAIL",
                criterion.id, result.detail.c_str());
    std::fflush(stdout);
    failures += result.pass ? 0 : 1;
  }
  return failures;
}
