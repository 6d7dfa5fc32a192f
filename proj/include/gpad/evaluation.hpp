#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gpad {

// Pointwise confusion counts and the derived precision / recall / F1.
// True negatives are not tracked — none of the derived metrics need them.
struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Scores binary predictions against binary labels, one point at a time.
// Degenerate denominators (no predicted positives, no actual positives, or
// precision + recall = 0) report the affected quantity as 0 rather than NaN.
inline EvalReport score(const std::vector<int>& predicted,
                        const std::vector<int>& labels) {
  if (predicted.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  EvalReport report;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = labels[i] != 0;
    if (p && a) {
      ++report.true_positives;
    } else if (p && !a) {
      ++report.false_positives;
    } else if (!p && a) {
      ++report.false_negatives;
    }
  }
  const double tp = static_cast<double>(report.true_positives);
  const double fp = static_cast<double>(report.false_positives);
  const double fn = static_cast<double>(report.false_negatives);
  if (tp + fp > 0.0) {
    report.precision = tp / (tp + fp);
  }
  if (tp + fn > 0.0) {
    report.recall = tp / (tp + fn);
  }
  if (report.precision + report.recall > 0.0) {
    report.f1 = 2.0 * report.precision * report.recall /
                (report.precision + report.recall);
  }
  return report;
}

// Mean and sample standard deviation across repeated runs.
struct RunAggregate {
  std::size_t runs = 0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // n-1 denominator; 0 for a single run
  double mean_precision = 0.0;
  double mean_recall = 0.0;
};

inline RunAggregate aggregate_runs(const std::vector<EvalReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("cannot aggregate zero runs");
  }
  RunAggregate agg;
  agg.runs = reports.size();
  for (const EvalReport& r : reports) {
    agg.mean_f1 += r.f1;
    agg.mean_precision += r.precision;
    agg.mean_recall += r.recall;
  }
  const double n = static_cast<double>(reports.size());
  agg.mean_f1 /= n;
  agg.mean_precision /= n;
  agg.mean_recall /= n;
  if (reports.size() > 1) {
    double ss = 0.0;
    for (const EvalReport& r : reports) {
      ss += (r.f1 - agg.mean_f1) * (r.f1 - agg.mean_f1);
    }
    agg.std_f1 = std::sqrt(ss / (n - 1.0));
  }
  return agg;
}

}  // namespace gpad
