#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gpad {

// A univariate series on the quantized time axis.  `time` holds the
// within-day timestamp encoding (see quantize_timestamp); `labels`, when
// present, aligns with `value` and marks abnormal points with 1.
struct TimeSeries {
  std::vector<double> time;
  std::vector<double> value;
  std::optional<std::vector<int>> labels;
  std::string source_name;

  std::size_t size() const { return value.size(); }
};

// ---------------------------------------------------------------------------
// Timestamp quantization

namespace detail {

// (60 h + m + s/60) * 0.01 — shared by the parser and the synthesizer so a
// generated file re-parses to bit-identical time values.
inline double quantize_seconds_of_day(long seconds) {
  const long h = seconds / 3600;
  const long m = (seconds % 3600) / 60;
  const long s = seconds % 60;
  return (60.0 * static_cast<double>(h) + static_cast<double>(m) +
          static_cast<double>(s) / 60.0) *
         0.01;
}

inline bool all_digits(const std::string& text, std::size_t from,
                       std::size_t count) {
  for (std::size_t i = from; i < from + count; ++i) {
    if (text[i] < '0' || text[i] > '9') {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Maps "YYYY-MM-DD hh:mm:ss" to (60 h + m + s/60) * 0.01: minutes since the
// day's midnight, scaled by 0.01.  The date is intentionally discarded — the
// encoding is periodic with a one-day period, which is what lets a daily
// pattern be modeled by a kernel over this single input.
inline double quantize_timestamp(const std::string& ts) {
  const auto fail = [&ts]() {
    throw std::invalid_argument("malformed timestamp '" + ts +
                                "' (expected YYYY-MM-DD hh:mm:ss)");
  };
  if (ts.size() != 19 || ts[4] != '-' || ts[7] != '-' || ts[10] != ' ' ||
      ts[13] != ':' || ts[16] != ':') {
    fail();
  }
  if (!detail::all_digits(ts, 0, 4) || !detail::all_digits(ts, 5, 2) ||
      !detail::all_digits(ts, 8, 2) || !detail::all_digits(ts, 11, 2) ||
      !detail::all_digits(ts, 14, 2) || !detail::all_digits(ts, 17, 2)) {
    fail();
  }
  const int month = std::stoi(ts.substr(5, 2));
  const int day = std::stoi(ts.substr(8, 2));
  const long hh = std::stol(ts.substr(11, 2));
  const long mm = std::stol(ts.substr(14, 2));
  const long ss = std::stol(ts.substr(17, 2));
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 ||
      ss > 59) {
    fail();
  }
  return detail::quantize_seconds_of_day(hh * 3600 + mm * 60 + ss);
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return line;
}

inline double parse_value(const std::string& text, std::size_t row) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row) +
                             ": non-numeric value '" + text + "'");
  }
  if (used != text.size()) {
    throw std::runtime_error("row " + std::to_string(row) +
                             ": trailing garbage in value '" + text + "'");
  }
  return value;
}

}  // namespace detail

// Reads a header-first CSV with a "timestamp" column and the named value
// column.  Raw timestamps must be strictly increasing (the ISO format makes
// that a plain string comparison).  Errors carry 1-based row numbers, the
// header being row 1.
inline TimeSeries load_series_csv(const std::filesystem::path& path,
                                  const std::string& value_column = "value") {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(file, line)) {
    throw std::runtime_error(path.string() + " is empty");
  }
  const std::vector<std::string> header =
      detail::split_csv_row(detail::strip_cr(line));
  std::ptrdiff_t ts_col = -1, val_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "timestamp") {
      ts_col = static_cast<std::ptrdiff_t>(i);
    }
    if (header[i] == value_column) {
      val_col = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (ts_col < 0) {
    throw std::runtime_error(path.string() + ": no 'timestamp' column");
  }
  if (val_col < 0) {
    throw std::runtime_error(path.string() + ": no '" + value_column +
                             "' column");
  }

  TimeSeries series;
  series.source_name = path.stem().string();
  std::string previous_ts;
  std::size_t row = 1;
  while (std::getline(file, line)) {
    ++row;
    line = detail::strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = detail::split_csv_row(line);
    const auto need = static_cast<std::size_t>(std::max(ts_col, val_col));
    if (fields.size() <= need) {
      throw std::runtime_error("row " + std::to_string(row) +
                               ": expected at least " +
                               std::to_string(need + 1) + " fields");
    }
    const std::string& ts = fields[static_cast<std::size_t>(ts_col)];
    if (!previous_ts.empty() && ts <= previous_ts) {
      throw std::runtime_error("row " + std::to_string(row) +
                               ": timestamp '" + ts +
                               "' not after previous '" + previous_ts + "'");
    }
    try {
      series.time.push_back(quantize_timestamp(ts));
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error("row " + std::to_string(row) + ": " +
                               err.what());
    }
    series.value.push_back(
        detail::parse_value(fields[static_cast<std::size_t>(val_col)], row));
    previous_ts = ts;
  }
  if (series.value.empty()) {
    throw std::runtime_error(path.string() + " has no data rows");
  }
  return series;
}

// ---------------------------------------------------------------------------
// Labels

// Marks points inside any [begin, end) interval as abnormal.
inline TimeSeries attach_labels(
    TimeSeries series,
    const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  std::vector<int> labels(series.size(), 0);
  for (const auto& [begin, end] : ranges) {
    if (begin > end || end > series.size()) {
      throw std::invalid_argument(
          "label interval [" + std::to_string(begin) + ", " +
          std::to_string(end) + ") outside series of length " +
          std::to_string(series.size()));
    }
    for (std::size_t i = begin; i < end; ++i) {
      labels[i] = 1;
    }
  }
  series.labels = std::move(labels);
  return series;
}

// Attaches an aligned 0/1 column.
inline TimeSeries attach_labels(TimeSeries series, std::vector<int> column) {
  if (column.size() != series.size()) {
    throw std::invalid_argument("label column length " +
                                std::to_string(column.size()) +
                                " does not match series length " +
                                std::to_string(series.size()));
  }
  for (int label : column) {
    if (label != 0 && label != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
  series.labels = std::move(column);
  return series;
}

// Label file: either one 0/1 per line (optional "label" header) or interval
// lines "begin,end" with end exclusive.  The format is sniffed from content.
inline TimeSeries attach_labels_from_file(TimeSeries series,
                                          const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<int> column;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  bool interval_format = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(file, line)) {
    ++row;
    line = detail::strip_cr(line);
    if (line.empty() || (row == 1 && line == "label")) {
      continue;
    }
    if (line.find(',') != std::string::npos) {
      interval_format = true;
      const std::vector<std::string> fields = detail::split_csv_row(line);
      if (fields.size() != 2) {
        throw std::runtime_error("row " + std::to_string(row) +
                                 ": expected 'begin,end'");
      }
      ranges.emplace_back(std::stoul(fields[0]), std::stoul(fields[1]));
    } else {
      if (line != "0" && line != "1") {
        throw std::runtime_error("row " + std::to_string(row) +
                                 ": label must be 0 or 1, got '" + line + "'");
      }
      column.push_back(line == "1" ? 1 : 0);
    }
  }
  if (interval_format && !column.empty()) {
    throw std::runtime_error(path.string() +
                             " mixes interval and column label formats");
  }
  return interval_format ? attach_labels(std::move(series), ranges)
                         : attach_labels(std::move(series), std::move(column));
}

// ---------------------------------------------------------------------------
// Splits and validation data

struct SplitSpec {
  std::size_t initial_train_len = 1000;  // fills a default window exactly once
};

// First initial_train_len points become the training prefix, the rest the
// streamed test portion.  Labels, when present, split alongside.
inline std::pair<TimeSeries, TimeSeries> initial_split(const TimeSeries& series,
                                                       const SplitSpec& spec) {
  if (spec.initial_train_len < 2) {
    throw std::invalid_argument("initial training length must be at least 2");
  }
  if (spec.initial_train_len >= series.size()) {
    throw std::invalid_argument("initial training length " +
                                std::to_string(spec.initial_train_len) +
                                " leaves no test data (series length " +
                                std::to_string(series.size()) + ")");
  }
  const std::size_t n = spec.initial_train_len;
  TimeSeries train, test;
  train.source_name = series.source_name;
  test.source_name = series.source_name;
  train.time.assign(series.time.begin(), series.time.begin() + n);
  train.value.assign(series.value.begin(), series.value.begin() + n);
  test.time.assign(series.time.begin() + n, series.time.end());
  test.value.assign(series.value.begin() + n, series.value.end());
  if (series.labels) {
    train.labels.emplace(series.labels->begin(), series.labels->begin() + n);
    test.labels.emplace(series.labels->begin() + n, series.labels->end());
  }
  return {std::move(train), std::move(test)};
}

// Copies [begin, end) of a labeled series and perturbs the values with
// zero-mean Gaussian noise of standard deviation noise_scale * (sample std of
// the segment).  The segment must contain both classes, otherwise no
// threshold can be ranked on it.
inline TimeSeries make_validation(const TimeSeries& series, std::size_t begin,
                                  std::size_t end, double noise_scale,
                                  std::uint64_t seed) {
  if (!series.labels) {
    throw std::invalid_argument("validation requires a labeled series");
  }
  if (begin >= end || end > series.size()) {
    throw std::invalid_argument("validation segment out of bounds");
  }
  bool has_positive = false, has_negative = false;
  for (std::size_t i = begin; i < end; ++i) {
    ((*series.labels)[i] == 1 ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    throw std::invalid_argument(
        "validation segment must contain both normal and abnormal points");
  }

  TimeSeries out;
  out.source_name = series.source_name + "-validation";
  out.time.assign(series.time.begin() + begin, series.time.begin() + end);
  out.value.assign(series.value.begin() + begin, series.value.begin() + end);
  out.labels.emplace(series.labels->begin() + begin,
                     series.labels->begin() + end);

  const std::size_t n = out.value.size();
  double mean = 0.0;
  for (double v : out.value) {
    mean += v;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : out.value) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  const double noise_sd = noise_scale * sd;
  if (noise_sd > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (double& v : out.value) {
      v += noise(rng);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic streams

enum class SynthKind {
  daily_jump_up,      // additive positive offset over a span
  daily_flat_middle,  // the daily pattern goes missing over a span
  level_shift_drift,  // permanent offset; only the onset is labeled abnormal
  spike,              // isolated single-point outliers
};

inline SynthKind synth_kind_from_string(const std::string& name) {
  if (name == "daily_jump_up") return SynthKind::daily_jump_up;
  if (name == "daily_flat_middle") return SynthKind::daily_flat_middle;
  if (name == "level_shift_drift") return SynthKind::level_shift_drift;
  if (name == "spike") return SynthKind::spike;
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

inline std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::daily_jump_up: return "daily_jump_up";
    case SynthKind::daily_flat_middle: return "daily_flat_middle";
    case SynthKind::level_shift_drift: return "level_shift_drift";
    case SynthKind::spike: return "spike";
  }
  throw std::logic_error("unreachable");
}

struct SynthSpec {
  SynthKind kind = SynthKind::daily_jump_up;
  std::size_t length = 2000;
  std::size_t points_per_day = 288;  // 5-minute cadence
  double amplitude = 1.0;            // sinusoid amplitude of the daily pattern
  double noise_sd = 0.05;            // observation noise
  std::size_t anomaly_start = 0;     // first abnormal index
  std::size_t anomaly_span = 0;      // abnormal span (also drift onset span)
  double magnitude = 8.0;            // offset in units of the base sample std
  std::vector<std::size_t> spike_indices;  // used by kind == spike
};

// RMS of the sinusoid-plus-noise base signal; anomaly magnitudes are
// expressed in this unit so specs stay scale-free.
inline double synth_base_std(const SynthSpec& spec) {
  return std::sqrt(0.5 * spec.amplitude * spec.amplitude +
                   spec.noise_sd * spec.noise_sd);
}

// Calendar timestamps matching synth_stream's time axis, for CSV export.
inline std::vector<std::string> synth_timestamps(std::size_t length,
                                                 std::size_t points_per_day) {
  using namespace std::chrono;
  const std::size_t step = 86400 / points_per_day;
  const sys_days base = sys_days(year{2014} / January / 1);
  std::vector<std::string> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t total = i * step;
    const year_month_day ymd(base + days{static_cast<long>(total / 86400)});
    const unsigned secs = static_cast<unsigned>(total % 86400);
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u %02u:%02u:%02u",
                  static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), secs / 3600,
                  (secs % 3600) / 60, secs % 60);
    out.emplace_back(buffer);
  }
  return out;
}

// Deterministic labeled stream: a sinusoidal daily pattern with Gaussian
// observation noise plus one injected behavior.  Labels mark the injection
// exactly as specified — they follow the spec, not the realized values.
inline TimeSeries synth_stream(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.length == 0) {
    throw std::invalid_argument("synthetic stream needs a positive length");
  }
  if (spec.points_per_day == 0 || 86400 % spec.points_per_day != 0) {
    throw std::invalid_argument(
        "points_per_day must divide the 86400-second day");
  }
  if (spec.kind == SynthKind::spike) {
    for (std::size_t idx : spec.spike_indices) {
      if (idx >= spec.length) {
        throw std::invalid_argument("spike index " + std::to_string(idx) +
                                    " outside stream of length " +
                                    std::to_string(spec.length));
      }
    }
  } else if (spec.anomaly_span > 0 &&
             (spec.anomaly_start >= spec.length ||
              spec.anomaly_start + spec.anomaly_span > spec.length)) {
    throw std::invalid_argument("anomaly span outside the stream");
  }

  const long step = 86400 / static_cast<long>(spec.points_per_day);
  const double offset = spec.magnitude * synth_base_std(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  TimeSeries out;
  out.source_name = to_string(spec.kind);
  out.time.reserve(spec.length);
  out.value.reserve(spec.length);
  std::vector<int> labels(spec.length, 0);

  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < spec.length; ++i) {
    const long secs = (static_cast<long>(i) * step) % 86400;
    out.time.push_back(detail::quantize_seconds_of_day(secs));

    const double phase = static_cast<double>(i % spec.points_per_day) /
                         static_cast<double>(spec.points_per_day);
    double base = spec.amplitude * std::sin(two_pi * phase);
    const bool in_span = spec.anomaly_span > 0 && i >= spec.anomaly_start &&
                         i < spec.anomaly_start + spec.anomaly_span;
    double y = 0.0;
    switch (spec.kind) {
      case SynthKind::daily_jump_up:
        y = base + (in_span ? offset : 0.0);
        labels[i] = in_span ? 1 : 0;
        break;
      case SynthKind::daily_flat_middle:
        y = in_span ? 0.0 : base;  // the pattern disappears
        labels[i] = in_span ? 1 : 0;
        break;
      case SynthKind::level_shift_drift:
        y = base + (i >= spec.anomaly_start && spec.anomaly_span > 0
                        ? offset
                        : 0.0);
        labels[i] = in_span ? 1 : 0;  // only the onset counts as abnormal
        break;
      case SynthKind::spike:
        y = base;
        break;
    }
    y += spec.noise_sd * noise(rng);
    out.value.push_back(y);
  }

  if (spec.kind == SynthKind::spike) {
    for (std::size_t idx : spec.spike_indices) {
      out.value[idx] += offset;
      labels[idx] = 1;
    }
  }
  out.labels = std::move(labels);
  return out;
}

// ---------------------------------------------------------------------------
// Output helpers

// Writes via a temporary file and renames into place, so readers never see a
// partial file.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out << content;
    if (!out) {
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

// NAB-style CSV: timestamp,value (and label when the series carries labels).
inline void write_series_csv(const std::filesystem::path& path,
                             const TimeSeries& series,
                             const std::vector<std::string>& timestamps) {
  if (timestamps.size() != series.size()) {
    throw std::invalid_argument("timestamp count does not match series");
  }
  std::ostringstream out;
  out << "timestamp,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << timestamps[i] << ',' << series.value[i] << '\n';
  }
  atomic_write_file(path, out.str());
}

// Aligned label column, one 0/1 per line under a "label" header.
inline void write_labels_csv(const std::filesystem::path& path,
                             const std::vector<int>& labels) {
  std::ostringstream out;
  out << "label\n";
  for (int label : labels) {
    out << label << '\n';
  }
  atomic_write_file(path, out.str());
}

}  // namespace gpad
