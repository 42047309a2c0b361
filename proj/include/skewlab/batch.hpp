#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skewlab/deskew.hpp"

namespace skewlab {

struct ChannelRecord {
  std::string source_id;
  double fom_sild = 0.0;      // dB
  double max_abs_sild = 0.0;  // dB
  double f_min = 0.0;         // Hz
  double f_max = 0.0;         // Hz
  double reciprocity_quality = 1.0;
  bool enforced_reciprocity = false;
  std::size_t nonconverged_points = 0;

  friend bool operator==(const ChannelRecord&, const ChannelRecord&) = default;
};

struct BatchFailure {
  std::string source_id;
  std::string message;

  friend bool operator==(const BatchFailure&, const BatchFailure&) = default;
};

struct HistogramBin {
  double low = 0.0;   // dB, inclusive
  double high = 0.0;  // dB, exclusive
  std::size_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct ThresholdFraction {
  double threshold = 0.0;  // dB
  double fraction = 0.0;

  friend bool operator==(const ThresholdFraction&, const ThresholdFraction&) = default;
};

struct BatchReport {
  std::vector<ChannelRecord> records;
  std::vector<BatchFailure> errors;
  std::vector<HistogramBin> histogram;
  std::vector<ThresholdFraction> fraction_below;
  double bin_width = 0.05;

  friend bool operator==(const BatchReport&, const BatchReport&) = default;
};

inline constexpr double kDefaultBinWidth = 0.05;

/// Qualification summary of one analyzed channel.
ChannelRecord make_record(const SildResult& result, std::string source_id);

/// Fraction of values strictly below each threshold.
std::vector<double> fraction_below(std::span<const double> values, std::span<const double> thresholds);

/// Bins [i*w, (i+1)*w) from 0 dB up to the bin holding the largest value.
std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width);

/// Runs the metric pipeline on every file. Files that fail are listed in
/// `errors`; throws only when no file succeeds. `threads` == 0 picks the
/// hardware concurrency. Output order follows `paths`.
BatchReport analyze_batch(std::span<const std::filesystem::path> paths, const FomConfig& cfg,
                          double bin_width, std::span<const double> thresholds, unsigned threads = 0,
                          const SildOptions& options = {});

/// SKEWLAB_THREADS, or 0 when unset or unparsable.
unsigned threads_from_env();

}  // namespace skewlab
