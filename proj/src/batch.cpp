#include "skewlab/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <thread>

#include "skewlab/error.hpp"
#include "skewlab/touchstone.hpp"

namespace skewlab {

ChannelRecord make_record(const SildResult& result, std::string source_id) {
  ChannelRecord rec;
  rec.source_id = std::move(source_id);
  rec.fom_sild = result.fom_sild;
  rec.max_abs_sild = result.max_abs_sild;
  rec.f_min = result.band_min;
  rec.f_max = result.band_max;
  rec.reciprocity_quality = result.reciprocity_quality;
  rec.enforced_reciprocity = result.enforced_reciprocity;
  rec.nonconverged_points = result.solution.nonconverged_count();
  return rec;
}

std::vector<double> fraction_below(std::span<const double> values, std::span<const double> thresholds) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to compare against thresholds");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back(static_cast<double>(below) / static_cast<double>(sorted.size()));
  }
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
  std::vector<HistogramBin> bins;
  for (double v : values) {
    const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(v / bin_width)));
    while (bins.size() <= idx) {
      const double low = static_cast<double>(bins.size()) * bin_width;
      bins.push_back({low, low + bin_width, 0});
    }
    ++bins[idx].count;
  }
  return bins;
}

BatchReport analyze_batch(std::span<const std::filesystem::path> paths, const FomConfig& cfg, double bin_width,
                          std::span<const double> thresholds, unsigned threads, const SildOptions& options) {
  if (paths.empty()) throw Error(ErrorCode::EmptyInput, "no input files");
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
  cfg.validate();

  struct Outcome {
    std::optional<ChannelRecord> record;
    std::string error;
  };
  std::vector<Outcome> outcomes(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      const std::string id = paths[i].string();
      try {
        const SingleEndedNetwork net = read_touchstone_file(paths[i]);
        outcomes[i].record = make_record(compute_sild(net, cfg, options), id);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, paths.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  BatchReport report;
  report.bin_width = bin_width;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (outcomes[i].record) {
      report.records.push_back(std::move(*outcomes[i].record));
    } else {
      report.errors.push_back({paths[i].string(), outcomes[i].error});
    }
  }
  if (report.records.empty()) throw Error(ErrorCode::EmptyInput, "no input file could be analyzed");

  std::vector<double> foms;
  foms.reserve(report.records.size());
  for (const auto& r : report.records) foms.push_back(r.fom_sild);
  report.histogram = histogram(foms, bin_width);
  std::vector<double> sorted_thresholds(thresholds.begin(), thresholds.end());
  std::sort(sorted_thresholds.begin(), sorted_thresholds.end());
  const auto fractions = fraction_below(foms, sorted_thresholds);
  for (std::size_t i = 0; i < sorted_thresholds.size(); ++i) {
    report.fraction_below.push_back({sorted_thresholds[i], fractions[i]});
  }
  return report;
}

unsigned threads_from_env() {
  const char* v = std::getenv("SKEWLAB_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) return 0;
  return static_cast<unsigned>(n);
}

}  // namespace skewlab
