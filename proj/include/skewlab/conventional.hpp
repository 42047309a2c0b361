#pragma once

#include <span>
#include <vector>

#include "skewlab/network.hpp"

namespace skewlab {

/// Default lower clamp for dB quantities whose linear value reaches zero.
inline constexpr double kDbFloor = -120.0;

/// Mixed-mode magnitudes below this make a phase or ratio meaningless.
inline constexpr double kDegenerateMagnitude = 1e-9;

enum class Direction {
  LeftToRight,  // "21": launched at the left ports, observed at the right
  RightToLeft,  // "12"
};

/// Frequency-domain intra-pair skew. Delays are positive for a lagging
/// conductor, so a P line longer than N gives positive skew.
struct SkewProfile {
  Direction direction = Direction::LeftToRight;
  std::vector<double> frequencies;
  std::vector<double> skew;
  std::vector<double> t_first;   // P-side phase delay, s
  std::vector<double> t_second;  // N-side phase delay, s
  std::vector<bool> excluded;    // degenerate magnitude at this point
};

/// Per-frequency dB curve with excluded points (value NaN there).
struct DbProfile {
  Direction direction = Direction::LeftToRight;
  std::vector<double> frequencies;
  std::vector<double> values;
  std::vector<bool> excluded;
};

struct Excitation {
  enum class Kind { Step, Pulse };
  Kind kind = Kind::Step;
  double rise_time = 10e-12;  // 20-80 %, raised-cosine edge
  double bit_time = 0.0;      // pulse only
  int bit_count = 1;          // pulse only
  double amplitude = 1.0;     // volts

  void validate() const;
};

struct TdtOptions {
  int oversample = 4;          // zero-padding factor on the time grid
  double bandwidth_fraction = 0.01;
};

/// Uniformly sampled far-end responses of the P and N lines.
struct TdtTrace {
  Excitation::Kind kind = Excitation::Kind::Step;
  std::vector<double> time;
  std::vector<double> v_p;
  std::vector<double> v_n;

  double time_step() const { return time.size() > 1 ? time[1] - time[0] : 0.0; }
};

SkewProfile phase_skew(const MixedModeNetwork& mm, Direction direction);

/// 20*log10|cos(pi f t)|, clamped to `floor_db` at the cosine nulls.
double skew_loss(double t_skew, double f, double floor_db = kDbFloor);

/// Far-end response of each single-ended line to `exc`. The excitation's 20 %
/// point is at t = 0, so an ideal delay d puts the 50 % crossing at
/// d + rise_time / 2.
TdtTrace tdt_response(const SingleEndedNetwork& net, const Excitation& exc, const TdtOptions& options = {});

/// First-crossing time of v_p minus that of v_n at `threshold_fraction` of each
/// trace's settled amplitude (final value for a step, peak for a pulse).
double tdt_skew(const TdtTrace& trace, double threshold_fraction);

/// 20log|Scd| - 20log|Sdd| for the given direction. Exactly kDbFloor where
/// there is no mode conversion.
DbProfile dc_conversion_delta(const MixedModeNetwork& mm, Direction direction);

/// Weighted mean of |skew| over [f_min, f_max], trapezoidal, normalised by
/// the integral of the weight.
double eips(const SkewProfile& profile, std::span<const double> weight, double f_min, double f_max);

}  // namespace skewlab
