#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "skewlab/network.hpp"

namespace skewlab {

/// Matched, reciprocal differential line model.
struct LineSpec {
  double length = 1.0;                // m
  double odd_delay_per_m = 4.4e-9;    // s/m
  double even_delay_per_m = 4.4e-9;   // s/m
  double loss_coeff = 0.0;            // dB / (m * sqrt(GHz)), differential mode
  std::optional<double> common_loss_coeff;  // defaults to loss_coeff
  double p_excess_delay = 0.0;        // s
  double n_excess_delay = 0.0;        // s

  void validate() const;
};

struct UncoupledSegment {
  LineSpec line;
};
struct CoupledSegment {
  LineSpec line;
};
struct SeDelaySegment {
  double delay_p = 0.0;
  double delay_n = 0.0;
};
using Segment = std::variant<UncoupledSegment, CoupledSegment, SeDelaySegment>;

struct ChannelSpec {
  std::vector<Segment> segments;
  std::vector<double> grid;  // Hz
};

/// sqrt(f) attenuation magnitude, 10^(-coeff * length * sqrt(f / 1 GHz) / 20).
double line_loss_magnitude(double loss_coeff, double length, double f);

/// P and N as independent lines of delay length * odd_delay_per_m plus their
/// excess delays. No FEXT, no reflections.
SingleEndedNetwork make_uncoupled_pair(const LineSpec& spec, const std::vector<double>& grid);

/// Even/odd mode line built in the mixed-mode basis and mapped to single-ended
/// ports. Unequal mode delays produce FEXT. Excess delays are placed as
/// single-ended delay elements, half at each end.
SingleEndedNetwork make_coupled_pair(const LineSpec& spec, const std::vector<double>& grid);

/// Lossless matched single-ended delays on P and N.
SingleEndedNetwork make_se_delay(double delay_p, double delay_n, const std::vector<double>& grid);

/// Left-to-right cascade of every segment.
SingleEndedNetwork build_channel(const ChannelSpec& spec);

}  // namespace skewlab
