#pragma once

#include <optional>
#include <span>
#include <vector>

#include "skewlab/network.hpp"

namespace skewlab {

/// Phase corrections that null the intra-pair phase skew in both directions.
///
/// tau1 is an ideal phase shifter on the P line's left port, tau2 on its right
/// port. With z1 = S21 e^{-i tau1} - S23, z2 = S43 - S41 e^{-i tau1},
/// z3 = S12 e^{-i tau2} - S14 and z4 = S34 - S32 e^{-i tau2} (default port
/// map), a solution satisfies arg(e^{-i tau2} z1) = arg(z2) and
/// arg(e^{-i tau1} z3) = arg(z4).
struct DeskewSolution {
  std::vector<double> frequencies;
  std::vector<double> tau1, tau2;                      // rad, wrapped to (-pi, pi]
  std::vector<double> tau1_unwrapped, tau2_unwrapped;  // continuous along frequency
  std::vector<bool> converged;
  std::vector<int> iterations;
  std::vector<double> residual_skew;  // s, worst of the two directions after correction
  std::vector<bool> degenerate;       // weak FEXT: symmetric split of tau1 + tau2

  std::size_t size() const { return frequencies.size(); }
  std::size_t nonconverged_count() const;
};

struct SolverOptions {
  double damping = 0.7;
  int max_iterations = 200;
  int newton_after = 50;
  double phase_tolerance = 1e-12;      // rad
  double weak_coupling_ratio = 1e-6;   // FEXT / thru below which the split is undetermined
  double degenerate_skew_tolerance = 1e-15;  // s
};

DeskewSolution solve_deskew(const SingleEndedNetwork& net, const SolverOptions& options = {});

/// Applies the phase shifters of `sol` to every entry touching the P line's
/// ports. Magnitudes are unchanged.
SingleEndedNetwork apply_deskew(const SingleEndedNetwork& net, const DeskewSolution& sol);

/// Configuration of the weighted SILD figure of merit. Unset band edges
/// resolve against the network: f_min to its lowest frequency, f_max to f_b.
struct FomConfig {
  double f_b = 106.25e9;
  std::optional<double> f_r;  // defaults to 0.75 f_b
  std::optional<double> f_t;  // defaults to f_b
  std::optional<double> f_min;
  std::optional<double> f_max;
  double grid_step = 10e6;
  /// Average of W * SILD^2 without the square root, as printed in some
  /// references. The default reports the RMS.
  bool literal_mean_square = false;

  double receiver_bandwidth() const { return f_r.value_or(0.75 * f_b); }
  double transmit_bandwidth() const { return f_t.value_or(f_b); }
  void validate() const;
};

/// FOM band for data spanning [lowest, highest]. Requested edges outside the
/// data are clamped and `clamped` is set.
struct ResolvedBand {
  double f_min;
  double f_max;
  bool clamped;
};
ResolvedBand resolve_band(const FomConfig& cfg, double lowest, double highest);

struct SildOptions {
  bool enforce_reciprocity = true;
  double reciprocity_threshold = 0.99;
  SolverOptions solver;
};

struct SildResult {
  std::vector<double> frequencies;
  std::vector<double> sild;      // dB, direction average
  std::vector<double> sild_21;   // dB, left to right
  std::vector<double> sild_12;   // dB, right to left
  std::vector<double> eq_skew;   // s
  std::vector<bool> excluded;
  double fom_sild = 0.0;         // dB
  double max_abs_sild = 0.0;     // dB, within the FOM band
  double direction_residual = 0.0;  // dB, max |SILD_21 - SILD_12|
  double band_min = 0.0;
  double band_max = 0.0;
  double reciprocity_quality = 1.0;
  bool enforced_reciprocity = false;
  DeskewSolution solution;
};

/// Skew-induced insertion loss deviation: 20log|Sdd| - 20log|Sdd0| where Sdd0
/// is the differential transmission after de-skewing.
SildResult compute_sild(const SingleEndedNetwork& net, const FomConfig& cfg = {},
                        const SildOptions& options = {});

/// sinc^2(f/f_b) / (1 + (f/f_r)^8) / (1 + (f/f_t)^4).
double fom_weight(double f, const FomConfig& cfg);

/// Weighted RMS of SILD on the uniform grid f_min..f_max step grid_step.
/// NaN entries in `sild_db` are bridged linearly before resampling.
double fom_sild(std::span<const double> frequencies, std::span<const double> sild_db, const FomConfig& cfg);

/// Constant delay skew whose cosine loss equals `sild_db` at f.
double eq_skew(double sild_db, double f);

}  // namespace skewlab
