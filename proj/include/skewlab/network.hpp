#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace skewlab {

using cplx = std::complex<double>;
using SMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Single-ended port assignment of one differential pair (1-based indices).
/// The default is the P line running 1->2 and the N line running 3->4.
struct PortMap {
  int p_left = 1;
  int p_right = 2;
  int n_left = 3;
  int n_right = 4;

  bool is_default() const { return p_left == 1 && p_right == 2 && n_left == 3 && n_right == 4; }
  /// Throws InvalidArgument unless the indices are a permutation of {1,2,3,4}.
  void validate() const;
  /// Zero-based port indices in canonical order {p_left, p_right, n_left, n_right}.
  std::array<int, 4> zero_based() const;
  /// Map with P and N exchanged.
  PortMap swapped() const { return {n_left, n_right, p_left, p_right}; }

  friend bool operator==(const PortMap&, const PortMap&) = default;
};

/// Per-frequency single-ended S-matrices (2x2 or 4x4) on a strictly increasing
/// positive frequency grid in Hz.
class SingleEndedNetwork {
 public:
  SingleEndedNetwork() = default;
  /// Validates the grid and matrices; throws Error on violation.
  SingleEndedNetwork(std::vector<double> frequencies, std::vector<SMatrix> s, PortMap map = {});

  std::size_t size() const { return frequencies_.size(); }
  int ports() const { return s_.empty() ? 0 : static_cast<int>(s_.front().rows()); }
  const std::vector<double>& frequencies() const { return frequencies_; }
  const std::vector<SMatrix>& matrices() const { return s_; }
  const SMatrix& s(std::size_t k) const { return s_[k]; }
  /// Entry S_ij at frequency index k, i and j 1-based.
  cplx s(std::size_t k, int i, int j) const { return s_[k](i - 1, j - 1); }
  const PortMap& port_map() const { return map_; }

  /// Same data with ports reordered so the default PortMap applies.
  SingleEndedNetwork canonical() const;
  /// Reorders a canonical network so that `map` describes it.
  SingleEndedNetwork with_layout(const PortMap& map) const;
  /// Same matrices, different port labelling.
  SingleEndedNetwork relabeled(const PortMap& map) const;

 private:
  std::vector<double> frequencies_;
  std::vector<SMatrix> s_;
  PortMap map_;
};

/// Differential/common transmission and single-ended-to-mixed terms.
struct MixedModeNetwork {
  std::vector<double> frequencies;
  std::vector<cplx> sdd21, sdd12, scd21, scd12, scc21, scc12, sdc21, sdc12;
  std::vector<cplx> ssd21, ssd41, ssd12, ssd32;

  std::size_t size() const { return frequencies.size(); }
};

struct ReciprocityReport {
  double quality = 1.0;
  double max_abs_asymmetry = 0.0;
  double worst_frequency = 0.0;
  std::array<int, 2> worst_entry{0, 0};  // 1-based (i, j), i < j
};

inline constexpr double kDefaultReciprocityThreshold = 0.99;

MixedModeNetwork to_mixed_mode(const SingleEndedNetwork& net);

/// Cascades a (left) with b (right): a's right ports mate with b's left ports.
/// Result carries a's port layout.
SingleEndedNetwork cascade(const SingleEndedNetwork& a, const SingleEndedNetwork& b);

/// Entrywise linear interpolation of real/imag parts; no extrapolation.
SingleEndedNetwork resample(const SingleEndedNetwork& net, std::span<const double> grid);

ReciprocityReport reciprocity_metric(const SingleEndedNetwork& net);
SingleEndedNetwork enforce_reciprocity(const SingleEndedNetwork& net);

/// Uniform grid start, start+step, ... up to and including stop (within step*1e-9).
std::vector<double> linear_grid(double start, double stop, double step);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double rad);

/// Continuous phase along a sequence of complex samples. The first tracked
/// sample's phase lies in (-pi, pi]. Samples flagged in `skip` do not take part
/// in tracking and come back as NaN.
std::vector<double> unwrap_phase(std::span<const cplx> values, const std::vector<bool>& skip = {});

}  // namespace skewlab
