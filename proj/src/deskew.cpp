#include "skewlab/deskew.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skewlab/conventional.hpp"
#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Transmission terms of one frequency, canonical port order.
struct Thru {
  cplx s21, s23, s43, s41;  // left to right
  cplx s12, s14, s34, s32;  // right to left

  explicit Thru(const SMatrix& s)
      : s21(s(1, 0)), s23(s(1, 2)), s43(s(3, 2)), s41(s(3, 0)),
        s12(s(0, 1)), s14(s(0, 3)), s34(s(2, 3)), s32(s(2, 1)) {}

  // Phase mismatch left in each direction after correction.
  double residual_21(double t1, double t2) const {
    const cplx e1 = std::polar(1.0, -t1);
    const cplx z1 = s21 * e1 - s23;
    const cplx z2 = s43 - s41 * e1;
    return std::arg(std::polar(1.0, -t2) * z1 * std::conj(z2));
  }
  double residual_12(double t1, double t2) const {
    const cplx e2 = std::polar(1.0, -t2);
    const cplx z3 = s12 * e2 - s14;
    const cplx z4 = s34 - s32 * e2;
    return std::arg(std::polar(1.0, -t1) * z3 * std::conj(z4));
  }
  // d residual_21 / d t1 and d residual_12 / d t2.
  double slope_21(double t1) const {
    const cplx e1 = std::polar(1.0, -t1);
    const cplx z1 = s21 * e1 - s23;
    const cplx z2 = s43 - s41 * e1;
    const cplx i{0.0, 1.0};
    return ((-i * s21 * e1) / z1).imag() - ((i * s41 * e1) / z2).imag();
  }
  double slope_12(double t2) const {
    const cplx e2 = std::polar(1.0, -t2);
    const cplx z3 = s12 * e2 - s14;
    const cplx z4 = s34 - s32 * e2;
    const cplx i{0.0, 1.0};
    return ((-i * s12 * e2) / z3).imag() - ((i * s32 * e2) / z4).imag();
  }
  double fext() const {
    return std::max({std::abs(s23), std::abs(s41), std::abs(s14), std::abs(s32)});
  }
};

struct PointSolve {
  double t1;
  double t2;
  int iterations;
  bool converged;
};

PointSolve solve_point(const Thru& th, double t1, double t2, const SolverOptions& opt) {
  auto norm = [&](double a, double b) { return std::max(std::abs(a), std::abs(b)); };
  for (int it = 0; it < opt.max_iterations; ++it) {
    double r1 = th.residual_21(t1, t2);
    double r2 = th.residual_12(t1, t2);
    if (norm(r1, r2) < opt.phase_tolerance) return {t1, t2, it, true};
    if (it < opt.newton_after) {
      // Each condition is solved for the phase shifter that appears outside
      // its z terms: residual_21 = 0 fixes t2, residual_12 = 0 fixes t1.
      t2 += opt.damping * r1;
      t1 += opt.damping * th.residual_12(t1, t2);
      continue;
    }
    // Newton on the 2x2 residual system: d r1/d t2 = d r2/d t1 = -1.
    const double a = th.slope_21(t1);
    const double d = th.slope_12(t2);
    const double det = a * d - 1.0;
    if (!std::isfinite(det) || det == 0.0) break;
    const double dt1 = -(d * r1 + r2) / det;
    const double dt2 = -(r1 + a * r2) / det;
    const double base = norm(r1, r2);
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const double n1 = t1 + step * dt1;
      const double n2 = t2 + step * dt2;
      if (norm(th.residual_21(n1, n2), th.residual_12(n1, n2)) < base) {
        t1 = n1;
        t2 = n2;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      r1 = th.residual_21(t1, t2);
      r2 = th.residual_12(t1, t2);
      return {t1, t2, it + 1, norm(r1, r2) < opt.phase_tolerance};
    }
  }
  const double r1 = th.residual_21(t1, t2);
  const double r2 = th.residual_12(t1, t2);
  return {t1, t2, opt.max_iterations, norm(r1, r2) < opt.phase_tolerance};
}

double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }

}  // namespace

std::size_t DeskewSolution::nonconverged_count() const {
  return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), false));
}

DeskewSolution solve_deskew(const SingleEndedNetwork& net, const SolverOptions& options) {
  if (net.ports() != 4) throw Error(ErrorCode::PortCountMismatch, "de-skewing needs a 4-port network");
  const SingleEndedNetwork c = net.canonical();
  const std::size_t n = c.size();
  DeskewSolution sol;
  sol.frequencies = c.frequencies();
  sol.tau1.resize(n);
  sol.tau2.resize(n);
  sol.tau1_unwrapped.resize(n);
  sol.tau2_unwrapped.resize(n);
  sol.converged.assign(n, false);
  sol.iterations.assign(n, 0);
  sol.residual_skew.resize(n);
  sol.degenerate.assign(n, false);

  double t1 = 0.0;
  double t2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = c.frequencies()[k];
    const Thru th(c.s(k));
    if (th.fext() < options.weak_coupling_ratio * std::abs(th.s21)) {
      // Only the sum of the two shifters is determined: split it evenly,
      // keeping the sum continuous with the previous point.
      const double sum_prev = t1 + t2;
      const double sum = sum_prev + wrap_phase(std::arg(th.s21 * std::conj(th.s43)) - sum_prev);
      t1 = 0.5 * sum;
      t2 = 0.5 * sum;
      sol.degenerate[k] = true;
    } else {
      const PointSolve ps = solve_point(th, t1, t2, options);
      sol.iterations[k] = ps.iterations;
      sol.converged[k] = ps.converged;
      if (ps.converged || k == 0) {
        t1 = ps.t1;
        t2 = ps.t2;
      }
      if (!ps.converged) {
        sol.tau1[k] = wrap_phase(ps.t1);
        sol.tau2[k] = wrap_phase(ps.t2);
        sol.tau1_unwrapped[k] = ps.t1;
        sol.tau2_unwrapped[k] = ps.t2;
        sol.residual_skew[k] = std::max(std::abs(th.residual_21(ps.t1, ps.t2)),
                                        std::abs(th.residual_12(ps.t1, ps.t2))) / (2.0 * kPi * f);
        continue;
      }
    }
    const double r = std::max(std::abs(th.residual_21(t1, t2)), std::abs(th.residual_12(t1, t2)));
    sol.residual_skew[k] = r / (2.0 * kPi * f);
    if (sol.degenerate[k]) sol.converged[k] = sol.residual_skew[k] < options.degenerate_skew_tolerance;
    sol.tau1_unwrapped[k] = t1;
    sol.tau2_unwrapped[k] = t2;
    sol.tau1[k] = wrap_phase(t1);
    sol.tau2[k] = wrap_phase(t2);
  }
  return sol;
}

SingleEndedNetwork apply_deskew(const SingleEndedNetwork& net, const DeskewSolution& sol) {
  if (net.ports() != 4) throw Error(ErrorCode::PortCountMismatch, "de-skewing needs a 4-port network");
  if (sol.size() != net.size()) throw Error(ErrorCode::GridMismatch, "solution and network grids differ");
  for (std::size_t k = 0; k < net.size(); ++k) {
    const double a = sol.frequencies[k];
    const double b = net.frequencies()[k];
    if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
      throw Error(ErrorCode::GridMismatch, "solution and network grids differ");
    }
  }
  const SingleEndedNetwork c = net.canonical();
  std::vector<SMatrix> out;
  out.reserve(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    // Phase shifters on the P line: tau1 at its left port, tau2 at its right.
    Eigen::Vector4cd d;
    d << std::polar(1.0, -sol.tau1[k]), std::polar(1.0, -sol.tau2[k]), cplx{1.0, 0.0}, cplx{1.0, 0.0};
    out.push_back(d.asDiagonal() * c.s(k) * d.asDiagonal());
  }
  return SingleEndedNetwork(c.frequencies(), std::move(out)).with_layout(net.port_map());
}

void FomConfig::validate() const {
  if (!(f_b > 0.0) || !(receiver_bandwidth() > 0.0) || !(transmit_bandwidth() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "f_b, f_r and f_t must be positive");
  }
  if (!(grid_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  if (f_min && !(*f_min > 0.0)) throw Error(ErrorCode::InvalidArgument, "f_min must be positive");
  if (f_min && f_max && !(*f_min < *f_max)) throw Error(ErrorCode::InvalidArgument, "f_min must be below f_max");
}

ResolvedBand resolve_band(const FomConfig& cfg, double lowest, double highest) {
  cfg.validate();
  ResolvedBand band{cfg.f_min.value_or(lowest), cfg.f_max.value_or(cfg.f_b), false};
  if (band.f_min < lowest) {
    band.f_min = lowest;
    band.clamped = true;
  }
  if (band.f_max > highest) {
    band.f_max = highest;
    band.clamped = true;
  }
  if (!(band.f_min < band.f_max)) {
    std::ostringstream os;
    os << "FOM band [" << band.f_min << ", " << band.f_max << "] Hz is empty";
    throw Error(ErrorCode::EmptyBand, os.str());
  }
  return band;
}

double fom_weight(double f, const FomConfig& cfg) {
  const double x = f / cfg.f_b;
  const double sinc = std::abs(x) < 1e-15 ? 1.0 : std::sin(kPi * x) / (kPi * x);
  const double rx = f / cfg.receiver_bandwidth();
  const double tx = f / cfg.transmit_bandwidth();
  return sinc * sinc / (1.0 + std::pow(rx, 8)) / (1.0 + std::pow(tx, 4));
}

double fom_sild(std::span<const double> frequencies, std::span<const double> sild_db, const FomConfig& cfg) {
  if (frequencies.size() != sild_db.size() || frequencies.empty()) {
    throw Error(ErrorCode::EmptyBand, "no SILD samples");
  }
  std::vector<double> vf;
  std::vector<double> vs;
  for (std::size_t k = 0; k < frequencies.size(); ++k) {
    if (std::isfinite(sild_db[k])) {
      vf.push_back(frequencies[k]);
      vs.push_back(sild_db[k]);
    }
  }
  if (vf.empty()) throw Error(ErrorCode::EmptyBand, "every SILD sample is excluded");
  const ResolvedBand band = resolve_band(cfg, frequencies.front(), frequencies.back());
  const auto grid = linear_grid(band.f_min, band.f_max, cfg.grid_step);
  double acc = 0.0;
  for (double f : grid) {
    double s;
    auto hi = std::lower_bound(vf.begin(), vf.end(), f);
    if (hi == vf.begin()) {
      s = vs.front();
    } else if (hi == vf.end()) {
      s = vs.back();
    } else {
      const auto j = static_cast<std::size_t>(hi - vf.begin());
      const double w = (f - vf[j - 1]) / (vf[j] - vf[j - 1]);
      s = (1.0 - w) * vs[j - 1] + w * vs[j];
    }
    acc += fom_weight(f, cfg) * s * s;
  }
  const double mean = acc / static_cast<double>(grid.size());
  return cfg.literal_mean_square ? mean : std::sqrt(mean);
}

double eq_skew(double sild_db, double f) {
  if (!(f > 0.0)) throw Error(ErrorCode::InvalidArgument, "equivalent skew needs f > 0");
  if (std::isnan(sild_db)) return kNaN;
  const double ratio = std::clamp(std::pow(10.0, sild_db / 20.0), 0.0, 1.0);
  return std::acos(ratio) / (kPi * f);
}

SildResult compute_sild(const SingleEndedNetwork& input, const FomConfig& cfg, const SildOptions& options) {
  if (input.ports() != 4) throw Error(ErrorCode::PortCountMismatch, "SILD needs a 4-port network");
  SildResult res;
  SingleEndedNetwork net = input;
  res.reciprocity_quality = reciprocity_metric(net).quality;
  if (options.enforce_reciprocity && res.reciprocity_quality < options.reciprocity_threshold) {
    net = enforce_reciprocity(net);
    res.enforced_reciprocity = true;
  }
  res.solution = solve_deskew(net, options.solver);
  const SingleEndedNetwork deskewed = apply_deskew(net, res.solution);
  const MixedModeNetwork mm = to_mixed_mode(net);
  const MixedModeNetwork mm0 = to_mixed_mode(deskewed);

  const std::size_t n = net.size();
  res.frequencies = net.frequencies();
  res.sild.assign(n, kNaN);
  res.sild_21.assign(n, kNaN);
  res.sild_12.assign(n, kNaN);
  res.eq_skew.assign(n, kNaN);
  res.excluded.assign(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const double m21 = std::abs(mm.sdd21[k]);
    const double m12 = std::abs(mm.sdd12[k]);
    const double d21 = std::abs(mm0.sdd21[k]);
    const double d12 = std::abs(mm0.sdd12[k]);
    if (!res.solution.converged[k] ||
        std::min({m21, m12, d21, d12}) < kDegenerateMagnitude) {
      res.excluded[k] = true;
      continue;
    }
    res.sild_21[k] = to_db(m21) - to_db(d21);
    res.sild_12[k] = to_db(m12) - to_db(d12);
    res.sild[k] = 0.5 * (res.sild_21[k] + res.sild_12[k]);
    res.eq_skew[k] = eq_skew(res.sild[k], res.frequencies[k]);
    res.direction_residual = std::max(res.direction_residual, std::abs(res.sild_21[k] - res.sild_12[k]));
  }

  const ResolvedBand band = resolve_band(cfg, res.frequencies.front(), res.frequencies.back());
  res.band_min = band.f_min;
  res.band_max = band.f_max;
  res.fom_sild = fom_sild(res.frequencies, res.sild, cfg);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = res.frequencies[k];
    if (res.excluded[k] || f < band.f_min || f > band.f_max) continue;
    res.max_abs_sild = std::max(res.max_abs_sild, std::abs(res.sild[k]));
  }
  return res;
}

}  // namespace skewlab
