#include "skewlab/synth.hpp"

#include <cmath>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

cplx delay_phasor(double f, double delay) { return std::polar(1.0, -2.0 * kPi * f * delay); }

// Symmetric matched 4-port with P thru `tp`, N thru `tn` and FEXT `x`.
SMatrix thru_matrix(cplx tp, cplx tn, cplx x) {
  SMatrix s = SMatrix::Zero(4, 4);
  s(1, 0) = s(0, 1) = tp;
  s(3, 2) = s(2, 3) = tn;
  s(1, 2) = s(2, 1) = x;
  s(3, 0) = s(0, 3) = x;
  return s;
}

}  // namespace

void LineSpec::validate() const {
  if (!(length > 0.0)) throw Error(ErrorCode::InvalidArgument, "line length must be positive");
  if (!(odd_delay_per_m > 0.0) || !(even_delay_per_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mode delays must be positive");
  }
  if (loss_coeff < 0.0 || common_loss_coeff.value_or(0.0) < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "loss coefficients must be non-negative");
  }
}

double line_loss_magnitude(double loss_coeff, double length, double f) {
  return std::pow(10.0, -loss_coeff * length * std::sqrt(f / 1e9) / 20.0);
}

SingleEndedNetwork make_uncoupled_pair(const LineSpec& spec, const std::vector<double>& grid) {
  spec.validate();
  const double t = spec.length * spec.odd_delay_per_m;
  std::vector<SMatrix> mats;
  mats.reserve(grid.size());
  for (double f : grid) {
    const double h = line_loss_magnitude(spec.loss_coeff, spec.length, f);
    mats.push_back(thru_matrix(h * delay_phasor(f, t + spec.p_excess_delay),
                               h * delay_phasor(f, t + spec.n_excess_delay), cplx{}));
  }
  return SingleEndedNetwork(grid, std::move(mats));
}

SingleEndedNetwork make_coupled_pair(const LineSpec& spec, const std::vector<double>& grid) {
  spec.validate();
  const double t_odd = spec.length * spec.odd_delay_per_m;
  const double t_even = spec.length * spec.even_delay_per_m;
  const double c_loss = spec.common_loss_coeff.value_or(spec.loss_coeff);
  std::vector<SMatrix> mats;
  mats.reserve(grid.size());
  for (double f : grid) {
    const cplx sdd = line_loss_magnitude(spec.loss_coeff, spec.length, f) * delay_phasor(f, t_odd);
    const cplx scc = line_loss_magnitude(c_loss, spec.length, f) * delay_phasor(f, t_even);
    const cplx thru = 0.5 * (sdd + scc);
    mats.push_back(thru_matrix(thru, thru, 0.5 * (scc - sdd)));
  }
  SingleEndedNetwork line(grid, std::move(mats));
  if (spec.p_excess_delay == 0.0 && spec.n_excess_delay == 0.0) return line;
  const auto half = make_se_delay(0.5 * spec.p_excess_delay, 0.5 * spec.n_excess_delay, grid);
  return cascade(cascade(half, line), half);
}

SingleEndedNetwork make_se_delay(double delay_p, double delay_n, const std::vector<double>& grid) {
  if (delay_p < 0.0 || delay_n < 0.0) throw Error(ErrorCode::InvalidArgument, "delays must be non-negative");
  std::vector<SMatrix> mats;
  mats.reserve(grid.size());
  for (double f : grid) mats.push_back(thru_matrix(delay_phasor(f, delay_p), delay_phasor(f, delay_n), cplx{}));
  return SingleEndedNetwork(grid, std::move(mats));
}

SingleEndedNetwork build_channel(const ChannelSpec& spec) {
  if (spec.segments.empty()) throw Error(ErrorCode::InvalidArgument, "channel needs at least one segment");
  auto build = [&](const Segment& seg) {
    return std::visit(
        [&](const auto& s) -> SingleEndedNetwork {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, UncoupledSegment>) return make_uncoupled_pair(s.line, spec.grid);
          else if constexpr (std::is_same_v<T, CoupledSegment>) return make_coupled_pair(s.line, spec.grid);
          else return make_se_delay(s.delay_p, s.delay_n, spec.grid);
        },
        seg);
  };
  SingleEndedNetwork net = build(spec.segments.front());
  for (std::size_t i = 1; i < spec.segments.size(); ++i) net = cascade(net, build(spec.segments[i]));
  return net;
}

}  // namespace skewlab
