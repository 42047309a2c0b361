#include "skewlab/conventional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <fftw3.h>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// 20-80 % span of a raised-cosine edge, as a fraction of its full width.
const double kRiseFraction = (std::acos(-0.6) - std::acos(0.6)) / kPi;
// Time from edge start to its 20 % point, as a fraction of the full width.
const double kTwentyFraction = std::acos(0.6) / kPi;

// Spectrum of the derivative of a raised-cosine edge of full width w: a
// unit-area half-sine pulse centred at t = 0.
double edge_spectrum(double f, double w) {
  const double x = f * w;
  const double d = 1.0 - 4.0 * x * x;
  if (std::abs(d) < 1e-9) return kPi / 4.0;
  return std::cos(kPi * x) / d;
}

struct Transfer {
  double f;
  cplx p;
  cplx n;
};

cplx lerp(cplx a, cplx b, double w) { return (1.0 - w) * a + w * b; }

// Interpolates the (DC-augmented) transfer table at f.
std::pair<cplx, cplx> sample(const std::vector<Transfer>& table, double f) {
  auto it = std::lower_bound(table.begin(), table.end(), f, [](const Transfer& t, double x) { return t.f < x; });
  if (it == table.end()) return {table.back().p, table.back().n};
  if (it->f == f || it == table.begin()) return {it->p, it->n};
  const auto& lo = *(it - 1);
  const double w = (f - lo.f) / (it->f - lo.f);
  return {lerp(lo.p, it->p, w), lerp(lo.n, it->n, w)};
}

std::vector<double> inverse_real_fft(std::vector<cplx> spectrum, std::size_t n) {
  // The planner is not re-entrant; execution on a private plan is.
  static std::mutex planner_mutex;
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spectrum.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

double settled_level(const std::vector<double>& v, Excitation::Kind kind) {
  if (kind == Excitation::Kind::Pulse) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return std::abs(*mx) >= std::abs(*mn) ? *mx : *mn;
  }
  const std::size_t tail = std::max<std::size_t>(1, v.size() / 10);
  double sum = 0.0;
  for (std::size_t i = v.size() - tail; i < v.size(); ++i) sum += v[i];
  return sum / static_cast<double>(tail);
}

double first_crossing(const std::vector<double>& t, const std::vector<double>& v, double level) {
  const double sign = level >= 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double a = sign * v[i - 1];
    const double b = sign * v[i];
    const double l = sign * level;
    if (a < l && b >= l) return t[i - 1] + (l - a) / (b - a) * (t[i] - t[i - 1]);
  }
  throw Error(ErrorCode::NoCrossing, "trace never crosses the threshold level");
}

}  // namespace

void Excitation::validate() const {
  if (!(rise_time > 0.0)) throw Error(ErrorCode::InvalidArgument, "rise time must be positive");
  if (kind == Kind::Pulse) {
    if (!(bit_time > 0.0)) throw Error(ErrorCode::InvalidArgument, "pulse excitation needs bit_time > 0");
    if (bit_count < 1) throw Error(ErrorCode::InvalidArgument, "pulse excitation needs bit_count >= 1");
  }
}

SkewProfile phase_skew(const MixedModeNetwork& mm, Direction direction) {
  const auto& a = direction == Direction::LeftToRight ? mm.ssd21 : mm.ssd12;
  const auto& b = direction == Direction::LeftToRight ? mm.ssd41 : mm.ssd32;
  const std::size_t n = mm.size();
  SkewProfile prof;
  prof.direction = direction;
  prof.frequencies = mm.frequencies;
  prof.excluded.assign(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(mm.frequencies[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "phase skew needs f > 0");
    prof.excluded[k] = std::abs(a[k]) < kDegenerateMagnitude || std::abs(b[k]) < kDegenerateMagnitude;
  }
  const auto pa = unwrap_phase(a, prof.excluded);
  const auto pb = unwrap_phase(b, prof.excluded);
  prof.skew.assign(n, kNaN);
  prof.t_first.assign(n, kNaN);
  prof.t_second.assign(n, kNaN);
  for (std::size_t k = 0; k < n; ++k) {
    if (prof.excluded[k]) continue;
    const double w = 2.0 * kPi * mm.frequencies[k];
    prof.t_first[k] = -pa[k] / w;
    prof.t_second[k] = -pb[k] / w;
    prof.skew[k] = prof.t_first[k] - prof.t_second[k];
  }
  return prof;
}

double skew_loss(double t_skew, double f, double floor_db) {
  const double c = std::abs(std::cos(kPi * f * t_skew));
  if (c == 0.0) return floor_db;
  return std::max(20.0 * std::log10(c), floor_db);
}

TdtTrace tdt_response(const SingleEndedNetwork& net, const Excitation& exc, const TdtOptions& options) {
  if (net.ports() != 4) throw Error(ErrorCode::PortCountMismatch, "TDT needs a 4-port network");
  exc.validate();
  if (net.size() < 2) throw Error(ErrorCode::InvalidArgument, "TDT needs at least two frequency points");
  const SingleEndedNetwork c = net.canonical();
  const auto& freqs = c.frequencies();

  std::vector<Transfer> table;
  table.reserve(c.size() + 1);
  std::vector<cplx> sp(c.size());
  std::vector<cplx> sn(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    sp[k] = c.s(k, 2, 1);
    sn[k] = c.s(k, 4, 3);
  }
  auto dc_magnitude = [&](const std::vector<cplx>& s) {
    const double m1 = std::abs(s[0]);
    const double m2 = std::abs(s[1]);
    return std::max(0.0, m1 - freqs[0] * (m2 - m1) / (freqs[1] - freqs[0]));
  };
  table.push_back({0.0, dc_magnitude(sp), dc_magnitude(sn)});
  for (std::size_t k = 0; k < c.size(); ++k) table.push_back({freqs[k], sp[k], sn[k]});

  // Longest phase delay of the two lines sizes the time window.
  const double f_top = freqs.back();
  double delay = 0.0;
  for (const auto* s : {&sp, &sn}) {
    const auto ph = unwrap_phase(*s);
    delay = std::max(delay, -ph.back() / (2.0 * kPi * f_top));
  }
  const double width = exc.rise_time / kRiseFraction;
  const double lead = width;  // time before t = 0 kept in the window
  double span = lead + width;
  if (exc.kind == Excitation::Kind::Pulse) span += exc.bit_count * exc.bit_time;
  const double window = std::max({4.0 * delay, 2.0 * (delay + span), 16.0 * width});
  const double df = 1.0 / window;
  const auto bins = static_cast<std::size_t>(std::floor(f_top / df));
  if (bins < 2) throw Error(ErrorCode::InsufficientBandwidth, "frequency range too narrow for the time window");

  // Edge derivative spectrum; its centre is the 50 % point, rise_time/2 after t = 0.
  const double centre = width * (0.5 - kTwentyFraction);
  std::vector<cplx> yp(bins + 1);
  std::vector<cplx> yn(bins + 1);
  auto excitation = [&](double f) {
    const double w = 2.0 * kPi * f;
    cplx g = edge_spectrum(f, width) * std::polar(1.0, -w * (centre + lead));
    if (exc.kind == Excitation::Kind::Pulse) g *= 1.0 - std::polar(1.0, -w * exc.bit_count * exc.bit_time);
    return g;
  };
  double peak = 0.0;
  for (std::size_t k = 0; k <= bins; ++k) {
    const double f = static_cast<double>(k) * df;
    const cplx g = excitation(f);
    const auto [hp, hn] = sample(table, f);
    yp[k] = hp * g;
    yn[k] = hn * g;
    peak = std::max({peak, std::abs(yp[k]), std::abs(yn[k])});
  }
  // Band-edge content is judged on the measured points, so a coarse
  // transform grid cannot skip it.
  double tail = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (freqs[k] < 0.95 * f_top) continue;
    const double g = std::abs(excitation(freqs[k]));
    tail = std::max({tail, std::abs(sp[k]) * g, std::abs(sn[k]) * g});
  }
  if (!(peak > 0.0) || tail >= options.bandwidth_fraction * peak) {
    std::ostringstream os;
    os << "response at the top of the band is " << (peak > 0.0 ? tail / peak : 1.0)
       << " of peak; extend the frequency range or slow the edge";
    throw Error(ErrorCode::InsufficientBandwidth, os.str());
  }

  std::size_t n = 1;
  while (n < 2 * bins * static_cast<std::size_t>(std::max(1, options.oversample))) n <<= 1;
  const double dt = window / static_cast<double>(n);
  auto to_time = [&](std::vector<cplx>& y) {
    std::vector<cplx> spec(n / 2 + 1, cplx{});
    for (std::size_t k = 0; k <= bins && k < spec.size(); ++k) spec[k] = y[k];
    spec[0] = spec[0].real();
    auto deriv = inverse_real_fft(std::move(spec), n);
    std::vector<double> v(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      acc += 0.5 * (deriv[i - 1] + deriv[i]) * df * dt;
      v[i] = exc.amplitude * acc;
    }
    return v;
  };

  TdtTrace trace;
  trace.kind = exc.kind;
  trace.time.resize(n);
  for (std::size_t i = 0; i < n; ++i) trace.time[i] = static_cast<double>(i) * dt - lead;
  trace.v_p = to_time(yp);
  trace.v_n = to_time(yn);
  return trace;
}

double tdt_skew(const TdtTrace& trace, double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold fraction must lie in (0, 1)");
  }
  if (trace.time.size() < 2 || trace.v_p.size() != trace.time.size() || trace.v_n.size() != trace.time.size()) {
    throw Error(ErrorCode::InvalidArgument, "malformed TDT trace");
  }
  const double lp = settled_level(trace.v_p, trace.kind);
  const double ln = settled_level(trace.v_n, trace.kind);
  if (lp == 0.0 || ln == 0.0) throw Error(ErrorCode::NoCrossing, "trace has zero settled amplitude");
  return first_crossing(trace.time, trace.v_p, threshold_fraction * lp) -
         first_crossing(trace.time, trace.v_n, threshold_fraction * ln);
}

DbProfile dc_conversion_delta(const MixedModeNetwork& mm, Direction direction) {
  const auto& scd = direction == Direction::LeftToRight ? mm.scd21 : mm.scd12;
  const auto& sdd = direction == Direction::LeftToRight ? mm.sdd21 : mm.sdd12;
  DbProfile out;
  out.direction = direction;
  out.frequencies = mm.frequencies;
  out.values.assign(mm.size(), kNaN);
  out.excluded.assign(mm.size(), false);
  for (std::size_t k = 0; k < mm.size(); ++k) {
    const double d = std::abs(sdd[k]);
    if (d < kDegenerateMagnitude) {
      out.excluded[k] = true;
      continue;
    }
    const double c = std::abs(scd[k]);
    if (c == 0.0) {
      out.values[k] = kDbFloor;
      continue;
    }
    out.values[k] = std::max(20.0 * std::log10(c) - 20.0 * std::log10(d), kDbFloor);
  }
  return out;
}

double eips(const SkewProfile& profile, std::span<const double> weight, double f_min, double f_max) {
  if (weight.size() != profile.frequencies.size()) {
    throw Error(ErrorCode::GridMismatch, "weight and skew profile differ in length");
  }
  double num = 0.0;
  double den = 0.0;
  bool have = false;
  double f0 = 0.0, w0 = 0.0, s0 = 0.0;
  for (std::size_t k = 0; k < profile.frequencies.size(); ++k) {
    const double f = profile.frequencies[k];
    if (f < f_min || f > f_max || profile.excluded[k]) continue;
    const double w = weight[k];
    const double s = std::abs(profile.skew[k]);
    if (have) {
      const double h = f - f0;
      num += 0.5 * h * (w0 * s0 + w * s);
      den += 0.5 * h * (w0 + w);
    }
    have = true;
    f0 = f;
    w0 = w;
    s0 = s;
  }
  if (!(den > 0.0)) throw Error(ErrorCode::EmptyBand, "no weighted band to average skew over");
  return num / den;
}

}  // namespace skewlab
