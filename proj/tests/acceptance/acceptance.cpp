// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "skewlab/batch.hpp"
#include "skewlab/conventional.hpp"
#include "skewlab/deskew.hpp"
#include "skewlab/network.hpp"
#include "skewlab/report.hpp"
#include "skewlab/synth.hpp"
#include "skewlab/touchstone.hpp"

#ifndef SKEWLAB_BINARY
#error "SKEWLAB_BINARY must point at the skewlab executable"
#endif

using namespace skewlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPs = 1e-12;
constexpr double kFs = 1e-15;
const double kPiD = std::acos(-1.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Linear interpolation of y at x on an increasing grid.
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const std::size_t k = std::clamp<std::size_t>(it - xs.begin(), 1, xs.size() - 1);
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

// First upward crossing of `level`, linearly interpolated.
double crossing(const std::vector<double>& t, const std::vector<double>& v, double level) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i - 1] < level && v[i] >= level) return t[i - 1] + (level - v[i - 1]) / (v[i] - v[i - 1]) * (t[i] - t[i - 1]);
  }
  return std::nan("");
}

double wrap(double a) { return std::atan2(std::sin(a), std::cos(a)); }

// Residual intra-pair skew in seconds of a network, both directions.
double residual_skew(const SMatrix& s, double f) {
  const cplx a21 = s(1, 0) - s(1, 2), b21 = s(3, 2) - s(3, 0);
  const cplx a12 = s(0, 1) - s(0, 3), b12 = s(2, 3) - s(2, 1);
  const double w = 2.0 * kPiD * f;
  return std::max(std::abs(wrap(std::arg(a21) - std::arg(b21))), std::abs(wrap(std::arg(a12) - std::arg(b12)))) / w;
}

cplx sdd21_of(const SMatrix& s) { return 0.5 * (s(1, 0) - s(1, 2) - s(3, 0) + s(3, 2)); }
cplx sdd12_of(const SMatrix& s) { return 0.5 * (s(0, 1) - s(0, 3) - s(2, 1) + s(2, 3)); }

// SE delay -> coupled line -> SE delay with random parameters.
SingleEndedNetwork random_coupled_channel(std::mt19937_64& rng, const std::vector<double>& grid) {
  std::uniform_real_distribution<double> se(0.0, 5 * kPs), len(0.2, 1.5), dmode(20 * kPs, 150 * kPs),
      loss(0.0, 2.0), closs(0.8, 1.5);
  LineSpec line;
  line.length = len(rng);
  line.even_delay_per_m = line.odd_delay_per_m - dmode(rng) / line.length;
  line.loss_coeff = loss(rng);
  line.common_loss_coeff = line.loss_coeff * closs(rng);
  return build_channel({{SeDelaySegment{se(rng), se(rng)}, CoupledSegment{line}, SeDelaySegment{se(rng), se(rng)}},
                        grid});
}

// 1. SILD of an uncoupled skewed pair against the cosine law.
Outcome closed_form_oracle() {
  const auto t0 = Clock::now();
  const auto grid = linear_grid(10e6, 110e9, 10e6);
  double worst = 0.0, worst_eq = 0.0;
  for (double dt_ps : {1.0, 2.0, 3.0}) {
    const double dt = dt_ps * kPs;
    LineSpec line;
    line.p_excess_delay = dt;
    const SildResult res = compute_sild(make_uncoupled_pair(line, grid));
    const double first_null = 0.5 / dt;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] >= first_null) break;
      const double expect = 20.0 * std::log10(std::abs(std::cos(kPiD * grid[k] * dt)));
      const double err = std::isfinite(res.sild[k]) ? std::abs(res.sild[k] - expect) : 1e9;
      worst = std::max(worst, err);
    }
    const double f = 53.125e9;
    const double eq = eq_skew(interp(res.frequencies, res.sild, f), f);
    worst_eq = std::max(worst_eq, std::abs(eq - dt));
  }
  const double secs = seconds_since(t0);
  return {worst < 0.02 && worst_eq < 0.05 * kPs && secs < 5.0,
          fmt("max |SILD - cosine law| %.3g dB, max eq_skew error %.3g ps, %.2f s", worst, worst_eq / kPs, secs)};
}

// 2. De-skewing nulls the phase skew of random coupled channels.
Outcome nulling() {
  std::mt19937_64 rng(20240611);
  const auto grid = linear_grid(20e6, 110e9, 100e6);
  std::size_t total = 0, good = 0, unflagged_bad = 0, flagged = 0;
  for (int c = 0; c < 50; ++c) {
    const auto net = random_coupled_channel(rng, grid);
    const DeskewSolution sol = solve_deskew(net);
    const auto fixed = apply_deskew(net, sol);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ++total;
      const bool ok = residual_skew(fixed.s(k), grid[k]) < 1 * kFs;
      if (ok) ++good;
      if (!sol.converged[k]) ++flagged;
      if (!ok && sol.converged[k]) ++unflagged_bad;
    }
  }
  const double frac = static_cast<double>(good) / static_cast<double>(total);
  return {frac >= 0.99 && unflagged_bad == 0,
          fmt("%.5f of %g points below 1 fs, %g flagged non-converged, %g unflagged failures", frac,
              static_cast<double>(total), static_cast<double>(flagged), static_cast<double>(unflagged_bad))};
}

// 3. Metric is the same in both directions for reciprocal networks.
Outcome direction_reciprocity() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> se(0.0, 6 * kPs), len(0.1, 1.0), dmode(0.0, 120 * kPs), loss(0.0, 2.0),
      closs(0.7, 1.6);
  std::uniform_int_distribution<int> kind(0, 2), count(1, 4);
  const auto grid = linear_grid(50e6, 60e9, 250e6);
  double worst_sild = 0.0, worst_mag = 0.0;
  for (int n = 0; n < 100; ++n) {
    ChannelSpec spec;
    spec.grid = grid;
    const int segs = count(rng);
    for (int i = 0; i < segs; ++i) {
      LineSpec line;
      line.length = len(rng);
      line.loss_coeff = loss(rng);
      switch (kind(rng)) {
        case 0: spec.segments.push_back(SeDelaySegment{se(rng), se(rng)}); break;
        case 1:
          line.p_excess_delay = se(rng);
          spec.segments.push_back(UncoupledSegment{line});
          break;
        default:
          line.even_delay_per_m = line.odd_delay_per_m - dmode(rng) / line.length;
          line.common_loss_coeff = line.loss_coeff * closs(rng);
          spec.segments.push_back(CoupledSegment{line});
      }
    }
    const auto net = build_channel(spec);
    const SildResult res = compute_sild(net);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (std::isfinite(res.sild_21[k]) && std::isfinite(res.sild_12[k])) {
        worst_sild = std::max(worst_sild, std::abs(res.sild_21[k] - res.sild_12[k]));
      }
    }
    const auto fixed = apply_deskew(net, res.solution);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      worst_mag = std::max(worst_mag, std::abs(std::abs(sdd21_of(fixed.s(k))) - std::abs(sdd12_of(fixed.s(k)))));
    }
  }
  return {worst_sild < 1e-9 && worst_mag < 1e-12,
          fmt("max |SILD21 - SILD12| %.3g dB, max ||S0dd21| - |S0dd12|| %.3g", worst_sild, worst_mag)};
}

// 4. Single-ended delay ahead of a coupled pair, delay swept 0..3 ps.
Outcome delay_sweep() {
  const auto t0 = Clock::now();
  const auto grid = linear_grid(10e6, 53.125e9, 10e6);
  LineSpec line;
  line.length = 0.5;
  line.even_delay_per_m = line.odd_delay_per_m - 100 * kPs / line.length;
  std::vector<std::vector<double>> near, through;
  for (int d = 0; d <= 3; ++d) {
    const auto net = build_channel({{SeDelaySegment{d * kPs, 0.0}, CoupledSegment{line}}, grid});
    const auto mm = to_mixed_mode(net);
    near.push_back(phase_skew(mm, Direction::RightToLeft).skew);
    through.push_back(phase_skew(mm, Direction::LeftToRight).skew);
  }
  double worst_shift = 0.0;
  for (int a = 0; a <= 3; ++a) {
    for (int b = a + 1; b <= 3; ++b) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(near[a][k]) || !std::isfinite(near[b][k])) continue;
        worst_shift = std::max(worst_shift, std::abs(near[b][k] - near[a][k] - (b - a) * kPs));
      }
    }
  }
  double worst_mean = 0.0, worst_peak_err = 0.0;
  for (int d = 1; d <= 3; ++d) {
    double sum = 0.0, peak = 0.0;
    std::size_t n = 0;
    for (double v : through[d]) {
      if (!std::isfinite(v)) continue;
      sum += v;
      peak = std::max(peak, std::abs(v));
      ++n;
    }
    worst_mean = std::max(worst_mean, std::abs(sum / static_cast<double>(n)));
    worst_peak_err = std::max(worst_peak_err, std::abs(peak - d * kPs) / (d * kPs));
  }
  const double secs = seconds_since(t0);
  return {worst_shift < 0.05 * kPs && worst_mean < 0.2 * kPs && worst_peak_err < 0.2 && secs < 10.0,
          fmt("shift deviation %.3g ps, |mean| %.3g ps, peak error %.1f%%, %.2f s", worst_shift / kPs,
              worst_mean / kPs, 100 * worst_peak_err, secs)};
}

// 5. FOM grows with skew.
Outcome fom_monotone() {
  const auto grid = linear_grid(10e6, 110e9, 10e6);
  std::vector<double> foms;
  for (int i = 0; i <= 8; ++i) {
    LineSpec line;
    line.p_excess_delay = 0.5 * i * kPs;
    foms.push_back(compute_sild(make_uncoupled_pair(line, grid)).fom_sild);
  }
  bool ok = true;
  for (std::size_t i = 1; i < foms.size(); ++i) ok = ok && foms[i] > foms[i - 1];
  std::ostringstream os;
  os << "FOM_SILD dB:";
  for (double v : foms) os << ' ' << format_double(v);
  return {ok, os.str()};
}

// 6. Weight function values.
Outcome weight_values() {
  FomConfig cfg;
  const double fb = cfg.f_b;
  const double x = 0.5;
  const double sinc = std::sin(kPiD * x) / (kPiD * x);
  const double expect = sinc * sinc / (1.0 + std::pow(x / 0.75, 8)) / (1.0 + std::pow(x, 4));
  const double w0 = fom_weight(0.0, cfg), w1 = fom_weight(fb, cfg), wh = fom_weight(0.5 * fb, cfg);
  const bool ok = std::abs(w0 - 1.0) < 1e-12 && std::abs(w1) < 1e-12 && std::abs(wh - 0.367) < 1e-3 &&
                  std::abs(wh - expect) < 1e-12;
  return {ok, fmt("W(0)=%.15g W(fb)=%.3g W(fb/2)=%.6f (scalar %.6f)", w0, w1, wh, expect)};
}

// 7. Time-domain edge timing.
Outcome tdt_edges() {
  const auto grid = linear_grid(10e6, 250e9, 10e6);
  Excitation exc;
  exc.rise_time = 10 * kPs;
  const TdtTrace ideal = tdt_response(make_se_delay(100 * kPs, 100 * kPs, grid), exc);
  const double settled = ideal.v_p.back();
  const double t50 = crossing(ideal.time, ideal.v_p, 0.5 * settled);
  const double dt1 = ideal.time_step();
  bool ok = std::abs(t50 - 105 * kPs) <= dt1;
  std::string detail = fmt("50%% crossing %.4f ps (step %.4f ps); skew", t50 / kPs, dt1 / kPs);

  LineSpec line;
  line.length = 0.02;
  line.p_excess_delay = 3 * kPs;
  const TdtTrace skewed = tdt_response(make_uncoupled_pair(line, grid), exc);
  for (double th : {0.2, 0.5, 0.8}) {
    const double s = tdt_skew(skewed, th);
    ok = ok && std::abs(s - 3 * kPs) <= skewed.time_step();
    detail += fmt(" %.4f", s / kPs);
  }
  detail += " ps";
  return {ok, detail};
}

// 8. Touchstone write/parse round trip.
Outcome touchstone_round_trip() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> npts(1, 6), unit(0, 3);
  const DataFormat formats[] = {DataFormat::RI, DataFormat::MA, DataFormat::DB};
  const FrequencyUnit units[] = {FrequencyUnit::Hz, FrequencyUnit::kHz, FrequencyUnit::MHz, FrequencyUnit::GHz};
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const int m = npts(rng);
    std::vector<double> freqs;
    double f = 1e6 + u(rng) * 1e9;
    std::vector<SMatrix> mats;
    for (int k = 0; k < m; ++k) {
      freqs.push_back(f);
      f += 1e3 + u(rng) * 5e9;
      SMatrix s(4, 4);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) s(i, j) = std::polar(std::pow(10.0, -4.0 * u(rng)), 2.0 * kPiD * (u(rng) - 0.5));
      }
      mats.push_back(s);
    }
    const SingleEndedNetwork net(freqs, mats);
    TouchstoneOptions opts;
    opts.format = formats[n % 3];
    opts.frequency_unit = units[unit(rng)];
    const SingleEndedNetwork back = parse_touchstone(write_touchstone(net, opts), 4);
    if (back.size() != net.size()) return {false, "point count changed"};
    for (std::size_t k = 0; k < net.size(); ++k) {
      worst = std::max(worst, std::abs(back.frequencies()[k] - freqs[k]) / freqs[k]);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          worst = std::max(worst, std::abs(back.s(k)(i, j) - mats[k](i, j)) / std::abs(mats[k](i, j)));
        }
      }
    }
  }
  return {worst <= 1e-12, fmt("max relative error %.3g over 1000 networks", worst)};
}

// 9. Batch statistics and CLI/library agreement.
Outcome batch_pipeline() {
  const fs::path dir = fs::temp_directory_path() / ("skewlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> skew(0.0, 4.0 * kPs), loss(0.0, 1.5);
  std::bernoulli_distribution coupled(0.3);
  const auto grid = linear_grid(50e6, 110e9, 250e6);
  std::vector<fs::path> paths;
  for (int i = 0; i < 200; ++i) {
    LineSpec line;
    line.length = 0.3;
    line.loss_coeff = loss(rng);
    SingleEndedNetwork net;
    if (coupled(rng)) {
      line.even_delay_per_m = line.odd_delay_per_m - 60 * kPs / line.length;
      net = build_channel({{SeDelaySegment{skew(rng), 0.0}, CoupledSegment{line}}, grid});
    } else {
      line.p_excess_delay = skew(rng);
      net = make_uncoupled_pair(line, grid);
    }
    char name[32];
    std::snprintf(name, sizeof name, "ch%03d.s4p", i);
    paths.push_back(dir / name);
    TouchstoneOptions opts;
    opts.format = DataFormat::RI;
    write_touchstone_file(paths.back(), net, opts);
  }
  std::vector<double> thresholds;
  for (int i = 0; i <= 20; ++i) thresholds.push_back(0.05 * i);
  const FomConfig cfg;
  const BatchReport lib = analyze_batch(paths, cfg, kDefaultBinWidth, thresholds);

  std::size_t hist_sum = 0;
  for (const auto& b : lib.histogram) hist_sum += b.count;
  bool monotone = true;
  bool fractions_match = true;
  for (std::size_t i = 0; i < lib.fraction_below.size(); ++i) {
    if (i > 0) monotone = monotone && lib.fraction_below[i].fraction >= lib.fraction_below[i - 1].fraction;
    const double th = lib.fraction_below[i].threshold;
    const auto below = std::count_if(lib.records.begin(), lib.records.end(),
                                     [&](const ChannelRecord& r) { return r.fom_sild < th; });
    fractions_match = fractions_match &&
                      lib.fraction_below[i].fraction == static_cast<double>(below) / static_cast<double>(lib.records.size());
  }

  std::string ths;
  for (double t : thresholds) ths += (ths.empty() ? "" : ",") + format_double(t);
  const fs::path out = dir / "report.json";
  const std::string cmd = std::string("SKEWLAB_THREADS=3 \"") + SKEWLAB_BINARY + "\" batch \"" + dir.string() +
                          "\" --thresholds " + ths + " --out \"" + out.string() + "\" 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  bool identical = false;
  if (rc == 0) {
    std::ifstream in(out);
    BatchReport cli = report_from_json(nlohmann::json::parse(in));
    // The CLI reports paths as it found them; compare against the same strings.
    identical = cli == lib;
  }
  fs::remove_all(dir);
  const bool ok = lib.records.size() == 200 && lib.errors.empty() && hist_sum == lib.records.size() && monotone &&
                  fractions_match && identical;
  return {ok, fmt("%g records, histogram sum %g, monotone %g, CLI exit %g", static_cast<double>(lib.records.size()),
                  static_cast<double>(hist_sum), monotone ? 1.0 : 0.0, rc) +
                  (identical ? ", CLI report identical" : ", CLI report differs")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"closed-form skew oracle", closed_form_oracle},
      {"de-skew nulling", nulling},
      {"direction reciprocity", direction_reciprocity},
      {"delay sweep ahead of coupled pair", delay_sweep},
      {"FOM monotonicity", fom_monotone},
      {"weight function values", weight_values},
      {"time-domain edge timing", tdt_edges},
      {"Touchstone round trip", touchstone_round_trip},
      {"batch pipeline", batch_pipeline},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
