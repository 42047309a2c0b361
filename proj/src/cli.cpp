#include "skewlab/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "skewlab/batch.hpp"
#include "skewlab/conventional.hpp"
#include "skewlab/deskew.hpp"
#include "skewlab/error.hpp"
#include "skewlab/report.hpp"
#include "skewlab/synth.hpp"
#include "skewlab/touchstone.hpp"

namespace skewlab::cli {

namespace fs = std::filesystem;

namespace {

struct FomFlags {
  std::string fb = "106.25e9";
  std::string fr, ft, fmin, fmax;
  std::string step = "10e6";
  bool literal = false;
  bool no_enforce = false;

  void attach(CLI::App* app) {
    app->add_option("--fb", fb, "signal rate f_b in Hz (suffix g/m/k allowed)");
    app->add_option("--fr", fr, "receiver 3 dB bandwidth, default 0.75*fb");
    app->add_option("--ft", ft, "transmit filter 3 dB bandwidth, default fb");
    app->add_option("--fmin", fmin, "FOM band start, default lowest measured frequency");
    app->add_option("--fmax", fmax, "FOM band end, default fb");
    app->add_option("--step", step, "FOM grid step in Hz");
    app->add_flag("--literal-fom", literal, "report mean(W*SILD^2) without the square root");
    app->add_flag("--no-enforce-reciprocity", no_enforce, "never symmetrize non-reciprocal input");
  }

  FomConfig config() const {
    FomConfig cfg;
    cfg.f_b = parse_frequency(fb);
    if (!fr.empty()) cfg.f_r = parse_frequency(fr);
    if (!ft.empty()) cfg.f_t = parse_frequency(ft);
    if (!fmin.empty()) cfg.f_min = parse_frequency(fmin);
    if (!fmax.empty()) cfg.f_max = parse_frequency(fmax);
    cfg.grid_step = parse_frequency(step);
    cfg.literal_mean_square = literal;
    cfg.validate();
    return cfg;
  }

  SildOptions sild_options() const {
    SildOptions o;
    o.enforce_reciprocity = !no_enforce;
    return o;
  }
};

// Writes to --out when given, otherwise to the data stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::Io, "cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void warn_about(const SildResult& r, std::ostream& err) {
  if (r.enforced_reciprocity) {
    err << "warning: reciprocity quality " << r.reciprocity_quality << " below 0.99; reciprocity enforced\n";
  }
  if (const auto nc = r.solution.nonconverged_count(); nc > 0) {
    err << "warning: de-skew did not converge at " << nc << " frequency point(s); excluded and bridged\n";
  }
}

void warn_band(const SingleEndedNetwork& net, const FomConfig& cfg, std::ostream& err) {
  const auto band = resolve_band(cfg, net.frequencies().front(), net.frequencies().back());
  if (band.clamped) {
    err << "warning: FOM band clamped to measured data [" << band.f_min << ", " << band.f_max << "] Hz\n";
  }
}

SingleEndedNetwork load(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  SingleEndedNetwork net = read_touchstone_file(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
  return net;
}

std::string curve_csv(const std::string& header, const std::vector<double>& x,
                      const std::vector<const std::vector<double>*>& ys) {
  std::string out = header + '\n';
  for (std::size_t k = 0; k < x.size(); ++k) {
    out += format_double(x[k]);
    for (const auto* y : ys) {
      out += ',';
      if (std::isfinite((*y)[k])) out += format_double((*y)[k]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (*end != '\0') throw CLI::ValidationError("--thresholds", "not a number: " + item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

double parse_frequency(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s.size() > 2 && s.ends_with("hz")) s.resize(s.size() - 2);
  double scale = 1.0;
  if (!s.empty()) {
    switch (s.back()) {
      case 'k': scale = 1e3; break;
      case 'm': scale = 1e6; break;
      case 'g': scale = 1e9; break;
      case 't': scale = 1e12; break;
      default: break;
    }
    if (scale != 1.0) s.pop_back();
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) {
    throw CLI::ValidationError("frequency", "cannot parse '" + std::string(text) + "'");
  }
  return v * scale;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intra-pair skew metrics for differential S-parameters", "skewlab"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "de-skew, SILD curve and FOM_SILD of one .s4p file");
  std::string an_file, an_format = "json", an_out;
  FomFlags an_fom;
  analyze->add_option("file", an_file, "Touchstone file")->required();
  an_fom.attach(analyze);
  analyze->add_option("--format", an_format)->check(CLI::IsMember({"json", "csv"}));
  analyze->add_option("--out", an_out, "output file, default stdout");

  // deskew
  auto* deskew = app.add_subcommand("deskew", "write the de-skewed network as Touchstone");
  std::string dk_file, dk_out, dk_format = "RI";
  deskew->add_option("file", dk_file)->required();
  deskew->add_option("--out", dk_out)->required();
  deskew->add_option("--format", dk_format, "Touchstone data format")
      ->check(CLI::IsMember({"RI", "MA", "DB"}, CLI::ignore_case));

  // skew
  auto* skew = app.add_subcommand("skew", "frequency-domain intra-pair phase skew");
  std::string sk_file, sk_dir = "21", sk_format = "json", sk_out;
  skew->add_option("file", sk_file)->required();
  skew->add_option("--direction", sk_dir)->check(CLI::IsMember({"21", "12"}));
  skew->add_option("--format", sk_format)->check(CLI::IsMember({"json", "csv"}));
  skew->add_option("--out", sk_out);

  // tdt
  auto* tdt = app.add_subcommand("tdt", "time-domain transmission response and edge skew");
  std::string td_file, td_exc = "step", td_format = "json", td_out;
  double td_rise = 10e-12, td_bit_time = 0.0, td_threshold = 0.5;
  int td_bits = 1;
  tdt->add_option("file", td_file)->required();
  tdt->add_option("--excitation", td_exc)->check(CLI::IsMember({"step", "pulse"}));
  tdt->add_option("--rise-time", td_rise, "20-80% rise time in seconds");
  tdt->add_option("--bits", td_bits, "pulse length in bits");
  tdt->add_option("--bit-time", td_bit_time, "bit time in seconds");
  tdt->add_option("--threshold", td_threshold, "fraction of settled amplitude")->check(CLI::Range(0.0, 1.0));
  tdt->add_option("--format", td_format)->check(CLI::IsMember({"json", "csv"}));
  tdt->add_option("--out", td_out);

  // batch
  auto* batch = app.add_subcommand("batch", "FOM_SILD statistics over every .s4p file in a directory");
  std::string bt_dir, bt_out, bt_thresholds = "0.1,0.2,0.3", bt_format = "json";
  double bt_bin = kDefaultBinWidth;
  FomFlags bt_fom;
  batch->add_option("dir", bt_dir)->required();
  batch->add_option("--out", bt_out, "report file, default stdout");
  batch->add_option("--thresholds", bt_thresholds, "comma-separated dB thresholds");
  batch->add_option("--bin-width", bt_bin, "histogram bin width in dB");
  batch->add_option("--format", bt_format)->check(CLI::IsMember({"json", "csv"}));
  bt_fom.attach(batch);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic skewed channel");
  double sy_skew_ps = 0.0, sy_length = 1.0, sy_loss = 0.0, sy_mode_delta_ps = 100.0;
  bool sy_coupled = false;
  std::string sy_out, sy_fmin = "10e6", sy_fmax = "110e9", sy_step = "10e6", sy_format = "RI";
  synth->add_option("--skew-ps", sy_skew_ps, "P-minus-N single-ended delay in ps")->check(CLI::NonNegativeNumber);
  synth->add_flag("--coupled", sy_coupled, "place the delay in front of a coupled line");
  synth->add_option("--out", sy_out)->required();
  synth->add_option("--length", sy_length, "line length in m");
  synth->add_option("--loss", sy_loss, "loss in dB/(m*sqrt(GHz))");
  synth->add_option("--mode-delta-ps", sy_mode_delta_ps, "odd minus even mode delay of the coupled line in ps");
  synth->add_option("--fmin", sy_fmin);
  synth->add_option("--fmax", sy_fmax);
  synth->add_option("--step", sy_step);
  synth->add_option("--format", sy_format)->check(CLI::IsMember({"RI", "MA", "DB"}, CLI::ignore_case));

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("skewlab");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*analyze) {
      const FomConfig cfg = an_fom.config();
      const SingleEndedNetwork net = load(an_file, err);
      warn_band(net, cfg, err);
      const SildResult res = compute_sild(net, cfg, an_fom.sild_options());
      warn_about(res, err);
      const ChannelRecord rec = make_record(res, an_file);
      Sink sink(an_out, out);
      if (an_format == "json") {
        sink.get() << to_json(res, rec).dump(2) << '\n';
      } else {
        sink.get() << kRecordCsvHeader << '\n' << record_csv_row(rec) << "\n\n"
                   << curve_csv("frequency_hz,sild_db,sild_21_db,sild_12_db,eq_skew_s", res.frequencies,
                                {&res.sild, &res.sild_21, &res.sild_12, &res.eq_skew});
      }
      return kExitOk;
    }
    if (*deskew) {
      const SingleEndedNetwork net = load(dk_file, err);
      const DeskewSolution sol = solve_deskew(net);
      if (const auto nc = sol.nonconverged_count(); nc > 0) {
        err << "warning: de-skew did not converge at " << nc << " frequency point(s)\n";
      }
      TouchstoneOptions opts;
      opts.format = parse_data_format(dk_format);
      write_touchstone_file(dk_out, apply_deskew(net, sol), opts);
      return kExitOk;
    }
    if (*skew) {
      const SingleEndedNetwork net = load(sk_file, err);
      const SkewProfile prof =
          phase_skew(to_mixed_mode(net), sk_dir == "21" ? Direction::LeftToRight : Direction::RightToLeft);
      if (const auto nx = std::count(prof.excluded.begin(), prof.excluded.end(), true); nx > 0) {
        err << "warning: " << nx << " point(s) with degenerate magnitude excluded\n";
      }
      Sink sink(sk_out, out);
      if (sk_format == "json") {
        sink.get() << to_json(prof).dump(2) << '\n';
      } else {
        sink.get() << curve_csv("frequency_hz,skew_s,t_first_s,t_second_s", prof.frequencies,
                                {&prof.skew, &prof.t_first, &prof.t_second});
      }
      return kExitOk;
    }
    if (*tdt) {
      Excitation exc;
      exc.kind = td_exc == "step" ? Excitation::Kind::Step : Excitation::Kind::Pulse;
      exc.rise_time = td_rise;
      exc.bit_count = td_bits;
      exc.bit_time = td_bit_time;
      const SingleEndedNetwork net = load(td_file, err);
      const TdtTrace trace = tdt_response(net, exc);
      const double sk = tdt_skew(trace, td_threshold);
      Sink sink(td_out, out);
      if (td_format == "json") {
        sink.get() << to_json(trace, td_threshold, sk).dump(2) << '\n';
      } else {
        sink.get() << "# tdt_skew_s=" << format_double(sk) << " threshold=" << format_double(td_threshold) << '\n'
                   << curve_csv("time_s,v_p,v_n", trace.time, {&trace.v_p, &trace.v_n});
      }
      return kExitOk;
    }
    if (*batch) {
      const FomConfig cfg = bt_fom.config();
      const auto thresholds = parse_thresholds(bt_thresholds);
      if (!fs::is_directory(bt_dir)) throw Error(ErrorCode::Io, bt_dir + " is not a directory");
      std::vector<fs::path> paths;
      for (const auto& entry : fs::directory_iterator(bt_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".s4p") paths.push_back(entry.path());
      }
      std::sort(paths.begin(), paths.end());
      const BatchReport report =
          analyze_batch(paths, cfg, bt_bin, thresholds, threads_from_env(), bt_fom.sild_options());
      for (const auto& e : report.errors) err << "warning: " << e.source_id << ": " << e.message << '\n';
      for (const auto& r : report.records) {
        if (r.enforced_reciprocity) err << "warning: " << r.source_id << ": reciprocity enforced\n";
        if (r.nonconverged_points > 0) {
          err << "warning: " << r.source_id << ": " << r.nonconverged_points << " non-converged point(s)\n";
        }
      }
      Sink sink(bt_out, out);
      if (bt_format == "json") {
        sink.get() << to_json(report).dump(2) << '\n';
      } else {
        sink.get() << to_csv(report);
      }
      return report.errors.empty() ? kExitOk : kExitFailure;
    }
    if (*synth) {
      const auto grid = linear_grid(parse_frequency(sy_fmin), parse_frequency(sy_fmax), parse_frequency(sy_step));
      const double skew_s = sy_skew_ps * 1e-12;
      SingleEndedNetwork net;
      if (sy_coupled) {
        LineSpec line;
        line.length = sy_length;
        line.loss_coeff = sy_loss;
        line.even_delay_per_m = line.odd_delay_per_m - sy_mode_delta_ps * 1e-12 / sy_length;
        net = build_channel({{SeDelaySegment{skew_s, 0.0}, CoupledSegment{line}}, grid});
      } else {
        LineSpec line;
        line.length = sy_length;
        line.loss_coeff = sy_loss;
        line.p_excess_delay = skew_s;
        net = make_uncoupled_pair(line, grid);
      }
      TouchstoneOptions opts;
      opts.format = parse_data_format(sy_format);
      write_touchstone_file(sy_out, net, opts);
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace skewlab::cli
