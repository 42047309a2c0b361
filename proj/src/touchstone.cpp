#include "skewlab/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kDeg = kPi / 180.0;

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_number(std::string_view tok) {
  std::string buf(tok);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct DataLine {
  std::size_t line_no;
  std::vector<double> values;
};

struct OptionState {
  TouchstoneOptions options;
  bool seen = false;
};

void parse_option_line(std::string_view body, std::size_t line_no, OptionState& st) {
  if (st.seen) return;  // only the first option line counts
  st.seen = true;
  const auto toks = split_ws(body);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string t = upper(toks[i]);
    if (t == "HZ") st.options.frequency_unit = FrequencyUnit::Hz;
    else if (t == "KHZ") st.options.frequency_unit = FrequencyUnit::kHz;
    else if (t == "MHZ") st.options.frequency_unit = FrequencyUnit::MHz;
    else if (t == "GHZ") st.options.frequency_unit = FrequencyUnit::GHz;
    else if (t == "S") continue;
    else if (t == "Y" || t == "Z" || t == "G" || t == "H") {
      throw Error(ErrorCode::UnsupportedParameter, "option line declares " + t + "-parameters");
    } else if (t == "RI" || t == "MA" || t == "DB") st.options.format = parse_data_format(t);
    else if (t == "R") {
      std::optional<double> r;
      if (i + 1 < toks.size()) r = to_number(toks[i + 1]);
      if (!r || *r <= 0.0) {
        throw Error(ErrorCode::MalformedRecord,
                    "line " + std::to_string(line_no) + ": reference resistance must be a positive number");
      }
      st.options.reference_resistance = *r;
      ++i;
    } else {
      throw Error(ErrorCode::MalformedRecord,
                  "line " + std::to_string(line_no) + ": unknown option token '" + std::string(toks[i]) + "'");
    }
  }
}

cplx decode(double a, double b, DataFormat fmt) {
  switch (fmt) {
    case DataFormat::RI: return {a, b};
    case DataFormat::MA: return std::polar(a, b * kDeg);
    case DataFormat::DB: return std::polar(std::pow(10.0, a / 20.0), b * kDeg);
  }
  return {};
}

struct Blocks {
  std::vector<std::vector<double>> blocks;
  std::string error;
};

// Groups data lines into blocks of 1 + 2n^2 values. A block must start at
// the beginning of a line.
Blocks group_blocks(const std::vector<DataLine>& lines, int ports) {
  const std::size_t per = 1 + 2 * static_cast<std::size_t>(ports * ports);
  Blocks out;
  std::vector<double> cur;
  for (const auto& line : lines) {
    if (cur.size() + line.values.size() > per) {
      out.error = "line " + std::to_string(line.line_no) + ": expected " + std::to_string(per) +
                  " values per frequency block, record overruns the block";
      return out;
    }
    cur.insert(cur.end(), line.values.begin(), line.values.end());
    if (cur.size() == per) {
      out.blocks.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) {
    out.error = "truncated final block: " + std::to_string(cur.size()) + " of " + std::to_string(per) + " values";
  }
  return out;
}

void write_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write_pair(std::string& out, cplx z, DataFormat fmt) {
  double a = 0.0;
  double b = 0.0;
  switch (fmt) {
    case DataFormat::RI:
      a = z.real();
      b = z.imag();
      break;
    case DataFormat::MA:
      a = std::abs(z);
      b = std::arg(z) / kDeg;
      break;
    case DataFormat::DB: {
      const double m = std::abs(z);
      a = m > 0.0 ? std::max(20.0 * std::log10(m), kTouchstoneDbFloor) : kTouchstoneDbFloor;
      b = std::arg(z) / kDeg;
      break;
    }
  }
  out += ' ';
  write_number(out, a);
  out += ' ';
  write_number(out, b);
}

}  // namespace

double unit_scale(FrequencyUnit unit) {
  switch (unit) {
    case FrequencyUnit::Hz: return 1.0;
    case FrequencyUnit::kHz: return 1e3;
    case FrequencyUnit::MHz: return 1e6;
    case FrequencyUnit::GHz: return 1e9;
  }
  return 1.0;
}

std::string_view to_string(FrequencyUnit unit) {
  switch (unit) {
    case FrequencyUnit::Hz: return "HZ";
    case FrequencyUnit::kHz: return "KHZ";
    case FrequencyUnit::MHz: return "MHZ";
    case FrequencyUnit::GHz: return "GHZ";
  }
  return "GHZ";
}

std::string_view to_string(DataFormat format) {
  switch (format) {
    case DataFormat::RI: return "RI";
    case DataFormat::MA: return "MA";
    case DataFormat::DB: return "DB";
  }
  return "MA";
}

DataFormat parse_data_format(std::string_view text) {
  const std::string t = upper(text);
  if (t == "RI") return DataFormat::RI;
  if (t == "MA") return DataFormat::MA;
  if (t == "DB") return DataFormat::DB;
  throw Error(ErrorCode::InvalidArgument, "unknown data format '" + std::string(text) + "'");
}

SingleEndedNetwork parse_touchstone(std::string_view text, int expected_ports, std::vector<std::string>* warnings) {
  if (expected_ports != 2 && expected_ports != 4) {
    throw Error(ErrorCode::PortCountMismatch, "only 2- and 4-port files are supported");
  }
  OptionState opt;
  std::vector<DataLine> lines;
  std::size_t line_no = 0;
  double last_line_freq = -1.0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto bang = line.find('!'); bang != std::string_view::npos) line = line.substr(0, bang);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.front().front() == '[') {
      throw Error(ErrorCode::UnsupportedVersion,
                  "line " + std::to_string(line_no) + ": Touchstone v2 keyword " + std::string(toks.front()));
    }
    if (toks.front().front() == '#') {
      const auto hash = line.find('#');
      parse_option_line(line.substr(hash + 1), line_no, opt);
      continue;
    }
    DataLine dl{line_no, {}};
    dl.values.reserve(toks.size());
    for (auto t : toks) {
      const auto v = to_number(t);
      if (!v) {
        throw Error(ErrorCode::MalformedRecord,
                    "line " + std::to_string(line_no) + ": not a number '" + std::string(t) + "'");
      }
      dl.values.push_back(*v);
    }
    // A 2-port noise block starts with a frequency not above the last S-parameter frequency.
    if (expected_ports == 2 && dl.values.size() == 5 && last_line_freq >= 0.0 &&
        dl.values.front() <= last_line_freq) {
      if (warnings) warnings->push_back("noise-parameter section at line " + std::to_string(line_no) + " ignored");
      break;
    }
    if (expected_ports == 2 && dl.values.size() == 9) last_line_freq = dl.values.front();
    lines.push_back(std::move(dl));
  }

  Blocks grouped = group_blocks(lines, expected_ports);
  if (!grouped.error.empty()) {
    const int other = expected_ports == 2 ? 4 : 2;
    if (!lines.empty() && group_blocks(lines, other).error.empty()) {
      throw Error(ErrorCode::PortCountMismatch, "data is laid out for " + std::to_string(other) +
                                                    " ports, expected " + std::to_string(expected_ports));
    }
    throw Error(ErrorCode::MalformedRecord, grouped.error);
  }
  if (grouped.blocks.empty()) throw Error(ErrorCode::MalformedRecord, "no data records");

  const double scale = unit_scale(opt.options.frequency_unit);
  const int n = expected_ports;
  std::vector<double> freqs;
  std::vector<SMatrix> mats;
  freqs.reserve(grouped.blocks.size());
  mats.reserve(grouped.blocks.size());
  for (const auto& b : grouped.blocks) {
    const double f = b[0] * scale;
    if (!(f > 0.0)) throw Error(ErrorCode::MalformedRecord, "frequencies must be positive");
    if (!freqs.empty() && !(f > freqs.back())) {
      std::ostringstream os;
      os << "frequency " << f << " Hz follows " << freqs.back() << " Hz";
      throw Error(ErrorCode::NonMonotonicFrequency, os.str());
    }
    SMatrix s(n, n);
    if (n == 2) {
      s(0, 0) = decode(b[1], b[2], opt.options.format);
      s(1, 0) = decode(b[3], b[4], opt.options.format);
      s(0, 1) = decode(b[5], b[6], opt.options.format);
      s(1, 1) = decode(b[7], b[8], opt.options.format);
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const std::size_t at = 1 + 2 * static_cast<std::size_t>(i * n + j);
          s(i, j) = decode(b[at], b[at + 1], opt.options.format);
        }
    }
    if (!s.allFinite()) throw Error(ErrorCode::MalformedRecord, "non-finite S-parameter value");
    freqs.push_back(f);
    mats.push_back(std::move(s));
  }
  return SingleEndedNetwork(std::move(freqs), std::move(mats));
}

std::string write_touchstone(const SingleEndedNetwork& net, const TouchstoneOptions& options) {
  if (!(options.reference_resistance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "reference resistance must be positive");
  }
  std::string out;
  out.reserve(net.size() * (net.ports() == 4 ? 900 : 240) + 64);
  out += "! skewlab ";
  out += std::to_string(net.ports());
  out += "-port S-parameters\n# ";
  out += to_string(options.frequency_unit);
  out += " S ";
  out += to_string(options.format);
  out += " R ";
  write_number(out, options.reference_resistance);
  out += '\n';
  const double scale = unit_scale(options.frequency_unit);
  const int n = net.ports();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const SMatrix& s = net.s(k);
    write_number(out, net.frequencies()[k] / scale);
    if (n == 2) {
      write_pair(out, s(0, 0), options.format);
      write_pair(out, s(1, 0), options.format);
      write_pair(out, s(0, 1), options.format);
      write_pair(out, s(1, 1), options.format);
      out += '\n';
      continue;
    }
    for (int i = 0; i < n; ++i) {
      if (i > 0) out += ' ';
      for (int j = 0; j < n; ++j) write_pair(out, s(i, j), options.format);
      out += '\n';
    }
  }
  return out;
}

int ports_from_extension(const std::filesystem::path& path) {
  const std::string ext = upper(path.extension().string());
  if (ext == ".S2P") return 2;
  return 4;
}

SingleEndedNetwork read_touchstone_file(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_touchstone(ss.str(), ports_from_extension(path), warnings);
}

void write_touchstone_file(const std::filesystem::path& path, const SingleEndedNetwork& net,
                           const TouchstoneOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << write_touchstone(net, options);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace skewlab
