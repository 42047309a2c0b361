#include "skewlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

using nlohmann::json;

json curve(const std::vector<double>& x, const std::vector<double>& y) {
  json out = json::array();
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.push_back(json::array({x[k], std::isfinite(y[k]) ? json(y[k]) : json(nullptr)}));
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_flags(const ChannelRecord& rec) {
  std::string out;
  if (rec.enforced_reciprocity) out += "enforced_reciprocity";
  if (rec.nonconverged_points > 0) {
    if (!out.empty()) out += ';';
    out += "nonconverged_points=" + std::to_string(rec.nonconverged_points);
  }
  return out;
}

json to_json(const ChannelRecord& rec) {
  return {
      {"source_id", rec.source_id},
      {"fom_sild_db", rec.fom_sild},
      {"max_abs_sild_db", rec.max_abs_sild},
      {"f_min_hz", rec.f_min},
      {"f_max_hz", rec.f_max},
      {"reciprocity_quality", rec.reciprocity_quality},
      {"flags", {{"enforced_reciprocity", rec.enforced_reciprocity},
                 {"nonconverged_points", rec.nonconverged_points}}},
  };
}

ChannelRecord record_from_json(const json& j) {
  ChannelRecord rec;
  rec.source_id = j.at("source_id").get<std::string>();
  rec.fom_sild = j.at("fom_sild_db").get<double>();
  rec.max_abs_sild = j.at("max_abs_sild_db").get<double>();
  rec.f_min = j.at("f_min_hz").get<double>();
  rec.f_max = j.at("f_max_hz").get<double>();
  rec.reciprocity_quality = j.at("reciprocity_quality").get<double>();
  rec.enforced_reciprocity = j.at("flags").at("enforced_reciprocity").get<bool>();
  rec.nonconverged_points = j.at("flags").at("nonconverged_points").get<std::size_t>();
  return rec;
}

json to_json(const BatchReport& report) {
  json j;
  j["schema"] = kReportSchema;
  j["bin_width_db"] = report.bin_width;
  j["records"] = json::array();
  for (const auto& r : report.records) j["records"].push_back(to_json(r));
  j["errors"] = json::array();
  for (const auto& e : report.errors) j["errors"].push_back({{"source_id", e.source_id}, {"message", e.message}});
  j["histogram"] = json::array();
  for (const auto& b : report.histogram) {
    j["histogram"].push_back({{"bin_low_db", b.low}, {"bin_high_db", b.high}, {"count", b.count}});
  }
  j["fraction_below"] = json::array();
  for (const auto& f : report.fraction_below) {
    j["fraction_below"].push_back({{"threshold_db", f.threshold}, {"fraction", f.fraction}});
  }
  return j;
}

BatchReport report_from_json(const json& j) {
  if (!j.is_object() || j.value("schema", std::string{}) != kReportSchema) {
    throw Error(ErrorCode::InvalidArgument, "not a " + std::string(kReportSchema) + " document");
  }
  BatchReport report;
  report.bin_width = j.at("bin_width_db").get<double>();
  for (const auto& r : j.at("records")) report.records.push_back(record_from_json(r));
  for (const auto& e : j.at("errors")) {
    report.errors.push_back({e.at("source_id").get<std::string>(), e.at("message").get<std::string>()});
  }
  for (const auto& b : j.at("histogram")) {
    report.histogram.push_back(
        {b.at("bin_low_db").get<double>(), b.at("bin_high_db").get<double>(), b.at("count").get<std::size_t>()});
  }
  for (const auto& f : j.at("fraction_below")) {
    report.fraction_below.push_back({f.at("threshold_db").get<double>(), f.at("fraction").get<double>()});
  }
  return report;
}

std::string record_csv_row(const ChannelRecord& rec) {
  std::string row = csv_field(rec.source_id);
  for (double v : {rec.fom_sild, rec.max_abs_sild, rec.f_min, rec.f_max, rec.reciprocity_quality}) {
    row += ',';
    row += format_double(v);
  }
  row += ',';
  row += format_flags(rec);
  return row;
}

std::string to_csv(const BatchReport& report) {
  std::string out(kRecordCsvHeader);
  out += '\n';
  for (const auto& r : report.records) {
    out += record_csv_row(r);
    out += '\n';
  }
  return out;
}

json to_json(const SildResult& result, const ChannelRecord& rec) {
  json j;
  j["schema"] = kAnalysisSchema;
  j["record"] = to_json(rec);
  j["fom_sild_db"] = result.fom_sild;
  j["max_abs_sild_db"] = result.max_abs_sild;
  j["direction_residual_db"] = result.direction_residual;
  j["band_hz"] = {result.band_min, result.band_max};
  j["excluded_points"] = std::count(result.excluded.begin(), result.excluded.end(), true);
  j["sild_db"] = curve(result.frequencies, result.sild);
  j["sild_21_db"] = curve(result.frequencies, result.sild_21);
  j["sild_12_db"] = curve(result.frequencies, result.sild_12);
  j["eq_skew_s"] = curve(result.frequencies, result.eq_skew);
  return j;
}

json to_json(const SkewProfile& profile) {
  json j;
  j["schema"] = kSkewSchema;
  j["direction"] = profile.direction == Direction::LeftToRight ? "21" : "12";
  j["skew_s"] = curve(profile.frequencies, profile.skew);
  j["t_first_s"] = curve(profile.frequencies, profile.t_first);
  j["t_second_s"] = curve(profile.frequencies, profile.t_second);
  return j;
}

json to_json(const TdtTrace& trace, double threshold, double skew) {
  json j;
  j["schema"] = kTdtSchema;
  j["excitation"] = trace.kind == Excitation::Kind::Step ? "step" : "pulse";
  j["threshold"] = threshold;
  j["tdt_skew_s"] = skew;
  j["v_p"] = curve(trace.time, trace.v_p);
  j["v_n"] = curve(trace.time, trace.v_n);
  return j;
}

}  // namespace skewlab
