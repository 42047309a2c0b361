#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "skewlab/batch.hpp"
#include "skewlab/conventional.hpp"
#include "skewlab/deskew.hpp"

namespace skewlab {

inline constexpr std::string_view kReportSchema = "skewlab-report/1";
inline constexpr std::string_view kAnalysisSchema = "skewlab-analysis/1";
inline constexpr std::string_view kSkewSchema = "skewlab-skew/1";
inline constexpr std::string_view kTdtSchema = "skewlab-tdt/1";

inline constexpr std::string_view kRecordCsvHeader =
    "source_id,fom_sild_db,max_abs_sild_db,f_min_hz,f_max_hz,reciprocity_quality,flags";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// `enforced_reciprocity` and/or `nonconverged_points=N`, ';'-separated.
std::string format_flags(const ChannelRecord& rec);

nlohmann::json to_json(const ChannelRecord& rec);
ChannelRecord record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BatchReport& report);
/// Throws InvalidArgument on a schema mismatch.
BatchReport report_from_json(const nlohmann::json& j);

std::string record_csv_row(const ChannelRecord& rec);
/// Header plus one row per record.
std::string to_csv(const BatchReport& report);

/// SILD curves (frequency_hz, value) pairs plus the scalar metrics.
nlohmann::json to_json(const SildResult& result, const ChannelRecord& rec);
nlohmann::json to_json(const SkewProfile& profile);
nlohmann::json to_json(const TdtTrace& trace, double threshold, double skew);

}  // namespace skewlab
