#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skewlab/network.hpp"

namespace skewlab {

enum class FrequencyUnit { Hz, kHz, MHz, GHz };
enum class DataFormat { RI, MA, DB };

/// Option-line contents of a Touchstone v1 file. Only S-parameters are
/// representable; Y/Z/G/H files are rejected by the parser.
struct TouchstoneOptions {
  FrequencyUnit frequency_unit = FrequencyUnit::GHz;
  DataFormat format = DataFormat::MA;
  double reference_resistance = 50.0;
};

double unit_scale(FrequencyUnit unit);
std::string_view to_string(FrequencyUnit unit);
std::string_view to_string(DataFormat format);
DataFormat parse_data_format(std::string_view text);

/// Magnitude written for an exactly-zero entry in DB format.
inline constexpr double kTouchstoneDbFloor = -1000.0;

/// Parses Touchstone v1 text. Frequencies come back in Hz. 4-port blocks are
/// row-major; 2-port lines use the S11 S21 S12 S22 column order. A 2-port
/// noise-parameter section is skipped and reported through `warnings`.
SingleEndedNetwork parse_touchstone(std::string_view text, int expected_ports,
                                    std::vector<std::string>* warnings = nullptr);

/// Emits the option line followed by one block per frequency, 17 significant
/// digits per value.
std::string write_touchstone(const SingleEndedNetwork& net, const TouchstoneOptions& options = {});

/// Port count from the .sNp extension; 4 when the extension is not recognized.
int ports_from_extension(const std::filesystem::path& path);

SingleEndedNetwork read_touchstone_file(const std::filesystem::path& path,
                                        std::vector<std::string>* warnings = nullptr);
void write_touchstone_file(const std::filesystem::path& path, const SingleEndedNetwork& net,
                           const TouchstoneOptions& options = {});

}  // namespace skewlab
