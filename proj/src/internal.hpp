#pragma once

// File-format helpers shared by the harness translation units.

#include <filesystem>
#include <string>
#include <vector>

namespace ofnav::detail {

inline constexpr const char* kCsvEol = "\r\n";  // RFC-4180 line ending

std::string fmt_double(double v);
std::string csv_escape(const std::string& s);
std::string frame_name(std::size_t index);

// Numeric CSV body (header skipped); "nan" cells become quiet NaNs.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::size_t columns);

}  // namespace ofnav::detail
