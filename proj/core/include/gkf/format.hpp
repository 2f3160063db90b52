#pragma once

namespace gkf {

inline constexpr int kFormatVersion = 1;

// First line of every CSV file written by the library.
inline constexpr const char* kCsvVersionLine = "# format_version: 1\n";

}  // namespace gkf
