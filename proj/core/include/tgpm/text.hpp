#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tgpm {

/// Shortest-safe decimal form used by every CSV writer: 17 significant digits.
std::string format_double(double value);

std::vector<std::string> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view s);

/// Writes `contents` to `path` via a temporary sibling file and rename, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace tgpm
