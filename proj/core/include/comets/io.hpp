#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace comets {

/// Writes `content` to a temporary sibling file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace comets
