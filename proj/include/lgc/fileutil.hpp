#pragma once

#include <filesystem>
#include <string>

namespace lgc {

/// Writes to a sibling temporary file, then renames over `path`, so a failed
/// write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace lgc
