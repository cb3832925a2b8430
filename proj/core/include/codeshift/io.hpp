#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace codeshift {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target, so readers
// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Splits on '\n', dropping a trailing empty segment and tolerating CRLF.
std::vector<std::string> split_lines(const std::string& text);

bool is_valid_utf8(const std::string& bytes);

} // namespace codeshift
