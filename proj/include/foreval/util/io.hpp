#ifndef FOREVAL_UTIL_IO_HPP
#define FOREVAL_UTIL_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace foreval {

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temp file followed by rename, so readers never observe
// a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Splits on '\n', dropping a trailing '\r' on each line and a final empty
// line left by a trailing newline.
std::vector<std::string> split_lines(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

std::string trim(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace foreval

#endif  // FOREVAL_UTIL_IO_HPP
