#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace memaudit {

std::vector<std::string_view> split(std::string_view text, std::string_view delimiter);

std::string_view trim(std::string_view text);

// Trim, then collapse every internal whitespace run to a single space.
std::string normalize_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view delimiter);

// Each byte is mapped to the code point of the same value.
std::string latin1_to_utf8(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace memaudit
