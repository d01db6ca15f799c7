#pragma once

// Small text-file helpers shared by the readers and writers.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace geokge {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Calls `fn` for every line, without the terminator (a trailing '\r' is stripped too).
void for_each_line(std::string_view text, const std::function<void(std::string_view)>& fn);

std::vector<std::string_view> split_tabs(std::string_view line);
std::string_view trim(std::string_view s);
bool is_blank_or_comment(std::string_view line);

/// Shortest decimal text that parses back to the identical double.
std::string format_exact(double v);
double parse_double(std::string_view s);

std::string hex64(std::uint64_t v);

/// Parses `key = value` lines ('#' comments allowed). Duplicate keys are an error.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source);

}  // namespace geokge
