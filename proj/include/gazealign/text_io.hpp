#pragma once
// Small text/file helpers shared by the loaders and report writers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gazealign {

// Nine significant digits ("%.9g"); the report serialization format.
std::string format_sig9(double value);
// The double nearest to format_sig9(value), so JSON writers emit at most 9 digits.
double round_sig9(double value);
// Shortest representation that parses back to the identical double.
std::string format_roundtrip(double value);

// Strict full-field parse; returns false on trailing garbage or overflow.
bool parse_double(std::string_view text, double& out);
bool parse_size(std::string_view text, std::size_t& out);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace gazealign
