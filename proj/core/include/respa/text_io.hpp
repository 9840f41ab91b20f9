#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace respa {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view text, char sep);

std::string read_text_file(const std::filesystem::path& path);

// Creates parent directories as needed. Writing bytes identical to what is
// already on disk is a no-op; replacing different bytes requires force,
// otherwise OutputConflictError.
void write_text_file(const std::filesystem::path& path, std::string_view content, bool force);

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t v);

}  // namespace respa
