#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gm {

std::string xml_escape(std::string_view s);

/// Fixed-point with at most `digits` fractional digits, trailing zeros
/// dropped, "-0" normalized. Locale independent.
std::string fmt_num(double v, int digits = 2);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ull);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

std::vector<std::uint8_t> read_file(const std::filesystem::path& p);
std::string read_text(const std::filesystem::path& p);
/// Writes to a sibling temp file and renames it over `p`.
void write_file_atomic(const std::filesystem::path& p, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& p, std::string_view text);

/// True when `svg` parses as XML and its root <svg> element has a viewBox.
bool is_valid_svg(std::string_view svg);

}  // namespace gm
