#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace sqlprobe {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string trim_right(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Strips one layer of surrounding quote characters ("x", `x`, [x], 'x').
std::string strip_quotes(std::string_view s);

/// Lowercased, unquoted form used for every schema-name comparison.
std::string canonical_name(std::string_view s);

/// SHA-256 of the raw bytes, lowercase hex.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Seeded draws below use only the raw engine output.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

/// Standard normal draw (Box-Muller on uniform_unit).
double standard_normal(Rng& rng);

/// Shortest round-trip text for a double, stable across platforms.
std::string format_double(double v);

}  // namespace sqlprobe
