#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace butterfly {

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a(std::string_view data);
std::string hash_hex(std::string_view data);

// Column-major table rendered as CSV: a `# input_hash=...` line, the header, then one
// row per sample. Numbers use the shortest round-trip form, '.' decimal, LF endings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

std::string render_csv(const CsvTable& table, std::string_view input_hash);

// `key = value` lines in insertion order, after the hash comment.
using Summary = std::vector<std::pair<std::string, std::string>>;
std::string render_summary(const Summary& summary, std::string_view input_hash);
std::string format_number(double value);

// Writes `path.tmp` then renames over `path`. Errors: Io.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace butterfly
