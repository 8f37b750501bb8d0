#include "butterfly/io.hpp"

#include "butterfly/errors.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <system_error>

namespace butterfly {

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::string_view data) { return fmt::format("{:016x}", fnv1a(data)); }

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0
    return fmt::format("{}", value);
}

std::string render_csv(const CsvTable& table, std::string_view input_hash) {
    if (table.header.size() != table.columns.size()) {
        fail(ErrorKind::Validation, "CSV header and column counts differ");
    }
    const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
    for (const auto& col : table.columns) {
        if (col.size() != rows) fail(ErrorKind::Validation, "CSV columns have different lengths");
    }

    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "# input_hash={}\n", input_hash);
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        fmt::format_to(std::back_inserter(out), "{}{}", c == 0 ? "" : ",", table.header[c]);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c != 0) out.push_back(',');
            const std::string cell = format_number(table.columns[c][r]);
            out.append(cell.data(), cell.data() + cell.size());
        }
        out.push_back('\n');
    }
    return fmt::to_string(out);
}

std::string render_summary(const Summary& summary, std::string_view input_hash) {
    std::string out = fmt::format("# input_hash={}\n", input_hash);
    for (const auto& [key, value] : summary) out += fmt::format("{} = {}\n", key, value);
    return out;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorKind::Io, "cannot move " + tmp.string() + " to " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace butterfly
