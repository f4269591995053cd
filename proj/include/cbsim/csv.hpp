#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cbsim {

/// Input-data problem carrying the file and 1-based line it came from.
class DataError : public std::runtime_error {
public:
    DataError(const std::filesystem::path& file, std::size_t line, const std::string& what)
        : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct CsvRow {
    std::size_t line = 0;  // 1-based line in the source file
    std::vector<std::string> fields;
};

/// Splits one CSV record. Handles double-quoted fields with "" escapes; trims
/// surrounding whitespace from unquoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// All non-blank rows of a file. Throws std::runtime_error naming the path if
/// the file cannot be opened.
std::vector<CsvRow> read_csv_rows(const std::filesystem::path& path);

std::uint64_t parse_uint(std::string_view text, const std::filesystem::path& file, std::size_t line);
double parse_double(std::string_view text, const std::filesystem::path& file, std::size_t line);

/// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace cbsim
