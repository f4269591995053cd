#include "cbsim/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace cbsim {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (true) {
        std::string field;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i < line.size() && line[i] == '"') {
            ++i;
            while (i < line.size()) {
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                field += line[i++];
            }
            while (i < line.size() && line[i] != ',') ++i;
        } else {
            const auto start = i;
            while (i < line.size() && line[i] != ',') ++i;
            field = std::string(trim(line.substr(start, i - start)));
        }
        out.push_back(std::move(field));
        if (i >= line.size()) break;
        ++i;  // comma
    }
    return out;
}

std::vector<CsvRow> read_csv_rows(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        rows.push_back({number, split_csv_line(line)});
    }
    return rows;
}

std::uint64_t parse_uint(std::string_view text, const std::filesystem::path& file, std::size_t line)
{
    std::uint64_t v = 0;
    const auto t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw DataError(file, line, "not a non-negative integer: '" + std::string(text) + "'");
    return v;
}

double parse_double(std::string_view text, const std::filesystem::path& file, std::size_t line)
{
    double v = 0;
    const auto t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw DataError(file, line, "not a number: '" + std::string(text) + "'");
    return v;
}

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace cbsim
