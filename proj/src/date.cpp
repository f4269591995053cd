#include "cbsim/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cbsim {

std::optional<Date> parse_iso_date(std::string_view text)
{
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, v);
        if (ec != std::errc{} || ptr != first + len) return std::nullopt;
        return v;
    };
    const auto y = field(0, 4);
    const auto m = field(5, 2);
    const auto d = field(8, 2);
    if (!y || !m || !d) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

Date iso_date(std::string_view text)
{
    auto d = parse_iso_date(text);
    if (!d) throw std::invalid_argument("not an ISO-8601 date (YYYY-MM-DD): '" + std::string(text) + "'");
    return *d;
}

std::string format_iso_date(Date d)
{
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace cbsim
