#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace cbsim {

using Date = std::chrono::sys_days;

/// Strict YYYY-MM-DD. Returns nullopt for anything else, including
/// impossible calendar dates such as 2020-02-30.
std::optional<Date> parse_iso_date(std::string_view text);

/// Throws std::invalid_argument if the text is not a valid ISO date.
Date iso_date(std::string_view text);

std::string format_iso_date(Date d);

inline Date add_days(Date d, long n) { return d + std::chrono::days{n}; }

inline long days_between(Date from, Date to) { return (to - from).count(); }

}  // namespace cbsim
