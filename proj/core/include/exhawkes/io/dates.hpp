#pragma once

#include <optional>
#include <string>

namespace exhawkes::io {

// ISO calendar date with optional parts: "YYYY", "YYYY-MM", "YYYY-MM-DD",
// "YYYY-MM-DDTHH:MM:SS[.fff]". A zero month or day ("2015-03-00") counts as missing.
struct ParsedDate {
  int year{0};
  std::optional<int> month;
  std::optional<int> day;
  std::optional<double> seconds;  // seconds into the day when a time is given
};

// Throws std::invalid_argument on malformed text or an impossible calendar date.
[[nodiscard]] ParsedDate parse_iso_date(const std::string& text);

[[nodiscard]] int days_in_year(int year);
[[nodiscard]] int days_in_month(int year, int month);
// 1-based day of the year
[[nodiscard]] int day_of_year(int year, int month, int day);

// Time as a decimal year: year + (day_of_year - 1 + seconds / 86400) / days_in_year.
[[nodiscard]] double decimal_year(int year, int month, int day, double seconds = 0.0);

// Inverse of decimal_year at millisecond resolution (a decimal year near 2000 resolves
// about 7 microseconds): "YYYY-MM-DD" when the time rounds to the start of a day,
// otherwise "YYYY-MM-DDTHH:MM:SS.fff".
[[nodiscard]] std::string format_decimal_year(double t);

// A config date: ISO text (missing parts default to the first month / day) or a decimal year.
[[nodiscard]] double parse_time_value(const std::string& text);

}  // namespace exhawkes::io
