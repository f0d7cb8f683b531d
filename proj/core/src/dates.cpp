#include "exhawkes/io/dates.hpp"

#include <boost/date_time/gregorian/gregorian.hpp>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <regex>
#include <stdexcept>

namespace exhawkes::io {

namespace {

constexpr std::int64_t kMillisPerDay = 86400LL * 1000LL;

void check_date(int year, int month, int day) {
  try {
    (void)boost::gregorian::date(static_cast<unsigned short>(year), static_cast<unsigned short>(month),
                                 static_cast<unsigned short>(day));
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) + "-" +
                                std::to_string(day));
  }
}

}  // namespace

int days_in_year(int year) { return boost::gregorian::gregorian_calendar::is_leap_year(static_cast<unsigned short>(year)) ? 366 : 365; }

int days_in_month(int year, int month) {
  if (month < 1 || month > 12) throw std::invalid_argument("month out of range");
  return boost::gregorian::gregorian_calendar::end_of_month_day(static_cast<unsigned short>(year),
                                                               static_cast<unsigned short>(month));
}

int day_of_year(int year, int month, int day) {
  check_date(year, month, day);
  return boost::gregorian::date(static_cast<unsigned short>(year), static_cast<unsigned short>(month),
                                static_cast<unsigned short>(day))
      .day_of_year();
}

ParsedDate parse_iso_date(const std::string& text) {
  static const std::regex re(R"(^\s*(\d{4})(?:-(\d{1,2})(?:-(\d{1,2})(?:[T ](\d{2}):(\d{2}):(\d{2}(?:\.\d+)?))?)?)?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw std::invalid_argument("malformed date '" + text + "'");
  ParsedDate d;
  d.year = std::stoi(m[1].str());
  if (d.year < 1400 || d.year > 9999) throw std::invalid_argument("year out of range in '" + text + "'");
  const int month = m[2].matched ? std::stoi(m[2].str()) : 0;
  const int day = m[3].matched ? std::stoi(m[3].str()) : 0;
  if (month < 0 || month > 12) throw std::invalid_argument("month out of range in '" + text + "'");
  if (month > 0) d.month = month;
  if (day > 0) {
    if (!d.month) throw std::invalid_argument("day given without a month in '" + text + "'");
    check_date(d.year, month, day);
    d.day = day;
  }
  if (m[4].matched) {
    if (!d.day) throw std::invalid_argument("time given without a day in '" + text + "'");
    const int hh = std::stoi(m[4].str());
    const int mm = std::stoi(m[5].str());
    const double ss = std::stod(m[6].str());
    if (hh > 23 || mm > 59 || ss >= 60.0) throw std::invalid_argument("time out of range in '" + text + "'");
    d.seconds = hh * 3600.0 + mm * 60.0 + ss;
  }
  return d;
}

double decimal_year(int year, int month, int day, double seconds) {
  const int doy = day_of_year(year, month, day);
  return double(year) + (double(doy - 1) + seconds / 86400.0) / double(days_in_year(year));
}

std::string format_decimal_year(double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("cannot format a non-finite time");
  int year = static_cast<int>(std::floor(t));
  std::int64_t ms = std::llround((t - double(year)) * double(days_in_year(year)) * double(kMillisPerDay));
  if (ms >= std::int64_t(days_in_year(year)) * kMillisPerDay) {
    ms -= std::int64_t(days_in_year(year)) * kMillisPerDay;
    ++year;
  }
  const auto day_index = static_cast<int>(ms / kMillisPerDay);
  const std::int64_t rem = ms % kMillisPerDay;
  const auto date = boost::gregorian::date(static_cast<unsigned short>(year), 1, 1) + boost::gregorian::days(day_index);
  char buf[64];
  if (rem == 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", int(date.year()), int(date.month()), int(date.day()));
  } else {
    const auto secs = rem / 1000;
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03lld", int(date.year()), int(date.month()),
                  int(date.day()), int(secs / 3600), int((secs / 60) % 60), int(secs % 60),
                  static_cast<long long>(rem % 1000));
  }
  return buf;
}

double parse_time_value(const std::string& text) {
  if (text.find('-') == std::string::npos) {
    double v = 0.0;
    const auto* b = text.data();
    const auto* e = text.data() + text.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec == std::errc() && res.ptr == e) return v;
  }
  const auto d = parse_iso_date(text);
  return decimal_year(d.year, d.month.value_or(1), d.day.value_or(1), d.seconds.value_or(0.0));
}

}  // namespace exhawkes::io
