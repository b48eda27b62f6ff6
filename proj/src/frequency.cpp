#include "foreval/frequency.hpp"

#include <array>
#include <cstdio>

#include "foreval/errors.hpp"

namespace foreval {

namespace {

bool is_leap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap(year)) return 29;
  return kDays[static_cast<std::size_t>(month - 1)];
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t count) {
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::kDataError, "invalid timestamp: " + std::string(s));
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t month_index(const Timestamp& ts) {
  return static_cast<std::int64_t>(ts.year) * 12 + (ts.month - 1);
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  // Accepted shapes: YYYY-MM-DD [ (space|T) HH:MM[:SS] ] [Z]
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::kDataError, "invalid timestamp: " + std::string(text));
  }
  Timestamp ts;
  ts.year = parse_digits(text, 0, 4);
  ts.month = parse_digits(text, 5, 2);
  ts.day = parse_digits(text, 8, 2);
  if (text.size() > 10) {
    if ((text[10] != ' ' && text[10] != 'T') || text.size() < 16 || text[13] != ':') {
      throw Error(ErrorCode::kDataError, "invalid timestamp: " + std::string(text));
    }
    ts.hour = parse_digits(text, 11, 2);
    ts.minute = parse_digits(text, 14, 2);
    if (text.size() > 16) {
      if (text[16] != ':' || text.size() != 19) {
        throw Error(ErrorCode::kDataError, "invalid timestamp: " + std::string(text));
      }
      ts.second = parse_digits(text, 17, 2);
    }
  }
  if (ts.month < 1 || ts.month > 12 || ts.day < 1 ||
      ts.day > days_in_month(ts.year, ts.month) || ts.hour > 23 ||
      ts.minute > 59 || ts.second > 59) {
    throw Error(ErrorCode::kDataError, "invalid timestamp: " + std::string(text));
  }
  return ts;
}

Frequency parse_frequency(std::string_view token) {
  Frequency f;
  f.token = std::string(token);
  using Unit = Frequency::Unit;
  if (token == "T" || token == "5T" || token == "10T" || token == "15T" ||
      token == "30T") {
    f.unit = Unit::kMinute;
    f.multiple = token == "T" ? 1 : std::stoi(std::string(token.substr(0, token.size() - 1)));
    return f;
  }
  if (token == "H") { f.unit = Unit::kHour; return f; }
  if (token == "D") { f.unit = Unit::kDay; return f; }
  if (token == "W") { f.unit = Unit::kWeek; return f; }
  if (token == "M") { f.unit = Unit::kMonth; return f; }
  if (token == "Q") { f.unit = Unit::kQuarter; return f; }
  if (token == "Y") { f.unit = Unit::kYear; return f; }
  throw Error(ErrorCode::kUnknownFrequency, "unsupported frequency token: " + std::string(token));
}

int default_seasonality(const Frequency& freq) {
  using Unit = Frequency::Unit;
  switch (freq.unit) {
    case Unit::kMinute: return 1440 / freq.multiple;
    case Unit::kHour: return 24;
    case Unit::kDay: return 7;
    case Unit::kWeek: return 1;
    case Unit::kMonth: return 12;
    case Unit::kQuarter: return 4;
    case Unit::kYear: return 1;
  }
  throw Error(ErrorCode::kUnknownFrequency, "unsupported frequency token: " + freq.token);
}

int default_seasonality(std::string_view token) {
  return default_seasonality(parse_frequency(token));
}

std::int64_t days_from_civil(int year, int month, int day) {
  // Howard Hinnant's algorithm, shifted so the era starts in March.
  year -= month <= 2;
  const std::int64_t era = floor_div(year, 400);
  const unsigned yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t days, int& year, int& month, int& day) {
  days += 719468;
  const std::int64_t era = floor_div(days, 146097);
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = static_cast<int>(y + (month <= 2));
}

std::int64_t spacing_key(const Frequency& freq, const Timestamp& ts) {
  using Unit = Frequency::Unit;
  switch (freq.unit) {
    case Unit::kMinute:
    case Unit::kHour:
      return days_from_civil(ts.year, ts.month, ts.day) * 86400 +
             ts.hour * 3600 + ts.minute * 60 + ts.second;
    case Unit::kDay:
    case Unit::kWeek:
      return days_from_civil(ts.year, ts.month, ts.day);
    case Unit::kMonth:
    case Unit::kQuarter:
    case Unit::kYear:
      return month_index(ts);
  }
  throw Error(ErrorCode::kUnknownFrequency, "unsupported frequency token: " + freq.token);
}

std::int64_t expected_spacing(const Frequency& freq) {
  using Unit = Frequency::Unit;
  switch (freq.unit) {
    case Unit::kMinute: return static_cast<std::int64_t>(freq.multiple) * 60;
    case Unit::kHour: return 3600;
    case Unit::kDay: return 1;
    case Unit::kWeek: return 7;
    case Unit::kMonth: return 1;
    case Unit::kQuarter: return 3;
    case Unit::kYear: return 12;
  }
  throw Error(ErrorCode::kUnknownFrequency, "unsupported frequency token: " + freq.token);
}

Timestamp advance(const Frequency& freq, const Timestamp& base, std::int64_t steps) {
  using Unit = Frequency::Unit;
  Timestamp out = base;
  switch (freq.unit) {
    case Unit::kMinute:
    case Unit::kHour: {
      std::int64_t total = spacing_key(freq, base) + steps * expected_spacing(freq);
      std::int64_t days = floor_div(total, 86400);
      std::int64_t rem = total - days * 86400;
      civil_from_days(days, out.year, out.month, out.day);
      out.hour = static_cast<int>(rem / 3600);
      out.minute = static_cast<int>((rem % 3600) / 60);
      out.second = static_cast<int>(rem % 60);
      return out;
    }
    case Unit::kDay:
    case Unit::kWeek: {
      std::int64_t days =
          days_from_civil(base.year, base.month, base.day) + steps * expected_spacing(freq);
      civil_from_days(days, out.year, out.month, out.day);
      return out;
    }
    case Unit::kMonth:
    case Unit::kQuarter:
    case Unit::kYear: {
      std::int64_t idx = month_index(base) + steps * expected_spacing(freq);
      out.year = static_cast<int>(floor_div(idx, 12));
      out.month = static_cast<int>(idx - floor_div(idx, 12) * 12) + 1;
      if (out.day > days_in_month(out.year, out.month)) {
        out.day = days_in_month(out.year, out.month);
      }
      return out;
    }
  }
  throw Error(ErrorCode::kUnknownFrequency, "unsupported frequency token: " + freq.token);
}

std::string format_timestamp(const Frequency& freq, const Timestamp& ts) {
  using Unit = Frequency::Unit;
  char buf[32];
  if (freq.unit == Unit::kMinute || freq.unit == Unit::kHour) {
    if (ts.second != 0) {
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", ts.year,
                    ts.month, ts.day, ts.hour, ts.minute, ts.second);
    } else {
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", ts.year,
                    ts.month, ts.day, ts.hour, ts.minute);
    }
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", ts.year, ts.month, ts.day);
  }
  return buf;
}

}  // namespace foreval
