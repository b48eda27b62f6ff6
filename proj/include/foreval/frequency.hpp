#ifndef FOREVAL_FREQUENCY_HPP
#define FOREVAL_FREQUENCY_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace foreval {

// Calendar timestamp, second resolution. Files carry ISO-8601 strings
// ("2021-07-01", "2021-07-01 13:30", "2021-07-01T13:30:00", optional
// trailing "Z"); internally the scoring core only sees integer keys derived
// from these (see spacing_key).
struct Timestamp {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;

  bool operator==(const Timestamp&) const = default;
};

Timestamp parse_timestamp(std::string_view text);

// Supported frequency tokens: T, 5T, 10T, 15T, 30T, H, D, W, M, Q, Y.
struct Frequency {
  enum class Unit { kMinute, kHour, kDay, kWeek, kMonth, kQuarter, kYear };

  std::string token;
  Unit unit = Unit::kDay;
  int multiple = 1;  // k for the kT tokens, 1 otherwise

  bool operator==(const Frequency& o) const { return token == o.token; }
};

// Throws UnknownFrequency for anything outside the supported token set.
Frequency parse_frequency(std::string_view token);

// Seasonal period m implied by the frequency: T->1440, 5T->288, 10T->144,
// 15T->96, 30T->48, H->24, D->7, W->1, M->12, Q->4, Y->1.
int default_seasonality(const Frequency& freq);
int default_seasonality(std::string_view token);

// Days since 1970-01-01 of the civil date (proleptic Gregorian calendar).
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

// Integer key on which regular spacing is checked. Consecutive observations
// of a regular series differ by exactly expected_spacing(freq):
//   minute/hour units: key = seconds since epoch, spacing = step in seconds
//   day/week units:    key = days since epoch,   spacing = 1 or 7
//   month/quarter/year: key = month index,       spacing = 1, 3 or 12
// Month-based keys ignore the day and time of day, so month-end dates that
// drift (Jan 31 -> Feb 28) still count as regular.
std::int64_t spacing_key(const Frequency& freq, const Timestamp& ts);
std::int64_t expected_spacing(const Frequency& freq);

// Timestamp `steps` frequency steps after `base`. Month-based units add
// calendar months and clamp the day to the target month's length.
Timestamp advance(const Frequency& freq, const Timestamp& base, std::int64_t steps);

// Canonical text form: date only for day-and-coarser units, otherwise
// "YYYY-MM-DD HH:MM" (with ":SS" appended when seconds are nonzero).
std::string format_timestamp(const Frequency& freq, const Timestamp& ts);

}  // namespace foreval

#endif  // FOREVAL_FREQUENCY_HPP
