#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "anonsim/csv.hpp"
#include "anonsim/rng.hpp"

// Check-in traces and their reduction to country / AS movement sequences.
namespace anonsim::mobility {

// Days since 1970-01-01; the civil conversions below are the usual
// proleptic-Gregorian era arithmetic.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy) + (m <= 2);
}

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Strict `YYYY-MM-DD`; returns the epoch day index.
inline std::int64_t parse_iso_date(std::string_view s, std::size_t lineno) {
  auto fail = [&]() -> std::int64_t {
    throw ParseError(lineno, "bad ISO date `" + std::string(s) + "`");
  };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return fail();
  int y = 0;
  unsigned m = 0, d = 0;
  if (!csv::parse_int(s.substr(0, 4), y) || !csv::parse_int(s.substr(5, 2), m) ||
      !csv::parse_int(s.substr(8, 2), d))
    return fail();
  if (m < 1 || m > 12 || d < 1) return fail();
  static constexpr unsigned mdays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  unsigned maxd = mdays[m - 1];
  if (m == 2 && is_leap(y)) maxd = 29;
  if (d > maxd) return fail();
  return days_from_civil(y, m, d);
}

inline std::string format_iso_date(std::int64_t day) {
  int y;
  unsigned m, d;
  civil_from_days(day, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

struct CheckIn {
  std::string user;
  std::int64_t day = 0;
  std::string country;
};

struct MobilityTrace {
  std::string user;
  std::vector<CheckIn> checkins;  // sorted by day, input order within a day
  std::size_t n_points() const { return checkins.size(); }
};

// CSV header `user,date,country`; one trace per user, sorted by user id.
inline std::vector<MobilityTrace> parse_checkins(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (!lines.empty() && csv::trim(lines[0]) != "user,date,country")
    throw ParseError(1, "expected header `user,date,country`");
  std::map<std::string, MobilityTrace> by_user;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = csv::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = csv::split_fields(line, ',');
    if (f.size() != 3) throw ParseError(lineno, "expected 3 fields");
    CheckIn c;
    c.user = std::string(csv::trim(f[0]));
    if (c.user.empty()) throw ParseError(lineno, "empty user id");
    c.day = parse_iso_date(csv::trim(f[1]), lineno);
    c.country = std::string(csv::trim(f[2]));
    if (c.country.empty()) throw ParseError(lineno, "empty country code");
    auto& trace = by_user[c.user];
    trace.user = c.user;
    trace.checkins.push_back(std::move(c));
  }
  std::vector<MobilityTrace> out;
  out.reserve(by_user.size());
  for (auto& [user, trace] : by_user) {
    std::stable_sort(trace.checkins.begin(), trace.checkins.end(),
                     [](const CheckIn& a, const CheckIn& b) { return a.day < b.day; });
    out.push_back(std::move(trace));
  }
  return out;
}

// Countries in order of first appearance; revisits are not recounted.
inline std::vector<std::string> country_sequence(const MobilityTrace& trace) {
  std::vector<std::string> out;
  for (const auto& c : trace.checkins)
    if (std::find(out.begin(), out.end(), c.country) == out.end())
      out.push_back(c.country);
  return out;
}

struct CountryAsMap {
  std::map<std::string, AsId> mapping;

  AsId at(const std::string& country) const {
    auto it = mapping.find(country);
    if (it == mapping.end())
      throw ValidationError("country `" + country + "` has no AS mapping");
    return it->second;
  }
};

// CSV header `country,asn`.
inline CountryAsMap parse_country_map(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (!lines.empty() && csv::trim(lines[0]) != "country,asn")
    throw ParseError(1, "expected header `country,asn`");
  CountryAsMap out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = csv::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = csv::split_fields(line, ',');
    if (f.size() != 2) throw ParseError(lineno, "expected 2 fields");
    std::string country(csv::trim(f[0]));
    AsId as = 0;
    if (country.empty()) throw ParseError(lineno, "empty country code");
    if (!csv::parse_int(f[1], as) || as < 1)
      throw ParseError(lineno, "bad AS number `" + std::string(f[1]) + "`");
    if (!out.mapping.emplace(country, as).second)
      throw ParseError(lineno, "duplicate country `" + country + "`");
  }
  return out;
}

// country_sequence mapped to ASes with consecutive duplicates collapsed: a
// movement that does not change the AS cannot change any path.
inline std::vector<AsId> as_sequence(const MobilityTrace& trace,
                                     const CountryAsMap& map) {
  std::vector<AsId> out;
  for (const auto& country : country_sequence(trace)) {
    AsId as = map.at(country);
    if (out.empty() || out.back() != as) out.push_back(as);
  }
  return out;
}

// The AS a user occupies on each day with data; the last check-in of a day
// wins (intra-day ordering is input order).
inline std::map<std::int64_t, AsId> day_locations(const MobilityTrace& trace,
                                                  const CountryAsMap& map) {
  std::map<std::int64_t, AsId> out;
  for (const auto& c : trace.checkins) out[c.day] = map.at(c.country);
  return out;
}

// Synthetic daily check-in traces: each user starts in a seeded country and
// switches to a different one with probability move_prob per day.
inline std::vector<MobilityTrace> gen_mobility_traces(
    std::size_t n_users, std::size_t n_days, const std::vector<std::string>& countries,
    double move_prob, std::uint64_t seed) {
  if (countries.empty()) throw ValidationError("country pool must be non-empty");
  Rng rng(seed);
  std::vector<MobilityTrace> out;
  out.reserve(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    MobilityTrace t;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "u%04zu", u + 1);
    t.user = buf;
    std::size_t where = rng.uniform_index(countries.size());
    for (std::size_t d = 0; d < n_days; ++d) {
      if (d > 0 && countries.size() > 1 && rng.bernoulli(move_prob)) {
        std::size_t next = where;
        while (next == where) next = rng.uniform_index(countries.size());
        where = next;
      }
      t.checkins.push_back(
          {t.user, static_cast<std::int64_t>(d), countries[where]});
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline std::string checkins_to_csv(const std::vector<MobilityTrace>& traces,
                                   std::int64_t base_day = 16801 /* 2016-01-01 */) {
  std::string out = "user,date,country\n";
  for (const auto& t : traces)
    for (const auto& c : t.checkins)
      out += t.user + "," + format_iso_date(base_day + c.day) + "," + c.country + "\n";
  return out;
}

}  // namespace anonsim::mobility
